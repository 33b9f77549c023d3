//! Small dense linear algebra on row-major `p x p` matrices. The parameter
//! dimension here is tiny (p <= a handful), so cyclic Jacobi is plenty.

use crate::scalar::Real;

/// Eigen-decomposition of a symmetric matrix: `(values, vectors)` where
/// column `k` of `vectors` (row-major) is the eigenvector for `values[k]`.
pub fn sym_eigen<T: Real>(p: usize, a: &[T]) -> (Vec<T>, Vec<T>) {
    assert_eq!(a.len(), p * p);
    let mut m = a.to_vec();
    // symmetrize to absorb rounding asymmetry
    for i in 0..p {
        for j in (i + 1)..p {
            let s = (m[i * p + j] + m[j * p + i]) * T::lit(0.5);
            m[i * p + j] = s;
            m[j * p + i] = s;
        }
    }
    let mut v = identity::<T>(p);
    for _sweep in 0..100 {
        let mut off = T::zero();
        for i in 0..p {
            for j in (i + 1)..p {
                off = off + m[i * p + j] * m[i * p + j];
            }
        }
        let scale: T = m.iter().map(|x| *x * *x).sum();
        if off <= T::epsilon() * T::epsilon() * scale || off == T::zero() {
            break;
        }
        for i in 0..p {
            for j in (i + 1)..p {
                let aij = m[i * p + j];
                if aij == T::zero() {
                    continue;
                }
                let aii = m[i * p + i];
                let ajj = m[j * p + j];
                let tau = (ajj - aii) / (T::lit(2.0) * aij);
                let t = tau.signum() / (tau.abs() + (T::one() + tau * tau).sqrt());
                let t = if tau == T::zero() { T::one() } else { t };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..p {
                    let mki = m[k * p + i];
                    let mkj = m[k * p + j];
                    m[k * p + i] = c * mki - s * mkj;
                    m[k * p + j] = s * mki + c * mkj;
                }
                for k in 0..p {
                    let mik = m[i * p + k];
                    let mjk = m[j * p + k];
                    m[i * p + k] = c * mik - s * mjk;
                    m[j * p + k] = s * mik + c * mjk;
                }
                for k in 0..p {
                    let vki = v[k * p + i];
                    let vkj = v[k * p + j];
                    v[k * p + i] = c * vki - s * vkj;
                    v[k * p + j] = s * vki + c * vkj;
                }
            }
        }
    }
    let values = (0..p).map(|i| m[i * p + i]).collect();
    (values, v)
}

pub fn identity<T: Real>(p: usize) -> Vec<T> {
    let mut out = vec![T::zero(); p * p];
    for i in 0..p {
        out[i * p + i] = T::one();
    }
    out
}

/// `V diag(f(lambda)) V^T` for a symmetric matrix.
pub fn sym_apply<T: Real>(p: usize, a: &[T], f: impl Fn(T) -> T) -> Vec<T> {
    let (vals, vecs) = sym_eigen(p, a);
    let mut out = vec![T::zero(); p * p];
    for k in 0..p {
        let fk = f(vals[k]);
        for i in 0..p {
            for j in 0..p {
                out[i * p + j] = out[i * p + j] + vecs[i * p + k] * fk * vecs[j * p + k];
            }
        }
    }
    out
}

pub fn sym_sqrt<T: Real>(p: usize, a: &[T]) -> Vec<T> {
    sym_apply(p, a, |x| x.max(T::zero()).sqrt())
}

/// Inverse of a symmetric matrix; `None` when numerically singular.
pub fn sym_inverse<T: Real>(p: usize, a: &[T]) -> Option<Vec<T>> {
    let (vals, _) = sym_eigen(p, a);
    let max = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let min = vals.iter().fold(T::infinity(), |m, v| m.min(v.abs()));
    if max == T::zero() || min <= max * T::epsilon() * T::lit(64.0) {
        return None;
    }
    Some(sym_apply(p, a, |x| T::one() / x))
}

pub fn min_eigenvalue<T: Real>(p: usize, a: &[T]) -> T {
    sym_eigen(p, a).0.into_iter().fold(T::infinity(), |m, v| m.min(v))
}

pub fn mat_vec<T: Real>(p: usize, a: &[T], x: &[T]) -> Vec<T> {
    (0..p)
        .map(|i| (0..p).map(|j| a[i * p + j] * x[j]).sum())
        .collect()
}

pub fn quad_form<T: Real>(p: usize, a: &[T], x: &[T]) -> T {
    let ax = mat_vec(p, a, x);
    ax.iter().zip(x).map(|(u, v)| *u * *v).sum()
}

pub fn trace<T: Real>(p: usize, a: &[T]) -> T {
    (0..p).map(|i| a[i * p + i]).sum()
}

pub fn norm<T: Real>(x: &[T]) -> T {
    x.iter().map(|v| *v * *v).sum::<T>().sqrt()
}
