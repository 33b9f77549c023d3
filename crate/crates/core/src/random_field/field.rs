use crate::error::Result;
use crate::linalg;
use crate::scalar::Real;

/// A quasi-log-likelihood random field `theta -> H(theta)` with analytic
/// first and second derivatives.
pub trait QuasiLikelihood<T: Real>: Sync {
    fn dim(&self) -> usize;
    fn value(&self, theta: &[T]) -> Result<T>;
    fn gradient(&self, theta: &[T]) -> Result<Vec<T>>;
    /// Row-major `p x p`.
    fn hessian(&self, theta: &[T]) -> Result<Vec<T>>;
}

impl<T: Real, F: QuasiLikelihood<T> + ?Sized> QuasiLikelihood<T> for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, theta: &[T]) -> Result<T> {
        (**self).value(theta)
    }
    fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        (**self).gradient(theta)
    }
    fn hessian(&self, theta: &[T]) -> Result<Vec<T>> {
        (**self).hessian(theta)
    }
}

/// `H(theta) = c + a . theta - theta' B theta / 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticField<T> {
    pub linear: Vec<T>,
    /// Symmetric `p x p` curvature, row-major.
    pub curvature: Vec<T>,
    pub constant: T,
}

impl<T: Real> QuadraticField<T> {
    /// `-(scale/2) (theta - center)' (theta - center) ` style isotropic bowl.
    pub fn bowl(center: &[T], scale: T) -> Self {
        let p = center.len();
        let mut curvature = vec![T::zero(); p * p];
        for i in 0..p {
            curvature[i * p + i] = scale;
        }
        let linear = center.iter().map(|c| *c * scale).collect();
        let constant = -T::lit(0.5) * scale * center.iter().map(|c| *c * *c).sum::<T>();
        QuadraticField { linear, curvature, constant }
    }

    /// Unconstrained maximizer `B^{-1} a`.
    pub fn argmax(&self) -> Option<Vec<T>> {
        let p = self.linear.len();
        linalg::sym_inverse(p, &self.curvature).map(|inv| linalg::mat_vec(p, &inv, &self.linear))
    }

    pub fn shifted(&self, by: T) -> Self {
        QuadraticField { constant: self.constant + by, ..self.clone() }
    }
}

impl<T: Real> QuasiLikelihood<T> for QuadraticField<T> {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, theta: &[T]) -> Result<T> {
        let p = self.dim();
        let lin: T = self.linear.iter().zip(theta).map(|(a, t)| *a * *t).sum();
        Ok(self.constant + lin - T::lit(0.5) * linalg::quad_form(p, &self.curvature, theta))
    }

    fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim();
        let bt = linalg::mat_vec(p, &self.curvature, theta);
        Ok(self.linear.iter().zip(bt).map(|(a, b)| *a - b).collect())
    }

    fn hessian(&self, _theta: &[T]) -> Result<Vec<T>> {
        Ok(self.curvature.iter().map(|v| -*v).collect())
    }
}

/// Any closure field with derivatives by central differences; used for
/// tests and for user-supplied fields without analytic derivatives.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
    pub step: f64,
}

impl<F> FnField<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnField { dim, f, step: 1e-5 }
    }
}

impl<T: Real, F: Fn(&[T]) -> T + Sync> QuasiLikelihood<T> for FnField<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, theta: &[T]) -> Result<T> {
        Ok((self.f)(theta))
    }

    fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let h = T::lit(self.step);
        let mut x = theta.to_vec();
        let mut g = vec![T::zero(); self.dim];
        for k in 0..self.dim {
            x[k] = theta[k] + h;
            let up = (self.f)(&x);
            x[k] = theta[k] - h;
            let dn = (self.f)(&x);
            x[k] = theta[k];
            g[k] = (up - dn) / (h + h);
        }
        Ok(g)
    }

    fn hessian(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim;
        let h = T::lit(self.step.sqrt() * 1e-1);
        let mut x = theta.to_vec();
        let mut out = vec![T::zero(); p * p];
        let f0 = (self.f)(theta);
        for i in 0..p {
            for j in i..p {
                let v = if i == j {
                    x[i] = theta[i] + h;
                    let up = (self.f)(&x);
                    x[i] = theta[i] - h;
                    let dn = (self.f)(&x);
                    x[i] = theta[i];
                    (up - f0 - f0 + dn) / (h * h)
                } else {
                    let mut eval = |si: T, sj: T| {
                        x[i] = theta[i] + si * h;
                        x[j] = theta[j] + sj * h;
                        let v = (self.f)(&x);
                        x[i] = theta[i];
                        x[j] = theta[j];
                        v
                    };
                    let one = T::one();
                    (eval(one, one) - eval(one, -one) - eval(-one, one) + eval(-one, -one)) / (T::lit(4.0) * h * h)
                };
                out[i * p + j] = v;
                out[j * p + i] = v;
            }
        }
        Ok(out)
    }
}
