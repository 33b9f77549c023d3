//! Quasi-likelihood field of the ergodic regression model, discretized as
//! left-endpoint Itô sums on the observation grid:
//!
//! `H_T(theta) = sum S_j^{-1} b_j(theta) dY_j - 1/2 sum S_j^{-1} b_j(theta)^2 h`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::process_sim::{ErgodicModelSpec, RegressionCoefficients, RegressionPaths};
use crate::random_field::{QuadraticField, QuasiLikelihood};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct RegressionField<T: Real> {
    coeffs: Arc<dyn RegressionCoefficients<T>>,
    h: T,
    u: Vec<T>,
    b0: Vec<T>,
    inv_s: Vec<T>,
    dy: Vec<T>,
}

impl<T: Real> RegressionField<T> {
    pub fn new(paths: &RegressionPaths<T>, model: &ErgodicModelSpec<T>) -> Result<Self> {
        paths.check_aligned()?;
        let n = paths.grid().n_steps();
        let c = &model.coeffs;
        let mut inv_s = Vec::with_capacity(n);
        for j in 0..n {
            let sig = c.sigma0(paths.l.x(j)) * c.sigma1(paths.u.x(j));
            let s = sig * sig;
            if !(s > T::zero() && s.is_finite()) {
                return Err(Error::SingularDiffusion { index: j });
            }
            inv_s.push(T::one() / s);
        }
        Ok(RegressionField {
            coeffs: c.clone(),
            h: paths.grid().step(),
            u: (0..n).map(|j| paths.u.x(j)).collect(),
            b0: (0..n).map(|j| c.b0(paths.l.x(j))).collect(),
            inv_s,
            dy: paths.y.increments(),
        })
    }

    pub fn n_obs(&self) -> usize {
        self.dy.len()
    }

    /// Exact quadratic representation when `b1` is affine in `theta`.
    pub fn quadratic(&self) -> Option<QuadraticField<T>> {
        let p = self.coeffs.dim();
        let mut phi = vec![T::zero(); p];
        let mut linear = vec![T::zero(); p];
        let mut curvature = vec![T::zero(); p * p];
        let mut constant = T::zero();
        for j in 0..self.n_obs() {
            let psi = self.coeffs.affine(self.u[j], &mut phi)?;
            let (b0, w) = (self.b0[j], self.inv_s[j]);
            let c = b0 * psi;
            let resid = self.dy[j] - c * self.h;
            for a in 0..p {
                let va = b0 * phi[a];
                linear[a] = linear[a] + w * va * resid;
                for b in 0..p {
                    curvature[a * p + b] = curvature[a * p + b] + w * va * b0 * phi[b] * self.h;
                }
            }
            constant = constant + w * (c * self.dy[j] - T::lit(0.5) * c * c * self.h);
        }
        Some(QuadraticField { linear, curvature, constant })
    }
}

impl<T: Real> QuasiLikelihood<T> for RegressionField<T> {
    fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    fn value(&self, theta: &[T]) -> Result<T> {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for j in 0..self.n_obs() {
            let b = self.b0[j] * self.coeffs.b1(self.u[j], theta);
            acc = acc + self.inv_s[j] * (b * self.dy[j] - half * b * b * self.h);
        }
        Ok(acc)
    }

    fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim();
        let mut g = vec![T::zero(); p];
        let mut db = vec![T::zero(); p];
        for j in 0..self.n_obs() {
            let b0 = self.b0[j];
            let b = b0 * self.coeffs.b1(self.u[j], theta);
            self.coeffs.b1_grad(self.u[j], theta, &mut db);
            let w = self.inv_s[j] * b0 * (self.dy[j] - b * self.h);
            for k in 0..p {
                g[k] = g[k] + w * db[k];
            }
        }
        Ok(g)
    }

    fn hessian(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim();
        let mut out = vec![T::zero(); p * p];
        let mut db = vec![T::zero(); p];
        let mut d2b = vec![T::zero(); p * p];
        for j in 0..self.n_obs() {
            let b0 = self.b0[j];
            let b = b0 * self.coeffs.b1(self.u[j], theta);
            self.coeffs.b1_grad(self.u[j], theta, &mut db);
            self.coeffs.b1_hess(self.u[j], theta, &mut d2b);
            let w = self.inv_s[j];
            let lin = w * b0 * (self.dy[j] - b * self.h);
            let quad = w * b0 * b0 * self.h;
            for a in 0..p {
                for c in 0..p {
                    out[a * p + c] = out[a * p + c] + lin * d2b[a * p + c] - quad * db[a] * db[c];
                }
            }
        }
        Ok(out)
    }
}

/// `H_T(theta)` by direct summation.
pub fn h_continuous<T: Real>(paths: &RegressionPaths<T>, model: &ErgodicModelSpec<T>, theta: &[T]) -> Result<T> {
    if !model.theta_box.contains(theta) {
        return Err(Error::OutsideDomain(format!("theta {theta:?} outside the parameter box")));
    }
    RegressionField::new(paths, model)?.value(theta)
}
