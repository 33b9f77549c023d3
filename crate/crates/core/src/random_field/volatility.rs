//! Gaussian quasi-likelihood of discretely observed volatility:
//!
//! `H_n(theta) = -1/2 sum { log S(X_{t_{j-1}}, theta) + h^{-1} S^{-1} (dY_j)^2 }`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::process_sim::{VolData, VolEnvModelSpec, VolatilityModel};
use crate::random_field::QuasiLikelihood;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct VolatilityField<T: Real> {
    sigma: Arc<dyn VolatilityModel<T>>,
    h: T,
    x: Vec<T>,
    dy: Vec<T>,
    /// `(sum log shape, sum dY^2 / shape)` for scale-separable models.
    reduced: Option<(T, T)>,
}

impl<T: Real> VolatilityField<T> {
    /// Uses the scale/shape reduction when the model provides one.
    pub fn new(data: &VolData<T>, model: &VolEnvModelSpec<T>) -> Result<Self> {
        let mut f = Self::direct(data, model)?;
        let mut log_shape = T::zero();
        let mut q = T::zero();
        let mut separable = true;
        for (j, (x, dy)) in f.x.iter().zip(&f.dy).enumerate() {
            match f.sigma.shape(*x) {
                Some(g) if g > T::zero() && g.is_finite() => {
                    log_shape = log_shape + g.ln();
                    q = q + *dy * *dy / g;
                }
                Some(_) => return Err(Error::SingularDiffusion { index: j + 1 }),
                None => {
                    separable = false;
                    break;
                }
            }
        }
        if separable {
            f.reduced = Some((log_shape, q));
        }
        Ok(f)
    }

    /// Always evaluates by summing over observations.
    pub fn direct(data: &VolData<T>, model: &VolEnvModelSpec<T>) -> Result<Self> {
        if data.x.grid != data.y.grid {
            return Err(Error::InvalidArgument("X and Y must share one grid".into()));
        }
        let n = data.y.grid.n_steps();
        Ok(VolatilityField {
            sigma: model.sigma.clone(),
            h: data.y.grid.step(),
            x: (0..n).map(|j| data.x.x(j)).collect(),
            dy: data.y.increments(),
            reduced: None,
        })
    }

    /// From raw observation arrays: `x` holds `X_{t_{j-1}}` per increment.
    pub fn from_increments(sigma: Arc<dyn VolatilityModel<T>>, h: T, x: Vec<T>, dy: Vec<T>) -> Result<Self> {
        if x.len() != dy.len() || dy.is_empty() {
            return Err(Error::InvalidArgument("need one state value per increment".into()));
        }
        Ok(VolatilityField { sigma, h, x, dy, reduced: None })
    }

    pub fn n_obs(&self) -> usize {
        self.dy.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced.is_some()
    }

    fn s_checked(&self, j: usize, theta: &[T]) -> Result<T> {
        let s = self.sigma.s(self.x[j], theta);
        if !(s > T::zero() && s.is_finite()) {
            return Err(Error::SingularDiffusion { index: j + 1 });
        }
        Ok(s)
    }

    /// Discretized `Gamma = (1/2n) sum tr((dS S^{-1})^2)` at `theta`.
    pub fn information(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.sigma.dim();
        let mut out = vec![T::zero(); p * p];
        let mut ds = vec![T::zero(); p];
        for j in 0..self.n_obs() {
            let s = self.s_checked(j, theta)?;
            self.sigma.s_grad(self.x[j], theta, &mut ds);
            for a in 0..p {
                for b in 0..p {
                    out[a * p + b] = out[a * p + b] + (ds[a] / s) * (ds[b] / s);
                }
            }
        }
        let norm = T::lit(2.0) * T::from_usize_lossy(self.n_obs());
        Ok(out.into_iter().map(|v| v / norm).collect())
    }

    fn scale(&self, theta: &[T]) -> Result<(T, Vec<T>, Vec<T>)> {
        let p = self.sigma.dim();
        let mut g = vec![T::zero(); p];
        let mut hs = vec![T::zero(); p * p];
        let k = self.sigma.scale(theta, &mut g, &mut hs);
        if !(k > T::zero() && k.is_finite()) {
            return Err(Error::SingularDiffusion { index: 0 });
        }
        Ok((k, g, hs))
    }
}

impl<T: Real> QuasiLikelihood<T> for VolatilityField<T> {
    fn dim(&self) -> usize {
        self.sigma.dim()
    }

    fn value(&self, theta: &[T]) -> Result<T> {
        let half = T::lit(0.5);
        if let Some((log_shape, q)) = self.reduced {
            let (k, _, _) = self.scale(theta)?;
            let n = T::from_usize_lossy(self.n_obs());
            return Ok(-half * (n * k.ln() + log_shape + q / (self.h * k)));
        }
        let mut acc = T::zero();
        for j in 0..self.n_obs() {
            let s = self.s_checked(j, theta)?;
            acc = acc + s.ln() + self.dy[j] / s * self.dy[j] / self.h;
        }
        Ok(-half * acc)
    }

    fn gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim();
        let half = T::lit(0.5);
        if let Some((_, q)) = self.reduced {
            let (k, g, _) = self.scale(theta)?;
            let n = T::from_usize_lossy(self.n_obs());
            return Ok(g.iter().map(|gk| -half * (n * *gk / k - q * *gk / (self.h * k * k))).collect());
        }
        let mut out = vec![T::zero(); p];
        let mut ds = vec![T::zero(); p];
        for j in 0..self.n_obs() {
            let s = self.s_checked(j, theta)?;
            self.sigma.s_grad(self.x[j], theta, &mut ds);
            // ratios first: S may be huge
            let rs = self.dy[j] / s * self.dy[j] / self.h;
            for k in 0..p {
                let d = ds[k] / s;
                out[k] = out[k] - half * (d - rs * d);
            }
        }
        Ok(out)
    }

    fn hessian(&self, theta: &[T]) -> Result<Vec<T>> {
        let p = self.dim();
        let half = T::lit(0.5);
        let two = T::lit(2.0);
        if let Some((_, q)) = self.reduced {
            let (k, g, hs) = self.scale(theta)?;
            let n = T::from_usize_lossy(self.n_obs());
            let r = q / self.h;
            let mut out = vec![T::zero(); p * p];
            for a in 0..p {
                for b in 0..p {
                    let gg = g[a] * g[b];
                    let hab = hs[a * p + b];
                    out[a * p + b] = -half * (n * (hab / k - gg / (k * k)) - r * (hab / (k * k) - two * gg / (k * k * k)));
                }
            }
            return Ok(out);
        }
        let mut out = vec![T::zero(); p * p];
        let mut ds = vec![T::zero(); p];
        let mut d2s = vec![T::zero(); p * p];
        for j in 0..self.n_obs() {
            let s = self.s_checked(j, theta)?;
            self.sigma.s_grad(self.x[j], theta, &mut ds);
            self.sigma.s_hess(self.x[j], theta, &mut d2s);
            let rs = self.dy[j] / s * self.dy[j] / self.h;
            for a in 0..p {
                for b in 0..p {
                    let dd = (ds[a] / s) * (ds[b] / s);
                    let hs = d2s[a * p + b] / s;
                    let term = hs - dd - rs * (hs - two * dd);
                    out[a * p + b] = out[a * p + b] - half * term;
                }
            }
        }
        Ok(out)
    }
}

/// `H_n(theta)` for observed `(gamma, X, Y)`.
pub fn h_volatility<T: Real>(data: &VolData<T>, model: &VolEnvModelSpec<T>, theta: &[T]) -> Result<T> {
    VolatilityField::direct(data, model)?.value(theta)
}
