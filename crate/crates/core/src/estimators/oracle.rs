//! Closed-form maximizers for the reference models.

use crate::error::{Error, Result};
use crate::linalg;
use crate::process_sim::{ErgodicModelSpec, RegressionPaths, VolData, VolEnvModelSpec};
use crate::scalar::Real;

/// `B^{-1} A` projected to the box, where `H = theta'A - theta'B theta/2 + c`
/// for drifts affine in `theta`.
pub fn qmle_linear_oracle<T: Real>(paths: &RegressionPaths<T>, model: &ErgodicModelSpec<T>) -> Result<Vec<T>> {
    paths.check_aligned()?;
    let p = model.dim();
    let c = &model.coeffs;
    let h = paths.grid().step();
    let n = paths.grid().n_steps();
    let mut a = vec![T::zero(); p];
    let mut b = vec![T::zero(); p * p];
    let mut phi = vec![T::zero(); p];
    for j in 0..n {
        let (l, u) = (paths.l.x(j), paths.u.x(j));
        let psi = c
            .affine(u, &mut phi)
            .ok_or_else(|| Error::InvalidModel(format!("{} is not affine in theta", c.name())))?;
        let sig = c.sigma0(l) * c.sigma1(u);
        let s = sig * sig;
        if !(s > T::zero()) {
            return Err(Error::SingularDiffusion { index: j });
        }
        let b0 = c.b0(l);
        let dy = paths.y.x(j + 1) - paths.y.x(j);
        for r in 0..p {
            a[r] = a[r] + b0 * phi[r] * (dy - b0 * psi * h) / s;
            for q in 0..p {
                b[r * p + q] = b[r * p + q] + b0 * b0 * phi[r] * phi[q] * h / s;
            }
        }
    }
    let scale = linalg::trace(p, &b).abs();
    if !(scale > T::zero()) || linalg::min_eigenvalue(p, &b) <= scale * T::lit(1e-12) {
        return Err(Error::SingularInformation("quadratic coefficient B is singular".into()));
    }
    let inv = linalg::sym_inverse(p, &b).ok_or_else(|| Error::SingularInformation("B not invertible".into()))?;
    let theta = linalg::mat_vec(p, &inv, &a);
    Ok(model.theta_box.clamp(&theta).0)
}

/// Maximizer of the volatility quasi-likelihood for scalar models with
/// `S(x, theta) = theta^2 g(x)`: `theta^2 = (1/T) sum dY^2 / g(X_{j-1})`.
///
/// Returns the estimate and whether it was moved to the box boundary.
pub fn qmle_vol_oracle<T: Real>(data: &VolData<T>, model: &VolEnvModelSpec<T>) -> Result<(Vec<T>, bool)> {
    let sigma = &model.sigma;
    if sigma.dim() != 1 {
        return Err(Error::InvalidModel("volatility oracle needs a scalar parameter".into()));
    }
    let (mut g, mut hs) = ([T::zero()], [T::zero()]);
    let probe = T::lit(1.7);
    if (sigma.scale(&[probe], &mut g, &mut hs) - probe * probe).abs() > T::lit(1e-12) {
        return Err(Error::InvalidModel(format!("{} does not have scale theta^2", sigma.name())));
    }
    let lower = model.theta_box.lower[0];
    if !(lower > T::zero()) {
        return Err(Error::InvalidModel("volatility oracle needs a positive lower bound".into()));
    }
    let grid = data.y.grid;
    let dy = data.y.increments();
    let mut q = T::zero();
    for (j, d) in dy.iter().enumerate() {
        let shape = sigma
            .shape(data.x.x(j))
            .ok_or_else(|| Error::InvalidModel(format!("{} has no scale/shape split", sigma.name())))?;
        q = q + *d * *d / shape;
    }
    if q == T::zero() {
        return Ok((vec![lower], true));
    }
    let theta = (q / grid.horizon()).sqrt();
    let (c, moved) = model.theta_box.clamp(&[theta]);
    Ok((c, moved))
}
