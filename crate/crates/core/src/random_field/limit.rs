//! Limit field `Y(theta)` and limit information `Gamma` of the ergodic
//! regression model, by Monte Carlo over the stationary law of `(L_0, U_0)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::ErgodicModelSpec;
use crate::random_field::TensorGrid;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct LimitField<T: Real> {
    pub grid: TensorGrid<T>,
    pub y: Vec<T>,
    pub y_se: Vec<T>,
    pub gamma: Vec<T>,
    pub gamma_se: Vec<T>,
    /// `inf -Y(theta) / |theta - theta*|^2` over grid points away from `theta*`.
    pub chi0: T,
    pub n_mc: usize,
}

/// `Gamma` with its entrywise Monte Carlo standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitInformation<T> {
    pub gamma: Vec<T>,
    pub se: Vec<T>,
    pub n_mc: usize,
}

struct Draw<T> {
    w: T,
    u: T,
}

fn stationary_draws<T: Real>(model: &ErgodicModelSpec<T>, n_mc: usize, seed: u64) -> Vec<Draw<T>> {
    let mut rng = rng_from_seed(derive_seed(seed, stream::INNER, 0));
    let sd_l = model.slow.covariance(T::zero()).sqrt();
    let sd_u = model.ou.stationary_variance().sqrt();
    let c = &model.coeffs;
    (0..n_mc)
        .map(|_| {
            let l = sd_l * T::std_normal(&mut rng);
            let u = sd_u * T::std_normal(&mut rng);
            let sig = c.sigma0(l) * c.sigma1(u);
            let b0 = c.b0(l);
            Draw { w: b0 * b0 / (sig * sig), u }
        })
        .collect()
}

fn mean_se<T: Real>(sum: T, sum_sq: T, n: usize) -> (T, T) {
    let nn = T::from_usize_lossy(n);
    let m = sum / nn;
    let var = ((sum_sq / nn - m * m) * nn / (nn - T::one())).max(T::zero());
    (m, (var / nn).sqrt())
}

/// `Gamma = E[S^{-1} b0^2 db1 db1']` under the stationary law.
pub fn limit_information<T: Real>(model: &ErgodicModelSpec<T>, n_mc: usize, seed: u64) -> Result<LimitInformation<T>> {
    if n_mc < 10_000 {
        return Err(Error::InvalidArgument(format!("n_mc = {n_mc} < 10^4")));
    }
    let p = model.dim();
    let ts = &model.theta_star;
    let mut s = vec![T::zero(); p * p];
    let mut s2 = vec![T::zero(); p * p];
    let mut db = vec![T::zero(); p];
    for d in stationary_draws(model, n_mc, seed) {
        model.coeffs.b1_grad(d.u, ts, &mut db);
        for a in 0..p {
            for b in 0..p {
                let v = d.w * db[a] * db[b];
                s[a * p + b] = s[a * p + b] + v;
                s2[a * p + b] = s2[a * p + b] + v * v;
            }
        }
    }
    let (gamma, se) = s.iter().zip(&s2).map(|(a, b)| mean_se(*a, *b, n_mc)).unzip();
    Ok(LimitInformation { gamma, se, n_mc })
}

pub fn limit_field<T: Real>(model: &ErgodicModelSpec<T>, grid: &TensorGrid<T>, n_mc: usize, seed: u64) -> Result<LimitField<T>> {
    let info = limit_information(model, n_mc, seed)?;
    let ts = &model.theta_star;
    let points: Vec<Vec<T>> = grid.points().collect();
    let mut s = vec![T::zero(); points.len()];
    let mut s2 = vec![T::zero(); points.len()];
    let half = T::lit(0.5);
    for d in stationary_draws(model, n_mc, seed) {
        let b_star = model.coeffs.b1(d.u, ts);
        for (i, th) in points.iter().enumerate() {
            let diff = model.coeffs.b1(d.u, th) - b_star;
            let v = -half * d.w * diff * diff;
            s[i] = s[i] + v;
            s2[i] = s2[i] + v * v;
        }
    }
    let (y, y_se): (Vec<T>, Vec<T>) = s.iter().zip(&s2).map(|(a, b)| mean_se(*a, *b, n_mc)).unzip();
    let mut chi0 = T::infinity();
    let tiny = grid.resolution() * T::lit(1e-6);
    for (i, th) in points.iter().enumerate() {
        let dist2: T = th.iter().zip(ts).map(|(a, b)| (*a - *b) * (*a - *b)).sum();
        if dist2.sqrt() > tiny {
            chi0 = chi0.min(-y[i] / dist2);
        }
    }
    Ok(LimitField { grid: grid.clone(), y, y_se, gamma: info.gamma, gamma_se: info.se, chi0, n_mc })
}
