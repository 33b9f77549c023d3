use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::{ou_fill, ErgodicModelSpec, SamplePath, SlowMixSampler, TimeGrid};
use crate::quadrature::GaussHermite;
use crate::rng::{derive_seed, rng_from_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsiConfig {
    pub r_star: f64,
    pub eps_star: f64,
    pub n_inner: usize,
    /// Riemann points per unit block for the inner integrals.
    pub block_steps: usize,
    /// Divide block values by `K = E_nu[H1^r*]` before comparing with
    /// `T^eps*`.
    pub normalize: bool,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig { r_star: 8.0, eps_star: 0.25, n_inner: 256, block_steps: 10, normalize: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsiResult {
    pub psi: bool,
    /// Largest (normalized) block value.
    pub max_block: f64,
    pub threshold: f64,
    /// Normalizing constant applied to block values (1 when disabled).
    pub scale: f64,
}

/// `E_nu[H1(L_0, U_0)^r*]` under the stationary law, by tensor Gauss-Hermite.
pub fn envelope_moment(model: &ErgodicModelSpec<f64>, r_star: f64) -> f64 {
    let gh = GaussHermite::new(100);
    let sd_l = model.slow.covariance(0.0).sqrt();
    let sd_u = model.ou.stationary_variance().sqrt();
    let c = &model.coeffs;
    gh.expect_normal(0.0, sd_l, |l| {
        gh.expect_normal(0.0, sd_u, |u| c.envelope(l, u, &model.theta_box, &model.theta_star).powf(r_star))
    })
}

/// Localization indicator: `max_j E_C[int_{j-1}^j H1(X_t)^r* dt] <= T^eps*`,
/// with the conditional expectation given the environment computed from
/// `n_inner` fresh factor paths. Deterministic in `(l_path, seed)`.
pub fn psi_truncation(l_path: &SamplePath<f64>, model: &ErgodicModelSpec<f64>, cfg: &PsiConfig, seed: u64) -> Result<PsiResult> {
    if cfg.r_star < 2.0 || cfg.eps_star <= 0.0 || cfg.n_inner == 0 || cfg.block_steps == 0 {
        return Err(Error::InvalidArgument("need r* >= 2, eps* > 0, n_inner >= 1, block_steps >= 1".into()));
    }
    let horizon = l_path.grid.horizon();
    let step = 1.0 / cfg.block_steps as f64;
    let factor = (step / l_path.grid.step()).round().max(1.0) as usize;
    if ((factor as f64) * l_path.grid.step() - step).abs() > 1e-9 * step {
        return Err(Error::InvalidGrid(format!(
            "environment step {} does not divide the block step {step}",
            l_path.grid.step()
        )));
    }
    let n_pts = l_path.grid.n_steps() / factor;
    let l: Vec<f64> = (0..n_pts).map(|k| l_path.x(k * factor)).collect();
    let n_blocks = horizon.ceil() as usize;
    let mut blocks = vec![0.0; n_blocks];
    let mut u = vec![0.0; n_pts];
    let c = &model.coeffs;
    for i in 0..cfg.n_inner {
        let mut rng = rng_from_seed(derive_seed(seed, stream::INNER, i as u64));
        ou_fill(&model.ou, step, None, &mut rng, &mut u);
        for k in 0..n_pts {
            let v = c.envelope(l[k], u[k], &model.theta_box, &model.theta_star).powf(cfg.r_star);
            let j = ((k as f64 * step).floor() as usize).min(n_blocks - 1);
            blocks[j] += v * step;
        }
    }
    let scale = if cfg.normalize { envelope_moment(model, cfg.r_star) } else { 1.0 };
    let max_block = blocks.iter().map(|b| b / cfg.n_inner as f64 / scale).fold(0.0, f64::max);
    let threshold = horizon.powf(cfg.eps_star);
    Ok(PsiResult { psi: max_block <= threshold, max_block, threshold, scale })
}

/// `Psi_T` over `n_env` independent environments, each sampled directly on
/// the block grid. Environment `i` uses seeds derived from `(seed, i)`.
pub fn psi_study(model: &ErgodicModelSpec<f64>, horizon: f64, n_env: usize, cfg: &PsiConfig, seed: u64) -> Result<Vec<PsiResult>> {
    if n_env == 0 {
        return Err(Error::InvalidArgument("need at least one environment".into()));
    }
    let n = (horizon * cfg.block_steps as f64).round() as usize;
    let sampler = SlowMixSampler::new(&model.slow, TimeGrid::new(horizon, n)?)?;
    (0..n_env)
        .into_par_iter()
        .map(|i| {
            let l = sampler.sample(derive_seed(seed, stream::SLOW, i as u64))?;
            psi_truncation(&l, model, cfg, derive_seed(seed, stream::INNER, i as u64))
        })
        .collect()
}

pub fn zero_fraction(results: &[PsiResult]) -> f64 {
    results.iter().filter(|r| !r.psi).count() as f64 / results.len().max(1) as f64
}

pub fn write_psi_csv<W: Write>(rows: &[PsiResult], mut w: W) -> Result<()> {
    writeln!(w, "rep,psi,max_block")?;
    for (i, r) in rows.iter().enumerate() {
        writeln!(w, "{i},{},{}", u8::from(r.psi), r.max_block)?;
    }
    Ok(())
}
