use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::{ou_fill, MixingSource, OUSpec};
use crate::quadrature::GaussHermite;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scalar::Real;
use crate::theory_checks::MixingProfile;

/// `n^{p/2} (1 + sum alpha(h)^{1-2/r})^{p/2} + n sum (h+1)^{p-2} alpha(h)^{1-p/r}`,
/// sums over `h = 1..n-1`.
pub fn rosenthal_rhs<T: Real>(p: T, r: T, n: usize, profile: &MixingProfile<T>) -> Result<T> {
    if !(p >= T::lit(2.0)) || !(p < r) {
        return Err(Error::InvalidArgument(format!("need 2 <= p < r, got p = {p}, r = {r}")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need n >= 2".into()));
    }
    if profile.max_lag() < n - 1 {
        return Err(Error::InvalidArgument(format!("profile covers {} lags, need {}", profile.max_lag(), n - 1)));
    }
    let one = T::one();
    let two = T::lit(2.0);
    let nf = T::from_usize_lossy(n);
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    for h in 1..n {
        let a = profile.alpha(h);
        s1 = s1 + a.powf(one - two / r);
        s2 = s2 + (T::from_usize_lossy(h) + one).powf(p - two) * a.powf(one - p / r);
    }
    Ok(nf.powf(p / two) * (one + s1).powf(p / two) + nf * s2)
}

/// Bounded functional applied to the factor over each unit block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockFunctional {
    /// Block average of `tanh(U_t)`.
    Tanh,
    /// Block average of `sign(U_t)`.
    Sign,
    /// `X_j = 0`.
    Zero,
}

impl std::str::FromStr for BlockFunctional {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(BlockFunctional::Tanh),
            "sign" => Ok(BlockFunctional::Sign),
            "zero" => Ok(BlockFunctional::Zero),
            _ => Err(Error::InvalidArgument(format!("unknown block functional {s:?}; use tanh, sign or zero"))),
        }
    }
}

impl BlockFunctional {
    fn apply(self, u: f64) -> f64 {
        match self {
            BlockFunctional::Tanh => u.tanh(),
            BlockFunctional::Sign => u.signum(),
            BlockFunctional::Zero => 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosenthalConfig {
    pub ou: OUSpec<f64>,
    pub functional: BlockFunctional,
    /// Riemann points per unit block.
    pub substeps: usize,
    pub p: f64,
    pub r: f64,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
}

impl Default for RosenthalConfig {
    fn default() -> Self {
        RosenthalConfig {
            ou: OUSpec { kappa: 1.0, s: std::f64::consts::SQRT_2 },
            functional: BlockFunctional::Tanh,
            substeps: 8,
            p: 2.0,
            r: 4.0,
            n_list: vec![64, 256, 1024, 4096],
            reps: 2000,
            seed: 20_240_901,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RosenthalRow {
    pub n: usize,
    /// `E max_k |S_k|^p`.
    pub lhs: f64,
    pub lhs_se: f64,
    /// `E |S_n|^p`.
    pub lhs_terminal: f64,
    /// `max_j E|X_j|^r` to the power `p/r`, pooled over blocks by stationarity.
    pub moment: f64,
    pub bracket: f64,
    pub ratio: f64,
    pub ratio_se: f64,
}

pub fn write_rosenthal_csv<W: Write>(rows: &[RosenthalRow], mut w: W) -> Result<()> {
    writeln!(w, "n,lhs,bracket,ratio")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.n, r.lhs, r.bracket, r.ratio)?;
    }
    Ok(())
}

struct RepOut {
    max_p: f64,
    end_p: f64,
    abs_r: f64,
}

fn one_rep(cfg: &RosenthalConfig, n: usize, mean_f: f64, seed: u64) -> RepOut {
    let mut rng = rng_from_seed(seed);
    let m = cfg.substeps.max(1);
    let mut path = vec![0.0; n * m + 1];
    ou_fill(&cfg.ou, 1.0 / m as f64, None, &mut rng, &mut path);
    let (mut s, mut max_p, mut abs_r) = (0.0_f64, 0.0_f64, 0.0_f64);
    for j in 0..n {
        let block = &path[j * m..(j + 1) * m];
        let x = block.iter().map(|u| cfg.functional.apply(*u)).sum::<f64>() / m as f64 - mean_f;
        s += x;
        max_p = max_p.max(s.abs().powf(cfg.p));
        abs_r += x.abs().powf(cfg.r);
    }
    RepOut { max_p, end_p: s.abs().powf(cfg.p), abs_r: abs_r / n as f64 }
}

/// Monte Carlo of the maximal-sum side against the mixing bracket for block
/// functionals of a stationary OU factor. Deterministic in `cfg.seed`.
pub fn rosenthal_mc_check(cfg: &RosenthalConfig) -> Result<Vec<RosenthalRow>> {
    cfg.ou.validate()?;
    if cfg.reps < 2 {
        return Err(Error::InvalidArgument("need at least 2 replications".into()));
    }
    let sd = cfg.ou.stationary_variance().sqrt();
    let mean_f = GaussHermite::new(100).expect_normal(0.0, sd, |u| cfg.functional.apply(u));
    let max_n = cfg.n_list.iter().copied().max().unwrap_or(2);
    let profile = MixingProfile::from_source(&MixingSource::Ou(cfg.ou), max_n.max(2))?;
    let mut rows = Vec::new();
    for (k, &n) in cfg.n_list.iter().enumerate() {
        let outs: Vec<RepOut> = (0..cfg.reps)
            .into_par_iter()
            .map(|i| one_rep(cfg, n, mean_f, derive_seed(derive_seed(cfg.seed, stream::REPLICATION, k as u64), stream::REPLICATION, i as u64)))
            .collect();
        let m = cfg.reps as f64;
        let lhs = outs.iter().map(|o| o.max_p).sum::<f64>() / m;
        let var = outs.iter().map(|o| (o.max_p - lhs).powi(2)).sum::<f64>() / (m - 1.0);
        let lhs_se = (var / m).sqrt();
        let lhs_terminal = outs.iter().map(|o| o.end_p).sum::<f64>() / m;
        let moment = (outs.iter().map(|o| o.abs_r).sum::<f64>() / m).powf(cfg.p / cfg.r);
        let bracket = rosenthal_rhs(cfg.p, cfg.r, n, &profile)?;
        let (ratio, ratio_se) = if lhs == 0.0 { (0.0, 0.0) } else { (lhs / (moment * bracket), lhs_se / (moment * bracket)) };
        rows.push(RosenthalRow { n, lhs, lhs_se, lhs_terminal, moment, bracket, ratio, ratio_se });
    }
    Ok(rows)
}
