use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::{ErgodicModelSpec, RegressionSimulator, TimeGrid};
use crate::random_field::{FieldEval, QuasiLikelihood, Rate, RegressionField};
use crate::rng::{derive_seed, stream};
use crate::theory_checks::{psi_truncation, PsiConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PldConfig {
    pub horizon: f64,
    pub obs_step: f64,
    pub r_list: Vec<f64>,
    /// `rho1 v rho2`; the threshold is `exp(-r^{2-exponent}/2)`.
    pub exponent: f64,
    pub reps: usize,
    pub seed: u64,
    /// Grid spacing in `u` units.
    pub u_step: f64,
    /// Restrict to replications with `Psi_T = 1`.
    pub psi: Option<PsiConfig>,
}

impl Default for PldConfig {
    fn default() -> Self {
        PldConfig {
            horizon: 100.0,
            obs_step: 0.01,
            r_list: (2..=8).map(f64::from).collect(),
            exponent: 0.3,
            reps: 2000,
            seed: 7,
            u_step: 0.05,
            psi: Some(PsiConfig::default()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PldRow {
    pub r: f64,
    pub threshold: f64,
    pub prob: f64,
    pub se: f64,
    pub n_eff: usize,
    /// No grid point of `U_T` has `|u| >= r`.
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PldReport {
    pub rows: Vec<PldRow>,
    pub reps: usize,
    pub psi_pass_fraction: f64,
    pub u_step: f64,
}

impl PldReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# reps={} psi_pass_fraction={} u_step={}", self.reps, self.psi_pass_fraction, self.u_step)?;
        writeln!(w, "r,threshold,prob,se,n_eff")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{},{}", r.r, r.threshold, r.prob, r.se, r.n_eff)?;
        }
        Ok(())
    }

    /// Least-squares slope of `log prob` on `log r` over rows with
    /// `prob > 0` and `r > 0`.
    pub fn loglog_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self.rows.iter().filter(|r| r.prob > 0.0 && r.r > 0.0).map(|r| (r.r.ln(), r.prob.ln())).collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }
}

/// PLD threshold `exp(-r^{2-exponent}/2)` in log form.
pub fn pld_log_threshold(r: f64, exponent: f64) -> f64 {
    -0.5 * r.powf(2.0 - exponent)
}

/// `sup_{|u| >= r} log Z_T(u)` over the grid; `u = 0` counts when `r <= 0`.
fn sup_beyond(eval: &FieldEval<f64>, r: f64) -> Option<f64> {
    let s = eval.sup_log_z_beyond(r);
    if r <= 0.0 {
        Some(s.map_or(0.0, |v| v.max(0.0)))
    } else {
        s
    }
}

struct RepOutcome {
    psi: bool,
    /// `Some(hit)` per r, `None` if the set was empty.
    hits: Vec<Option<bool>>,
}

/// Empirical `P[sup_{V_T(r)} Z_T >= exp(-r^{2-exponent}/2)]` for the
/// regression model, over replications with `Psi_T = 1`.
pub fn pld_tail_mc(model: &ErgodicModelSpec<f64>, cfg: &PldConfig) -> Result<PldReport> {
    if cfg.reps == 0 || cfg.u_step <= 0.0 || cfg.u_step > 0.05 {
        return Err(Error::InvalidArgument("need reps >= 1 and 0 < u_step <= 0.05 (20 points per unit u)".into()));
    }
    let n = (cfg.horizon / cfg.obs_step).round() as usize;
    let grid = TimeGrid::new(cfg.horizon, n)?;
    let sim = RegressionSimulator::new(model, grid)?;
    let rate = Rate::root(model.dim(), cfg.horizon)?;
    let outcomes = (0..cfg.reps)
        .into_par_iter()
        .map(|i| -> Result<RepOutcome> {
            let seed = derive_seed(cfg.seed, stream::REPLICATION, i as u64);
            let paths = sim.simulate(seed)?;
            let psi = match &cfg.psi {
                Some(pc) => psi_truncation(&paths.l, model, pc, derive_seed(seed, stream::INNER, 0))?.psi,
                None => true,
            };
            let field = RegressionField::new(&paths, model)?;
            let eval = match field.quadratic() {
                Some(q) => FieldEval::over_box_u(&q, &model.theta_box, &model.theta_star, rate.clone(), cfg.u_step)?,
                None => FieldEval::over_box_u(&field as &dyn QuasiLikelihood<f64>, &model.theta_box, &model.theta_star, rate.clone(), cfg.u_step)?,
            };
            let hits = cfg
                .r_list
                .iter()
                .map(|r| sup_beyond(&eval, *r).map(|s| s >= pld_log_threshold(*r, cfg.exponent)))
                .collect();
            Ok(RepOutcome { psi, hits })
        })
        .collect::<Result<Vec<_>>>()?;
    let kept: Vec<&RepOutcome> = outcomes.iter().filter(|o| o.psi).collect();
    let n_eff = kept.len();
    let rows = cfg
        .r_list
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let empty = kept.iter().all(|o| o.hits[k].is_none());
            let count = kept.iter().filter(|o| o.hits[k] == Some(true)).count();
            let prob = if n_eff == 0 { 0.0 } else { count as f64 / n_eff as f64 };
            let se = if n_eff == 0 { 0.0 } else { (prob * (1.0 - prob) / n_eff as f64).sqrt() };
            PldRow { r: *r, threshold: pld_log_threshold(*r, cfg.exponent).exp(), prob, se, n_eff, empty }
        })
        .collect();
    Ok(PldReport { rows, reps: cfg.reps, psi_pass_fraction: n_eff as f64 / cfg.reps as f64, u_step: cfg.u_step })
}
