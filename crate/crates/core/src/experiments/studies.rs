use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::experiments::mc::{moment_table, McReport, MomentRow, Studentization};
use crate::experiments::stats::{ks_critical, ks_standard_normal, median, quantile, KsResult, KS_SCALE_SENSITIVITY};
use crate::experiments::RegressionConfig;
use crate::process_sim::{RegressionSimulator, TimeGrid};
use crate::random_field::{laq_decompose, limit_information, QuasiLikelihood, Rate, RegressionField};
use crate::rng::{derive_seed, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub coordinate: usize,
    pub ks: KsResult,
    pub level: f64,
    pub critical: f64,
    /// Allowance for the Monte Carlo error of `Gamma`.
    pub tolerance: f64,
    pub pass: bool,
}

/// KS test of each coordinate of `Gamma^{1/2} u_hat` against N(0, 1).
pub fn normality_test(report: &McReport, kind: EstimatorKind, level: f64) -> Result<Vec<NormalityResult>> {
    let z = report.studentized(kind)?;
    if z.len() < 100 {
        return Err(Error::InvalidArgument(format!("normality test needs >= 100 replications, got {}", z.len())));
    }
    let p = report.summary.dim;
    let rel_se = match &report.summary.studentization {
        Studentization::LimitGamma { gamma, se } => (0..p).map(|k| se[k * p + k] / gamma[k * p + k]).fold(0.0, f64::max),
        Studentization::PerReplication => 0.0,
    };
    let tolerance = KS_SCALE_SENSITIVITY * 3.0 * rel_se / 2.0;
    (0..p)
        .map(|k| {
            let col: Vec<f64> = z.iter().map(|v| v[k]).collect();
            let ks = ks_standard_normal(&col)?;
            let critical = ks_critical(col.len(), level);
            let pass = ks.statistic <= critical + tolerance;
            Ok(NormalityResult { coordinate: k, ks, level, critical, tolerance, pass })
        })
        .collect()
}

/// Empirical moments of `u_hat` against the Gaussian limit.
pub fn moment_convergence(report: &McReport, kind: EstimatorKind, p_list: &[u32]) -> Result<Vec<MomentRow>> {
    let rows: Vec<_> = report.rows_for(kind).filter(|r| !r.failed).collect();
    moment_table(&rows, report.summary.dim, &report.summary.studentization, p_list)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaqStudyConfig {
    #[serde(default)]
    pub model: RegressionConfig,
    pub horizons: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Grid nodes per axis on `[-radius, radius]`.
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "default_gamma_mc")]
    pub gamma_mc: usize,
}

fn default_radius() -> f64 {
    3.0
}
fn default_points() -> usize {
    61
}
fn default_gamma_mc() -> usize {
    1_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaqStudyRow {
    pub horizon: f64,
    pub median: f64,
    pub q25: f64,
    pub q75: f64,
}

/// Per-horizon median over replications of `sup_{|u| <= radius} |r_T(u)|`.
pub fn laq_shrink_study(cfg: &LaqStudyConfig) -> Result<Vec<LaqStudyRow>> {
    if cfg.horizons.len() < 3 {
        return Err(Error::InvalidArgument("the shrinkage study needs at least 3 horizons".into()));
    }
    if cfg.reps == 0 {
        return Err(Error::InvalidArgument("reps must be >= 1".into()));
    }
    let model = cfg.model.build()?;
    let p = model.dim();
    let gamma = match &cfg.gamma {
        Some(g) => g.clone(),
        None => limit_information(&model, cfg.gamma_mc, derive_seed(cfg.seed, stream::INNER, u64::MAX))?.gamma,
    };
    cfg.horizons
        .iter()
        .enumerate()
        .map(|(hk, &horizon)| {
            let n = (horizon / cfg.model.obs_step).round() as usize;
            let sim = RegressionSimulator::new(&model, TimeGrid::new(horizon, n)?)?;
            let rate = Rate::root(p, horizon)?;
            let sups = (0..cfg.reps)
                .into_par_iter()
                .map(|i| -> Result<f64> {
                    let seed = derive_seed(derive_seed(cfg.seed, stream::REPLICATION, hk as u64), stream::REPLICATION, i as u64);
                    let paths = sim.simulate(seed)?;
                    let field = RegressionField::new(&paths, &model)?;
                    let sup = |f: &dyn QuasiLikelihood<f64>| -> Result<f64> {
                        let laq = laq_decompose(f, &model.theta_star, &rate, &gamma)?;
                        laq.sup_remainder(f, &model.theta_box, cfg.radius, cfg.points)
                    };
                    match field.quadratic() {
                        Some(q) => sup(&q),
                        None => sup(&field),
                    }
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(LaqStudyRow { horizon, median: median(&sups), q25: quantile(&sups, 0.25), q75: quantile(&sups, 0.75) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct A5Row {
    pub horizon: f64,
    pub n: usize,
    pub q50: f64,
    pub q90: f64,
    pub q95: f64,
}

/// Quantiles of `1 / int_{U_T} Z_T(u) du` per horizon from QBE rows.
pub fn a5_mass_diagnostic(reports: &[McReport]) -> Result<Vec<A5Row>> {
    reports
        .iter()
        .map(|r| {
            let inv: Vec<f64> = r
                .rows_for(EstimatorKind::B)
                .filter(|row| !row.failed)
                .filter_map(|row| row.mass_log_z)
                .map(|m| (-m).exp())
                .collect();
            if inv.is_empty() {
                return Err(Error::InvalidArgument(format!("no QBE mass recorded at horizon {}", r.summary.horizon)));
            }
            Ok(A5Row {
                horizon: r.summary.horizon,
                n: inv.len(),
                q50: quantile(&inv, 0.5),
                q90: quantile(&inv, 0.9),
                q95: quantile(&inv, 0.95),
            })
        })
        .collect()
}
