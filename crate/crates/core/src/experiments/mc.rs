use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{qbe, qmle, standardize, EstimateRecord, EstimatorKind, Prior, QbeOptions, QmleOptions};
use crate::experiments::stats::{ks_standard_normal, mean_var, quantile, KsResult};
use crate::experiments::{Conditioning, ExperimentConfig, ModelConfig};
use crate::linalg;
use crate::process_sim::{RegressionSimulator, TimeGrid, VolSimulator};
use crate::random_field::{limit_information, QuasiLikelihood, Rate, RegressionField, ThetaBox, VolatilityField};
use crate::rng::{derive_seed, fingerprint_f64, stream};
use crate::theory_checks::psi_truncation;

/// One estimate from one replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub rep: usize,
    pub estimator: EstimatorKind,
    pub theta_hat: Vec<f64>,
    pub u_hat: Vec<f64>,
    pub psi: Option<bool>,
    pub boundary: bool,
    pub mass_log_z: Option<f64>,
    pub env_hash: u64,
    pub failed: bool,
    /// Row-major `Gamma_T`.
    pub gamma_t: Vec<f64>,
}

/// How `u_hat` is put on the standard normal scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Studentization {
    /// Deterministic limit information with its entrywise Monte Carlo error.
    LimitGamma { gamma: Vec<f64>, se: Vec<f64> },
    /// Per-replication `Gamma_T` from the rows.
    PerReplication,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub p: u32,
    pub empirical: f64,
    pub se: f64,
    pub target: f64,
    pub target_se: f64,
    /// `(empirical - target) / sqrt(se^2 + target_se^2)`; absent when both
    /// errors vanish.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassQuantiles {
    pub q50: f64,
    pub q90: f64,
    pub q95: f64,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub kind: EstimatorKind,
    pub n_ok: usize,
    pub n_failed: usize,
    pub mean_u: Vec<f64>,
    /// Row-major sample covariance of `u_hat`.
    pub cov_u: Vec<f64>,
    pub boundary_rate: f64,
    pub psi_pass_rate: Option<f64>,
    /// KS of each coordinate of the studentized `u_hat` against N(0, 1).
    pub ks: Vec<Option<KsResult>>,
    pub moments: Vec<MomentRow>,
    /// Quantiles of `1 / int_{U_T} Z_T(u) du` (QBE rows).
    pub inverse_mass: Option<MassQuantiles>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub model: String,
    pub horizon: f64,
    pub dim: usize,
    pub reps: usize,
    pub seed: u64,
    pub conditioning: Conditioning,
    pub studentization: Studentization,
    pub failure_rate: f64,
    pub estimators: Vec<EstimatorSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McReport {
    pub rows: Vec<McRow>,
    pub summary: McSummary,
}

pub const DEFAULT_MOMENTS: [u32; 3] = [1, 2, 4];

impl McReport {
    pub fn rows_for(&self, kind: EstimatorKind) -> impl Iterator<Item = &McRow> {
        self.rows.iter().filter(move |r| r.estimator == kind)
    }

    pub fn estimator(&self, kind: EstimatorKind) -> Option<&EstimatorSummary> {
        self.summary.estimators.iter().find(|e| e.kind == kind)
    }

    /// Studentized `Gamma^{1/2} u_hat` for the successful rows of `kind`.
    pub fn studentized(&self, kind: EstimatorKind) -> Result<Vec<Vec<f64>>> {
        studentize_rows(self.rows_for(kind).filter(|r| !r.failed), self.summary.dim, &self.summary.studentization)
    }
}

fn studentize_rows<'a>(rows: impl Iterator<Item = &'a McRow>, p: usize, st: &Studentization) -> Result<Vec<Vec<f64>>> {
    let fixed = match st {
        Studentization::LimitGamma { gamma, .. } => Some(linalg::sym_sqrt(p, gamma)),
        Studentization::PerReplication => None,
    };
    rows.map(|r| {
        let root = match &fixed {
            Some(m) => m.clone(),
            None => {
                if r.gamma_t.len() != p * p {
                    return Err(Error::Format(format!("row {} lacks Gamma_T", r.rep)));
                }
                linalg::sym_sqrt(p, &r.gamma_t)
            }
        };
        Ok(linalg::mat_vec(p, &root, &r.u_hat))
    })
    .collect()
}

fn double_factorial(k: u32) -> f64 {
    (1..=k).rev().step_by(2).map(f64::from).product()
}

/// Gaussian moment target for `u ~ N(0, Sigma)`.
fn gaussian_target(p: u32, dim: usize, sigma: &[f64]) -> Result<f64> {
    if dim == 1 {
        return Ok(if p % 2 == 1 { 0.0 } else { double_factorial(p - 1) * sigma[0].powf(f64::from(p) / 2.0) });
    }
    let tr = linalg::trace(dim, sigma);
    match p {
        2 => Ok(tr),
        4 => {
            let mut tr2 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    tr2 += sigma[i * dim + j] * sigma[j * dim + i];
                }
            }
            Ok(tr * tr + 2.0 * tr2)
        }
        _ => Err(Error::InvalidArgument(format!("moment order {p} only supported for scalar parameters"))),
    }
}

fn moment_statistic(p: u32, u: &[f64]) -> f64 {
    if u.len() == 1 {
        u[0].powi(p as i32)
    } else {
        linalg::norm(u).powi(p as i32)
    }
}

fn inverse_of(p: usize, g: &[f64]) -> Result<Vec<f64>> {
    linalg::sym_inverse(p, g).ok_or_else(|| Error::SingularInformation("Gamma is singular".into()))
}

/// Empirical `E[u^p]` (scalar) or `E|u|^p` (vector) against the moments of
/// `N(0, Gamma^{-1})`, the target averaged over rows for per-replication
/// studentization.
pub fn moment_table<'a>(rows: &[&'a McRow], dim: usize, st: &Studentization, p_list: &[u32]) -> Result<Vec<MomentRow>> {
    if rows.len() < 2 {
        return Err(Error::DegenerateSample("need at least 2 successful rows".into()));
    }
    let m = rows.len() as f64;
    p_list
        .iter()
        .map(|&p| {
            let vals: Vec<f64> = rows.iter().map(|r| moment_statistic(p, &r.u_hat)).collect();
            let (empirical, var) = mean_var(&vals);
            let se = (var / m).sqrt();
            let (target, target_se) = match st {
                Studentization::LimitGamma { gamma, se: gse } => {
                    let t = gaussian_target(p, dim, &inverse_of(dim, gamma)?)?;
                    // delta method over the entries of Gamma
                    let mut acc = 0.0;
                    for k in 0..gamma.len() {
                        if gse[k] == 0.0 {
                            continue;
                        }
                        let h = 1e-6 * gamma[k].abs().max(1e-12);
                        let mut g2 = gamma.clone();
                        g2[k] += h;
                        let d = (gaussian_target(p, dim, &inverse_of(dim, &g2)?)? - t) / h;
                        acc += (d * gse[k]).powi(2);
                    }
                    (t, acc.sqrt())
                }
                Studentization::PerReplication => {
                    let mut s = 0.0;
                    for r in rows {
                        s += gaussian_target(p, dim, &inverse_of(dim, &r.gamma_t)?)?;
                    }
                    (s / m, 0.0)
                }
            };
            let denom = (se * se + target_se * target_se).sqrt();
            let z = if denom > 0.0 { Some((empirical - target) / denom) } else { None };
            Ok(MomentRow { p, empirical, se, target, target_se, z })
        })
        .collect()
}

/// Recomputes every summary statistic from rows.
pub fn summarize(rows: &[McRow], header: &McSummary) -> Result<McSummary> {
    let dim = header.dim;
    let mut kinds: Vec<EstimatorKind> = Vec::new();
    for r in rows {
        if !kinds.contains(&r.estimator) {
            kinds.push(r.estimator);
        }
    }
    let mut estimators = Vec::new();
    let mut failed_reps = std::collections::BTreeSet::new();
    for r in rows.iter().filter(|r| r.failed) {
        failed_reps.insert(r.rep);
    }
    for kind in kinds {
        let all: Vec<&McRow> = rows.iter().filter(|r| r.estimator == kind).collect();
        let ok: Vec<&McRow> = all.iter().copied().filter(|r| !r.failed).collect();
        let n = ok.len();
        let nf = n as f64;
        let mut mean_u = vec![0.0; dim];
        for r in &ok {
            for k in 0..dim {
                mean_u[k] += r.u_hat[k] / nf;
            }
        }
        let mut cov_u = vec![0.0; dim * dim];
        if n > 1 {
            for r in &ok {
                for a in 0..dim {
                    for b in 0..dim {
                        cov_u[a * dim + b] += (r.u_hat[a] - mean_u[a]) * (r.u_hat[b] - mean_u[b]) / (nf - 1.0);
                    }
                }
            }
        }
        let boundary_rate = if n == 0 { 0.0 } else { ok.iter().filter(|r| r.boundary).count() as f64 / nf };
        let with_psi: Vec<bool> = ok.iter().filter_map(|r| r.psi).collect();
        let psi_pass_rate = if with_psi.is_empty() { None } else { Some(with_psi.iter().filter(|b| **b).count() as f64 / with_psi.len() as f64) };
        let z = studentize_rows(ok.iter().copied(), dim, &header.studentization)?;
        let ks = (0..dim)
            .map(|k| {
                let col: Vec<f64> = z.iter().map(|v| v[k]).collect();
                ks_standard_normal(&col).ok()
            })
            .collect();
        let moment_orders: Vec<u32> = if dim == 1 { DEFAULT_MOMENTS.to_vec() } else { vec![2, 4] };
        let moments = if n >= 2 { moment_table(&ok, dim, &header.studentization, &moment_orders)? } else { Vec::new() };
        let inv: Vec<f64> = ok.iter().filter_map(|r| r.mass_log_z).map(|m| (-m).exp()).collect();
        let inverse_mass = if inv.is_empty() {
            None
        } else {
            Some(MassQuantiles {
                q50: quantile(&inv, 0.5),
                q90: quantile(&inv, 0.9),
                q95: quantile(&inv, 0.95),
                max: inv.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            })
        };
        estimators.push(EstimatorSummary {
            kind,
            n_ok: n,
            n_failed: all.len() - n,
            mean_u,
            cov_u,
            boundary_rate,
            psi_pass_rate,
            ks,
            moments,
            inverse_mass,
        });
    }
    Ok(McSummary {
        failure_rate: failed_reps.len() as f64 / header.reps.max(1) as f64,
        estimators,
        ..header.clone()
    })
}

fn is_replication_failure(e: &Error) -> bool {
    matches!(e, Error::Explosion { .. } | Error::NonFinite { .. })
}

fn failed_rows(rep: usize, kinds: &[EstimatorKind], p: usize, env_hash: u64) -> Vec<McRow> {
    kinds
        .iter()
        .map(|k| McRow {
            rep,
            estimator: *k,
            theta_hat: vec![f64::NAN; p],
            u_hat: vec![f64::NAN; p],
            psi: None,
            boundary: false,
            mass_log_z: None,
            env_hash,
            failed: true,
            gamma_t: vec![f64::NAN; p * p],
        })
        .collect()
}

/// Runs each estimator on `field` and standardizes at `theta_star`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn estimate_records<F: QuasiLikelihood<f64> + ?Sized>(
    kinds: &[EstimatorKind],
    qmle_opts: &QmleOptions,
    qbe_opts: &QbeOptions,
    field: &F,
    theta_box: &ThetaBox<f64>,
    theta_star: &[f64],
    rate: &Rate<f64>,
    gamma_t: &[f64],
) -> Result<Vec<EstimateRecord<f64>>> {
    kinds
        .iter()
        .map(|kind| {
            let mut rec: EstimateRecord<f64> = match kind {
                EstimatorKind::M => qmle(field, theta_box, qmle_opts)?,
                EstimatorKind::B => qbe(field, &Prior::uniform(), theta_box, qbe_opts, Some((theta_star, rate)))?,
            };
            standardize(&mut rec, theta_star, rate)?;
            rec.set_gamma_t(theta_star.len(), gamma_t);
            Ok(rec)
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn estimate_rows<F: QuasiLikelihood<f64> + ?Sized>(
    cfg: &ExperimentConfig,
    field: &F,
    theta_box: &ThetaBox<f64>,
    theta_star: &[f64],
    rate: &Rate<f64>,
    gamma_t: &[f64],
    rep: usize,
    psi: Option<bool>,
    env_hash: u64,
) -> Result<Vec<McRow>> {
    let recs = estimate_records(&cfg.estimators, &cfg.qmle, &cfg.qbe, field, theta_box, theta_star, rate, gamma_t)?;
    Ok(recs
        .into_iter()
        .map(|rec| McRow {
            rep,
            estimator: rec.kind,
            theta_hat: rec.theta_hat,
            u_hat: rec.u_hat,
            psi,
            boundary: rec.boundary_flag,
            mass_log_z: rec.mass_log_z,
            env_hash,
            failed: false,
            gamma_t: gamma_t.to_vec(),
        })
        .collect())
}

pub(crate) fn observed_information<F: QuasiLikelihood<f64> + ?Sized>(field: &F, theta_star: &[f64], rate: &Rate<f64>) -> Result<Vec<f64>> {
    let p = theta_star.len();
    let h = field.hessian(theta_star)?;
    let mut g = vec![0.0; p * p];
    for i in 0..p {
        for j in 0..p {
            g[i * p + j] = -rate.diag[i] * h[i * p + j] * rate.diag[j];
        }
    }
    Ok(g)
}

fn run_horizon(cfg: &ExperimentConfig, horizon: f64) -> Result<McReport> {
    let fixed = cfg.conditioning == Conditioning::FixedEnvironment;
    let env_seed_fixed = derive_seed(cfg.seed, stream::ENV, 0);
    let rep_seed = |i: usize| derive_seed(cfg.seed, stream::REPLICATION, i as u64);
    let kinds = &cfg.estimators;
    let (rows, header) = match &cfg.model {
        ModelConfig::Regression(rc) => {
            let model = rc.build()?;
            let p = model.dim();
            let n = (horizon / rc.obs_step).round() as usize;
            if ((n as f64) * rc.obs_step - horizon).abs() > 1e-9 * horizon {
                return Err(Error::InvalidGrid(format!("horizon {horizon} is not a multiple of obs_step {}", rc.obs_step)));
            }
            let sim = RegressionSimulator::new(&model, TimeGrid::new(horizon, n)?)?;
            let rate = Rate::root(p, horizon)?;
            let studentization = match &cfg.gamma {
                Some(g) => Studentization::LimitGamma { gamma: g.clone(), se: vec![0.0; p * p] },
                None => {
                    let info = limit_information(&model, cfg.gamma_mc, derive_seed(cfg.seed, stream::INNER, u64::MAX))?;
                    Studentization::LimitGamma { gamma: info.gamma, se: info.se }
                }
            };
            let shared_env = if fixed { Some(sim.environment(env_seed_fixed)?) } else { None };
            let rows: Vec<Vec<McRow>> = (0..cfg.reps)
                .into_par_iter()
                .map(|i| -> Result<Vec<McRow>> {
                    let seed = rep_seed(i);
                    let own;
                    let (env, env_seed) = match &shared_env {
                        Some(e) => (e, env_seed_fixed),
                        None => {
                            own = sim.environment(seed)?;
                            (&own, seed)
                        }
                    };
                    let paths = match sim.simulate_given_environment(env, seed) {
                        Ok(p) => p,
                        Err(e) if is_replication_failure(&e) => return Ok(failed_rows(i, kinds, p, 0)),
                        Err(e) => return Err(e),
                    };
                    let env_hash = fingerprint_f64(paths.l.values.iter().copied());
                    let psi = match &cfg.psi {
                        Some(pc) => Some(psi_truncation(&paths.l, &model, pc, derive_seed(env_seed, stream::INNER, 0))?.psi),
                        None => None,
                    };
                    let field = RegressionField::new(&paths, &model)?;
                    match field.quadratic() {
                        Some(q) => {
                            let g = observed_information(&q, &model.theta_star, &rate)?;
                            estimate_rows(cfg, &q, &model.theta_box, &model.theta_star, &rate, &g, i, psi, env_hash)
                        }
                        None => {
                            let g = observed_information(&field, &model.theta_star, &rate)?;
                            estimate_rows(cfg, &field, &model.theta_box, &model.theta_star, &rate, &g, i, psi, env_hash)
                        }
                    }
                })
                .collect::<Result<_>>()?;
            let header = header_for(cfg, "regression", horizon, p, studentization);
            (rows, header)
        }
        ModelConfig::Volatility(vc) => {
            let model = vc.build()?;
            let p = model.dim();
            let n = horizon as usize;
            let sim = VolSimulator::new(&model, TimeGrid::new(vc.window, n)?)?;
            let rate = Rate::root(p, horizon)?;
            let shared_env = if fixed { Some(sim.environment(env_seed_fixed)?) } else { None };
            let rows: Vec<Vec<McRow>> = (0..cfg.reps)
                .into_par_iter()
                .map(|i| -> Result<Vec<McRow>> {
                    let seed = rep_seed(i);
                    let env = match &shared_env {
                        Some(e) => e.clone(),
                        None => sim.environment(seed)?,
                    };
                    let env_hash = env.fingerprint();
                    let data = match sim.simulate_given_environment(env, seed) {
                        Ok(d) => d,
                        Err(e) if is_replication_failure(&e) => return Ok(failed_rows(i, kinds, p, env_hash)),
                        Err(e) => return Err(e),
                    };
                    let field = VolatilityField::new(&data, &model)?;
                    let g = field.information(&model.theta_star)?;
                    estimate_rows(cfg, &field, &model.theta_box, &model.theta_star, &rate, &g, i, None, env_hash)
                })
                .collect::<Result<_>>()?;
            let header = header_for(cfg, "volatility", horizon, p, Studentization::PerReplication);
            (rows, header)
        }
    };
    let rows: Vec<McRow> = rows.into_iter().flatten().collect();
    let summary = summarize(&rows, &header)?;
    Ok(McReport { rows, summary })
}

fn header_for(cfg: &ExperimentConfig, model: &str, horizon: f64, dim: usize, studentization: Studentization) -> McSummary {
    McSummary {
        model: model.into(),
        horizon,
        dim,
        reps: cfg.reps,
        seed: cfg.seed,
        conditioning: cfg.conditioning,
        studentization,
        failure_rate: 0.0,
        estimators: Vec::new(),
    }
}

/// Simulate, build the field, estimate and standardize, `reps` times per
/// horizon. Replication `i` draws from a seed derived from `(seed, i)`;
/// results do not depend on the worker count.
pub fn mc_estimate(cfg: &ExperimentConfig) -> Result<Vec<McReport>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| cfg.horizons.iter().map(|h| run_horizon(cfg, *h)).collect())
}
