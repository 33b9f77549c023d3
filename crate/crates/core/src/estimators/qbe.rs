use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimateRecord, EstimatorKind, Prior};
use crate::random_field::{linspace, QuasiLikelihood, Rate, TensorGrid, ThetaBox};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QbeOptions {
    /// Initial nodes per axis; each refinement halves the spacing.
    pub points: usize,
    pub rel_tol: f64,
    pub max_refine: usize,
}

impl Default for QbeOptions {
    fn default() -> Self {
        QbeOptions { points: 201, rel_tol: 1e-6, max_refine: 4 }
    }
}

struct Quad<T> {
    mean: Vec<T>,
    log_mass_flat: T,
}

fn trapezoid<T: Real, F: QuasiLikelihood<T> + ?Sized>(field: &F, prior: &Prior<T>, b: &ThetaBox<T>, points: usize) -> Result<Quad<T>> {
    let p = b.dim();
    let axes: Vec<Vec<T>> = (0..p).map(|k| linspace(b.lower[k], b.upper[k], points)).collect();
    let grid = TensorGrid::new(axes);
    let mut logw = Vec::with_capacity(grid.len());
    let mut logw_flat = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let idx = grid.index(i);
        let theta = grid.point(i);
        let ends = idx.iter().filter(|j| **j == 0 || **j == points - 1).count();
        let edge = T::lit(0.5).powi(ends as i32).ln();
        let h = field.value(&theta)?;
        if !h.is_finite() {
            return Err(Error::NonFinite { label: "field on quadrature grid".into(), index: i });
        }
        logw.push(h + prior.log_density(&theta)? + edge);
        logw_flat.push(h + edge);
    }
    let m = logw.iter().copied().fold(T::neg_infinity(), T::max);
    let mut s = T::zero();
    let mut num = vec![T::zero(); p];
    for (i, lw) in logw.iter().enumerate() {
        let w = (*lw - m).exp();
        s = s + w;
        let theta = grid.point(i);
        for k in 0..p {
            num[k] = num[k] + w * theta[k];
        }
    }
    let cell: T = (0..p).map(|k| (b.upper[k] - b.lower[k]) / T::from_usize_lossy(points - 1)).fold(T::one(), |a, c| a * c);
    let mean = num.into_iter().enumerate().map(|(k, v)| (v / s).max(b.lower[k]).min(b.upper[k])).collect();
    let log_mass_flat = crate::scalar::log_sum_exp(logw_flat.iter().copied()) + cell.ln();
    Ok(Quad { mean, log_mass_flat })
}

/// Posterior mean under `exp(H) prior` by tensor trapezoid quadrature in
/// log space, refined until the relative change falls below `rel_tol`.
///
/// With `anchor = Some((theta*, a_T))` the record also carries
/// `log int_{U_T} Z_T(u) du`.
pub fn qbe<T: Real, F: QuasiLikelihood<T> + ?Sized>(
    field: &F,
    prior: &Prior<T>,
    theta_box: &ThetaBox<T>,
    opts: &QbeOptions,
    anchor: Option<(&[T], &Rate<T>)>,
) -> Result<EstimateRecord<T>> {
    if opts.points < 2 {
        return Err(Error::InvalidArgument("QBE needs at least 2 nodes per axis".into()));
    }
    let mut points = opts.points;
    let mut q = trapezoid(field, prior, theta_box, points)?;
    let mut refinements = 0;
    while refinements < opts.max_refine {
        points = 2 * (points - 1) + 1;
        let next = trapezoid(field, prior, theta_box, points)?;
        refinements += 1;
        let change = next
            .mean
            .iter()
            .zip(&q.mean)
            .map(|(a, b)| (*a - *b).abs() / (T::one() + b.abs()))
            .fold(T::zero(), T::max);
        q = next;
        if change < T::lit(opts.rel_tol) {
            break;
        }
    }
    let mut rec = EstimateRecord::new(EstimatorKind::B, q.mean.clone());
    rec.iterations = refinements;
    rec.boundary_flag = theta_box.on_boundary(&q.mean);
    if let Some((theta_star, rate)) = anchor {
        // int_{U_T} Z du = det(a_T)^{-1} int_Theta exp(H - H(theta*)) dtheta
        let h_star = field.value(theta_star)?;
        let log_det: T = rate.diag.iter().map(|a| a.ln()).sum();
        rec.mass_log_z = Some(q.log_mass_flat - h_star - log_det);
    }
    Ok(rec)
}
