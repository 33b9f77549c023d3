use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::estimators::{EstimateRecord, EstimatorKind};
use crate::linalg;
use crate::random_field::{QuasiLikelihood, ThetaBox};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QmleOptions {
    pub grid_points: usize,
    pub max_iter: usize,
    /// Interior stationarity tolerance, relative to `1 + |H|`.
    pub grad_tol: f64,
}

impl Default for QmleOptions {
    fn default() -> Self {
        QmleOptions { grid_points: 101, max_iter: 200, grad_tol: 1e-8 }
    }
}

/// Gradient with components that push outward on active faces zeroed.
fn projected_gradient<T: Real>(g: &[T], theta: &[T], b: &ThetaBox<T>) -> Vec<T> {
    g.iter()
        .enumerate()
        .map(|(k, gk)| {
            let at_lo = theta[k] <= b.lower[k] && *gk < T::zero();
            let at_hi = theta[k] >= b.upper[k] && *gk > T::zero();
            if at_lo || at_hi {
                T::zero()
            } else {
                *gk
            }
        })
        .collect()
}

/// Grid scan over the box followed by projected Newton ascent with
/// backtracking; gradient ascent replaces Newton where the Hessian is not
/// negative definite. Ties on the grid go to the lexicographically smallest
/// point.
pub fn qmle<T: Real, F: QuasiLikelihood<T> + ?Sized>(field: &F, theta_box: &ThetaBox<T>, opts: &QmleOptions) -> Result<EstimateRecord<T>> {
    let p = theta_box.dim();
    let grid = theta_box.grid(opts.grid_points.max(2));
    let mut best_i = 0;
    let mut best_v = T::neg_infinity();
    let mut all_equal = true;
    let mut first: Option<T> = None;
    for i in 0..grid.len() {
        let v = field.value(&grid.point(i))?;
        match first {
            None => first = Some(v),
            Some(f) if f != v => all_equal = false,
            _ => {}
        }
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    if all_equal {
        let c = theta_box.center();
        let mut rec = EstimateRecord::new(EstimatorKind::M, c.clone());
        rec.flat_field = true;
        rec.field_max = Some(field.value(&c)?);
        return Ok(rec);
    }

    let mut theta = grid.point(best_i);
    let mut value = best_v;
    let mut iterations = 0;
    let tol = T::lit(opts.grad_tol);
    for _ in 0..opts.max_iter {
        iterations += 1;
        let g = field.gradient(&theta)?;
        let pg = projected_gradient(&g, &theta, theta_box);
        if linalg::norm(&pg) <= tol * (T::one() + value.abs()) {
            break;
        }
        let h = field.hessian(&theta)?;
        let neg_h: Vec<T> = h.iter().map(|v| -*v).collect();
        let direction = match linalg::sym_inverse(p, &neg_h) {
            Some(inv) if linalg::min_eigenvalue(p, &neg_h) > T::zero() => linalg::mat_vec(p, &inv, &pg),
            _ => {
                // scale the ascent step to the box
                let w = theta_box.widths().into_iter().fold(T::infinity(), T::min);
                let n = linalg::norm(&pg);
                pg.iter().map(|v| *v * w / n).collect()
            }
        };
        let mut t = T::one();
        let mut moved = false;
        for _ in 0..60 {
            let trial: Vec<T> = theta.iter().zip(&direction).map(|(a, d)| *a + t * *d).collect();
            let (trial, _) = theta_box.clamp(&trial);
            let v = field.value(&trial)?;
            if v > value {
                moved = trial != theta;
                theta = trial;
                value = v;
                break;
            }
            t = t * T::lit(0.5);
        }
        if !moved {
            break;
        }
    }
    let mut rec = EstimateRecord::new(EstimatorKind::M, theta.clone());
    rec.boundary_flag = theta_box.on_boundary(&theta);
    rec.iterations = iterations;
    rec.field_max = Some(value);
    Ok(rec)
}
