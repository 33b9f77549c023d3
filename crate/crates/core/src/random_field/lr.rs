//! Likelihood-ratio field `Z_T(u) = exp(H(theta* + a_T u) - H(theta*))` and
//! its tabulation on a grid, kept in log space throughout.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_field::{QuasiLikelihood, TensorGrid, ThetaBox};
use crate::scalar::Real;

/// Diagonal normalizing matrix `a_T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate<T> {
    pub diag: Vec<T>,
}

impl<T: Real> Rate<T> {
    pub fn new(diag: Vec<T>) -> Result<Self> {
        if diag.is_empty() || diag.iter().any(|d| !(*d > T::zero() && d.is_finite())) {
            return Err(Error::InvalidArgument("rate entries must be positive and finite".into()));
        }
        Ok(Rate { diag })
    }

    /// `a_T = horizon^{-1/2} I_p`.
    pub fn root(p: usize, horizon: T) -> Result<Self> {
        Self::new(vec![T::one() / horizon.sqrt(); p])
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `b_T = lambda_min(a_T' a_T)^{-1}`.
    pub fn b_t(&self) -> T {
        let m = self.diag.iter().map(|d| *d * *d).fold(T::infinity(), T::min);
        T::one() / m
    }

    pub fn theta(&self, theta_star: &[T], u: &[T]) -> Vec<T> {
        theta_star.iter().zip(u).zip(&self.diag).map(|((t, u), a)| *t + *a * *u).collect()
    }

    pub fn u(&self, theta_star: &[T], theta: &[T]) -> Vec<T> {
        theta.iter().zip(theta_star).zip(&self.diag).map(|((t, s), a)| (*t - *s) / *a).collect()
    }
}

/// `Z_T` bound to a field, a box and a centering point.
pub struct LikelihoodRatio<'a, T: Real, F: QuasiLikelihood<T> + ?Sized> {
    pub field: &'a F,
    pub theta_box: &'a ThetaBox<T>,
    pub theta_star: Vec<T>,
    pub rate: Rate<T>,
    h_star: T,
}

impl<'a, T: Real, F: QuasiLikelihood<T> + ?Sized> LikelihoodRatio<'a, T, F> {
    pub fn new(field: &'a F, theta_box: &'a ThetaBox<T>, theta_star: &[T], rate: Rate<T>) -> Result<Self> {
        if field.dim() != theta_star.len() || rate.dim() != theta_star.len() || theta_box.dim() != theta_star.len() {
            return Err(Error::InvalidArgument("dimension mismatch between field, box, theta* and rate".into()));
        }
        let h_star = field.value(theta_star)?;
        if !h_star.is_finite() {
            return Err(Error::NonFinite { label: "H(theta*)".into(), index: 0 });
        }
        Ok(LikelihoodRatio { field, theta_box, theta_star: theta_star.to_vec(), rate, h_star })
    }

    pub fn h_star(&self) -> T {
        self.h_star
    }

    pub fn in_domain(&self, u: &[T]) -> bool {
        self.theta_box.contains(&self.rate.theta(&self.theta_star, u))
    }

    pub fn log_z(&self, u: &[T]) -> Result<T> {
        if u.iter().all(|v| *v == T::zero()) {
            return Ok(T::zero());
        }
        let theta = self.rate.theta(&self.theta_star, u);
        if !self.theta_box.contains(&theta) {
            return Err(Error::OutsideDomain(format!("u = {u:?} maps to theta = {theta:?}")));
        }
        Ok(self.field.value(&theta)? - self.h_star)
    }

    pub fn z(&self, u: &[T]) -> Result<T> {
        self.log_z(u).map(T::exp)
    }
}

/// `Z_T(u)`; `Z_T(0) = 1` exactly.
pub fn z_field<T: Real, F: QuasiLikelihood<T> + ?Sized>(lr: &LikelihoodRatio<'_, T, F>, u: &[T]) -> Result<T> {
    lr.z(u)
}

/// Field values tabulated on a tensor grid in `Theta`.
#[derive(Clone, Debug)]
pub struct FieldEval<T: Real> {
    pub grid: TensorGrid<T>,
    pub values: Vec<T>,
    pub rate: Rate<T>,
    pub theta_star: Vec<T>,
    pub h_star: T,
}

impl<T: Real> FieldEval<T> {
    pub fn tabulate<F: QuasiLikelihood<T> + ?Sized>(
        field: &F,
        theta_box: &ThetaBox<T>,
        grid: TensorGrid<T>,
        theta_star: &[T],
        rate: Rate<T>,
    ) -> Result<Self> {
        if grid.dim() != theta_box.dim() {
            return Err(Error::InvalidArgument("grid and box dimensions differ".into()));
        }
        for (k, axis) in grid.axes.iter().enumerate() {
            if axis.iter().any(|t| *t < theta_box.lower[k] || *t > theta_box.upper[k]) {
                return Err(Error::OutsideDomain(format!("grid axis {k} leaves the parameter box")));
            }
        }
        let lr = LikelihoodRatio::new(field, theta_box, theta_star, rate)?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| field.value(&grid.point(i)))
            .collect::<Result<Vec<T>>>()?;
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { label: "field".into(), index: i });
        }
        Ok(FieldEval { grid, values, rate: lr.rate, theta_star: lr.theta_star, h_star: lr.h_star })
    }

    /// Tabulate on the whole box with a `u`-spacing of at most `u_step`.
    pub fn over_box_u<F: QuasiLikelihood<T> + ?Sized>(
        field: &F,
        theta_box: &ThetaBox<T>,
        theta_star: &[T],
        rate: Rate<T>,
        u_step: T,
    ) -> Result<Self> {
        let axes = (0..theta_box.dim())
            .map(|k| {
                let width = theta_box.upper[k] - theta_box.lower[k];
                let m = (width / (u_step * rate.diag[k])).ceil().to_f64_lossy() as usize;
                theta_box.axis(k, m.max(1) + 1)
            })
            .collect();
        Self::tabulate(field, theta_box, TensorGrid::new(axes), theta_star, rate)
    }

    pub fn b_t(&self) -> T {
        self.rate.b_t()
    }

    pub fn u_point(&self, i: usize) -> Vec<T> {
        self.rate.u(&self.theta_star, &self.grid.point(i))
    }

    pub fn log_z(&self, i: usize) -> T {
        self.values[i] - self.h_star
    }

    /// Largest `u`-spacing over the axes.
    pub fn u_resolution(&self) -> T {
        self.grid
            .axes
            .iter()
            .zip(&self.rate.diag)
            .map(|(ax, a)| if ax.len() < 2 { T::zero() } else { (ax[1] - ax[0]) / *a })
            .fold(T::zero(), T::max)
    }

    /// First grid maximizer in lexicographic order.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        best
    }

    /// `sup { log Z(u) : |u| >= r }` over the grid, or `None` if no grid
    /// point qualifies.
    pub fn sup_log_z_beyond(&self, r: T) -> Option<T> {
        let mut best: Option<T> = None;
        for i in 0..self.values.len() {
            let u = self.u_point(i);
            if crate::linalg::norm(&u) >= r {
                let v = self.log_z(i);
                best = Some(best.map_or(v, |b: T| b.max(v)));
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.grid.dim();
        writeln!(
            w,
            "# theta_star={} rate={} b_T={} H_star={}",
            join(&self.theta_star),
            join(&self.rate.diag),
            self.b_t(),
            self.h_star
        )?;
        let header: Vec<String> = (1..=p).map(|k| format!("theta_{k}")).collect();
        writeln!(w, "{},H", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", join(&self.grid.point(i)), v)?;
        }
        Ok(())
    }
}

pub(crate) fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// `w_T(delta, c) = sup |log Z(u2) - log Z(u1)|` over grid pairs with
/// `|u1|, |u2| <= c` and `|u2 - u1| <= delta`.
pub fn modulus_of_continuity<T: Real>(eval: &FieldEval<T>, delta: T, c: T) -> Result<T> {
    if delta < T::zero() || c < T::zero() {
        return Err(Error::InvalidArgument("delta and c must be nonnegative".into()));
    }
    if delta == T::zero() {
        return Ok(T::zero());
    }
    let res = eval.u_resolution();
    if res > delta / T::lit(2.0) {
        return Err(Error::InvalidGrid(format!("u-resolution {res} exceeds delta/2 = {}", delta / T::lit(2.0))));
    }
    let grid = &eval.grid;
    let p = grid.dim();
    let steps: Vec<T> = grid
        .axes
        .iter()
        .zip(&eval.rate.diag)
        .map(|(ax, a)| if ax.len() < 2 { T::infinity() } else { (ax[1] - ax[0]) / *a })
        .collect();
    let reach: Vec<usize> = steps.iter().map(|s| (delta / *s).floor().to_f64_lossy() as usize).collect();
    let us: Vec<Vec<T>> = (0..grid.len()).map(|i| eval.u_point(i)).collect();
    let inside: Vec<bool> = us.iter().map(|u| crate::linalg::norm(u) <= c).collect();
    let lens: Vec<usize> = grid.axes.iter().map(|a| a.len()).collect();
    let widths: Vec<usize> = reach.iter().map(|r| 2 * r + 1).collect();
    let n_off: usize = widths.iter().product();
    let mut best = T::zero();
    for i in 0..grid.len() {
        if !inside[i] {
            continue;
        }
        let idx = grid.index(i);
        'offsets: for o in 0..n_off {
            let mut rem = o;
            let mut j = 0usize;
            for k in (0..p).rev() {
                let off = rem % widths[k];
                rem /= widths[k];
                let pos = idx[k] + off;
                if pos < reach[k] || pos - reach[k] >= lens[k] {
                    continue 'offsets;
                }
                let stride: usize = lens[k + 1..].iter().product();
                j += (pos - reach[k]) * stride;
            }
            if j <= i || !inside[j] {
                continue;
            }
            let d: Vec<T> = us[j].iter().zip(&us[i]).map(|(a, b)| *a - *b).collect();
            if crate::linalg::norm(&d) <= delta {
                best = best.max((eval.values[j] - eval.values[i]).abs());
            }
        }
    }
    Ok(best)
}
