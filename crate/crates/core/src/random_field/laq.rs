//! LAQ decomposition `log Z_T(u) = Delta_T[u] - Gamma[u,u]/2 + r_T(u)`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::random_field::{LikelihoodRatio, QuasiLikelihood, Rate, ThetaBox};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaqDecomp<T> {
    /// `Delta_T = a_T' dH(theta*)`.
    pub delta: Vec<T>,
    /// `Gamma_T = -a_T' d2H(theta*) a_T`, row-major.
    pub gamma_t: Vec<T>,
    /// Limit information used in the remainder.
    pub gamma: Vec<T>,
    pub theta_star: Vec<T>,
    pub rate: Rate<T>,
}

/// Score and observed information at `theta*`, scaled by `a_T`.
pub fn laq_decompose<T: Real, F: QuasiLikelihood<T> + ?Sized>(
    field: &F,
    theta_star: &[T],
    rate: &Rate<T>,
    gamma: &[T],
) -> Result<LaqDecomp<T>> {
    let p = field.dim();
    if theta_star.len() != p || rate.dim() != p || gamma.len() != p * p {
        return Err(Error::InvalidArgument("dimension mismatch in LAQ decomposition".into()));
    }
    let g = field.gradient(theta_star)?;
    let h = field.hessian(theta_star)?;
    let a = &rate.diag;
    let delta = (0..p).map(|k| a[k] * g[k]).collect();
    let mut gamma_t = vec![T::zero(); p * p];
    for i in 0..p {
        for j in 0..p {
            gamma_t[i * p + j] = -a[i] * h[i * p + j] * a[j];
        }
    }
    // symmetrize away rounding
    for i in 0..p {
        for j in 0..i {
            let m = (gamma_t[i * p + j] + gamma_t[j * p + i]) / T::lit(2.0);
            gamma_t[i * p + j] = m;
            gamma_t[j * p + i] = m;
        }
    }
    Ok(LaqDecomp { delta, gamma_t, gamma: gamma.to_vec(), theta_star: theta_star.to_vec(), rate: rate.clone() })
}

/// One LAQ dump row.
#[derive(Clone, Debug, PartialEq)]
pub struct LaqTerms<T> {
    pub u: Vec<T>,
    pub log_z: T,
    pub delta_term: T,
    pub gamma_term: T,
    pub remainder: T,
}

impl<T: Real> LaqDecomp<T> {
    pub fn dim(&self) -> usize {
        self.delta.len()
    }

    pub fn delta_term(&self, u: &[T]) -> T {
        self.delta.iter().zip(u).map(|(d, u)| *d * *u).sum()
    }

    /// `Gamma[u, u] / 2`.
    pub fn gamma_term(&self, u: &[T]) -> T {
        T::lit(0.5) * linalg::quad_form(self.dim(), &self.gamma, u)
    }

    pub fn terms<F: QuasiLikelihood<T> + ?Sized>(&self, lr: &LikelihoodRatio<'_, T, F>, u: &[T]) -> Result<LaqTerms<T>> {
        let log_z = lr.log_z(u)?;
        let delta_term = self.delta_term(u);
        let gamma_term = self.gamma_term(u);
        Ok(LaqTerms { u: u.to_vec(), log_z, delta_term, gamma_term, remainder: log_z - delta_term + gamma_term })
    }

    /// `r_T(u)`.
    pub fn remainder<F: QuasiLikelihood<T> + ?Sized>(&self, lr: &LikelihoodRatio<'_, T, F>, u: &[T]) -> Result<T> {
        self.terms(lr, u).map(|t| t.remainder)
    }

    /// `sup |r_T(u)|` over a `u`-grid in `{|u| <= radius}` intersected with `U_T`.
    pub fn sup_remainder<F: QuasiLikelihood<T> + ?Sized>(
        &self,
        field: &F,
        theta_box: &ThetaBox<T>,
        radius: T,
        points: usize,
    ) -> Result<T> {
        let lr = LikelihoodRatio::new(field, theta_box, &self.theta_star, self.rate.clone())?;
        let mut best = T::zero();
        for u in self.u_grid(radius, points) {
            if linalg::norm(&u) <= radius && lr.in_domain(&u) {
                best = best.max(self.remainder(&lr, &u)?.abs());
            }
        }
        Ok(best)
    }

    fn u_grid(&self, radius: T, points: usize) -> Vec<Vec<T>> {
        let axis = crate::random_field::linspace(-radius, radius, points);
        crate::random_field::TensorGrid::new(vec![axis; self.dim()]).points().collect()
    }

    /// CSV `u_1..u_p,logZ,delta_term,gamma_term,remainder` over a `u`-grid;
    /// points outside `U_T` are skipped.
    pub fn write_csv<W: Write, F: QuasiLikelihood<T> + ?Sized>(
        &self,
        mut w: W,
        field: &F,
        theta_box: &ThetaBox<T>,
        radius: T,
        points: usize,
    ) -> Result<()> {
        let lr = LikelihoodRatio::new(field, theta_box, &self.theta_star, self.rate.clone())?;
        let p = self.dim();
        writeln!(
            w,
            "# theta_star={} rate={} delta={} gamma_T={}",
            super::lr::join(&self.theta_star),
            super::lr::join(&self.rate.diag),
            super::lr::join(&self.delta),
            super::lr::join(&self.gamma_t)
        )?;
        let header: Vec<String> = (1..=p).map(|k| format!("u_{k}")).collect();
        writeln!(w, "{},logZ,delta_term,gamma_term,remainder", header.join(","))?;
        for u in self.u_grid(radius, points) {
            if !lr.in_domain(&u) {
                continue;
            }
            let t = self.terms(&lr, &u)?;
            writeln!(w, "{},{},{},{},{}", super::lr::join(&u), t.log_z, t.delta_term, t.gamma_term, t.remainder)?;
        }
        Ok(())
    }
}
