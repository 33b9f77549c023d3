use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::random_field::Rate;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Quasi maximum likelihood.
    M,
    /// Quasi Bayes.
    B,
}

impl EstimatorKind {
    pub fn label(self) -> &'static str {
        match self {
            EstimatorKind::M => "M",
            EstimatorKind::B => "B",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "qmle" => Ok(EstimatorKind::M),
            "B" | "qbe" => Ok(EstimatorKind::B),
            _ => Err(Error::Format(format!("unknown estimator kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord<T> {
    pub kind: EstimatorKind,
    pub theta_hat: Vec<T>,
    /// Filled in by [`standardize`].
    #[serde(default)]
    pub u_hat: Vec<T>,
    #[serde(default)]
    pub psi: Option<bool>,
    #[serde(rename = "gamma_T", default)]
    pub gamma_t: Vec<Vec<T>>,
    /// `log` of the integral of `Z_T` over `U_T` (QBE only).
    #[serde(rename = "mass_logZ", default)]
    pub mass_log_z: Option<T>,
    pub boundary_flag: bool,
    pub iterations: usize,
    #[serde(default)]
    pub flat_field: bool,
    #[serde(default)]
    pub field_max: Option<T>,
}

impl<T: Real> EstimateRecord<T> {
    pub fn new(kind: EstimatorKind, theta_hat: Vec<T>) -> Self {
        EstimateRecord {
            kind,
            theta_hat,
            u_hat: Vec::new(),
            psi: None,
            gamma_t: Vec::new(),
            mass_log_z: None,
            boundary_flag: false,
            iterations: 0,
            flat_field: false,
            field_max: None,
        }
    }

    pub fn set_gamma_t(&mut self, p: usize, flat: &[T]) {
        self.gamma_t = flat.chunks(p).map(|r| r.to_vec()).collect();
    }

    pub fn gamma_t_flat(&self) -> Vec<T> {
        self.gamma_t.iter().flatten().copied().collect()
    }
}

impl<T: Real + Serialize + for<'de> Deserialize<'de>> EstimateRecord<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `u_hat = a_T^{-1} (theta_hat - theta*)`, stored on the record.
pub fn standardize<T: Real>(record: &mut EstimateRecord<T>, theta_star: &[T], rate: &Rate<T>) -> Result<Vec<T>> {
    if theta_star.len() != record.theta_hat.len() || rate.dim() != theta_star.len() {
        return Err(Error::InvalidArgument("dimension mismatch in standardize".into()));
    }
    let u = rate.u(theta_star, &record.theta_hat);
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { label: "u_hat".into(), index: 0 });
    }
    record.u_hat = u.clone();
    Ok(u)
}
