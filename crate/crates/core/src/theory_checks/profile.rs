use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process_sim::{mixing_alpha_bound, MixingSource};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    AnalyticOu,
    AnalyticSlowGaussian,
    UserSupplied,
}

/// Mixing-coefficient bounds `alpha(h)` at integer lags `h = 1, 2, ...`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingProfile<T> {
    alphas: Vec<T>,
    pub source: ProfileSource,
}

impl<T: Real> MixingProfile<T> {
    /// Validates values in `[0, 1/2]` and nonincreasing in the lag.
    pub fn new(alphas: Vec<T>, source: ProfileSource) -> Result<Self> {
        let half = T::lit(0.5);
        for (k, a) in alphas.iter().enumerate() {
            if !(*a >= T::zero() && *a <= half) {
                return Err(Error::InvalidArgument(format!("alpha({}) = {a} outside [0, 1/2]", k + 1)));
            }
            if k > 0 && *a > alphas[k - 1] {
                return Err(Error::InvalidArgument(format!("alpha increases at lag {}", k + 1)));
            }
        }
        Ok(MixingProfile { alphas, source })
    }

    pub fn from_source(src: &MixingSource<T>, max_lag: usize) -> Result<Self> {
        let source = match src {
            MixingSource::Ou(_) => ProfileSource::AnalyticOu,
            MixingSource::Slow { .. } => ProfileSource::AnalyticSlowGaussian,
        };
        let alphas = (1..=max_lag).map(|h| mixing_alpha_bound(src, T::from_usize_lossy(h))).collect();
        Self::new(alphas, source)
    }

    pub fn constant(value: T, max_lag: usize) -> Result<Self> {
        Self::new(vec![value; max_lag], ProfileSource::UserSupplied)
    }

    pub fn max_lag(&self) -> usize {
        self.alphas.len()
    }

    /// `alpha(h)` for `h >= 1`.
    pub fn alpha(&self, h: usize) -> T {
        self.alphas[h - 1]
    }
}
