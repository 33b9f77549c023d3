//! Analytic alpha-mixing upper bounds for the simulated components.

use crate::process_sim::{OUSpec, SlowMixSpec};
use crate::scalar::Real;

/// Which component a mixing bound refers to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MixingSource<T> {
    /// Stationary Gaussian environment. `scale` is the free constant in
    /// front of the covariance decay.
    Slow { spec: SlowMixSpec<T>, scale: T },
    Ou(OUSpec<T>),
}

/// Upper bound on the alpha-mixing coefficient at lag `h`, capped at 1/2.
///
/// Gaussian processes satisfy `alpha(h) <= rho(h)` (maximal correlation).
/// For the OU process `rho(h) = e^{-kappa h}`; for the slow environment the
/// covariance `c(h)` is used as the correlation envelope.
pub fn mixing_alpha_bound<T: Real>(source: &MixingSource<T>, h: T) -> T {
    let half = T::lit(0.5);
    let h = h.max(T::zero());
    let raw = match source {
        MixingSource::Slow { spec, scale } => *scale * spec.covariance(h),
        MixingSource::Ou(ou) => (-ou.kappa * h).exp(),
    };
    raw.min(half).max(T::zero())
}
