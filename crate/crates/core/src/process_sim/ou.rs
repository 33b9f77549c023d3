use rand::Rng;

use crate::error::{Error, Result};
use crate::process_sim::{SamplePath, TimeGrid};
use crate::rng::rng_from_seed;
use crate::scalar::Real;

/// Stationary Ornstein–Uhlenbeck process `dU = -kappa U dt + s dW`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OUSpec<T> {
    pub kappa: T,
    pub s: T,
}

impl<T: Real> OUSpec<T> {
    pub fn new(kappa: T, s: T) -> Result<Self> {
        let spec = OUSpec { kappa, s };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > T::zero()) {
            return Err(Error::InvalidModel(format!("OU kappa must be > 0, got {}", self.kappa)));
        }
        if !(self.s.is_finite() && self.s > T::zero()) {
            return Err(Error::InvalidModel(format!("OU s must be > 0, got {}", self.s)));
        }
        Ok(())
    }

    pub fn stationary_variance(&self) -> T {
        self.s * self.s / (T::lit(2.0) * self.kappa)
    }

    /// `(e^{-kappa h}, sd of the transition noise)` for lag `h`.
    pub fn transition(&self, h: T) -> (T, T) {
        let decay = (-self.kappa * h).exp();
        let var = self.stationary_variance() * (T::one() - (-T::lit(2.0) * self.kappa * h).exp());
        (decay, var.max(T::zero()).sqrt())
    }

    pub fn autocovariance(&self, lag: T) -> T {
        self.stationary_variance() * (-self.kappa * lag.abs()).exp()
    }
}

/// Fill `out` with an exact OU path on a step `h`, starting from `u0` or
/// from the stationary law when `u0` is `None`.
pub fn ou_fill<T: Real, R: Rng + ?Sized>(spec: &OUSpec<T>, h: T, u0: Option<T>, rng: &mut R, out: &mut [T]) {
    if out.is_empty() {
        return;
    }
    let (decay, sd) = spec.transition(h);
    out[0] = match u0 {
        Some(u) => u,
        None => spec.stationary_variance().sqrt() * T::std_normal(rng),
    };
    for k in 1..out.len() {
        out[k] = decay * out[k - 1] + sd * T::std_normal(rng);
    }
}

pub fn sim_ou<T: Real>(spec: &OUSpec<T>, grid: TimeGrid<T>, seed: u64) -> Result<SamplePath<T>> {
    sim_ou_from(spec, grid, None, seed)
}

/// Exact Gaussian transition sampling; `u0 = None` draws the stationary start.
pub fn sim_ou_from<T: Real>(spec: &OUSpec<T>, grid: TimeGrid<T>, u0: Option<T>, seed: u64) -> Result<SamplePath<T>> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut values = vec![T::zero(); grid.n_points()];
    ou_fill(spec, grid.step(), u0, &mut rng, &mut values);
    SamplePath::scalar(grid, values, seed, "U")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(OUSpec::new(0.0, 1.0).is_err());
        assert!(OUSpec::new(1.0, -1.0).is_err());
        assert!(OUSpec::new(1.0_f64, 1.0).is_ok());
    }

    #[test]
    fn noiseless_limit_is_exponential_decay() {
        let spec = OUSpec::new(0.7_f64, 1e-14).unwrap();
        let g = TimeGrid::new(3.0, 30).unwrap();
        let p = sim_ou_from(&spec, g, Some(1.0), 11).unwrap();
        for j in 0..g.n_points() {
            assert!((p.x(j) - (-0.7 * g.time(j)).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn lag_h_autocovariance_matches_exp() {
        // kappa=1, s=sqrt(2): stationary variance 1, cov(h) = exp(-h)
        let spec = OUSpec::new(1.0_f64, 2f64.sqrt()).unwrap();
        let g = TimeGrid::new(1.0, 2).unwrap();
        let reps = 100_000u64;
        let (mut c, mut c2) = (0.0, 0.0);
        for s in 0..reps {
            let p = sim_ou(&spec, g, s).unwrap();
            let v = p.x(0) * p.x(1);
            c += v;
            c2 += v * v;
        }
        let mean = c / reps as f64;
        let se = ((c2 / reps as f64 - mean * mean) / reps as f64).sqrt();
        assert!((mean - (-0.5f64).exp()).abs() < 3.0 * se, "{mean} se {se}");
    }

    #[test]
    fn conditional_moments_match_exact_transition() {
        let spec = OUSpec::new(2.0_f64, 0.5).unwrap();
        let h = 0.3;
        let (decay, sd) = spec.transition(h);
        let mut rng = rng_from_seed(5);
        let reps = 100_000;
        let u0 = 1.3;
        let (mut m, mut m2) = (0.0, 0.0);
        let mut buf = [0.0; 2];
        for _ in 0..reps {
            ou_fill(&spec, h, Some(u0), &mut rng, &mut buf);
            m += buf[1];
            m2 += buf[1] * buf[1];
        }
        let mean = m / reps as f64;
        let var = m2 / reps as f64 - mean * mean;
        let target_var = 0.25 / 4.0 * (1.0 - (-2.0 * 2.0 * h).exp());
        assert!((sd * sd - target_var).abs() < 1e-15);
        assert!((mean - decay * u0).abs() < 3.0 * sd / (reps as f64).sqrt());
        assert!((var - target_var).abs() < 3.0 * target_var * (2.0 / reps as f64).sqrt());
    }

    #[test]
    fn variance_is_stationary_over_time() {
        let spec = OUSpec::new(1.0_f64, 1.0).unwrap();
        let g = TimeGrid::new(5.0, 10).unwrap();
        let reps = 50_000u64;
        let (mut v0, mut vt) = (0.0, 0.0);
        for s in 0..reps {
            let p = sim_ou(&spec, g, s).unwrap();
            v0 += p.x(0).powi(2);
            vt += p.x(10).powi(2);
        }
        let target = spec.stationary_variance();
        let se = target * (2.0 / reps as f64).sqrt();
        assert!((v0 / reps as f64 - target).abs() < 3.0 * se);
        assert!((vt / reps as f64 - target).abs() < 3.0 * se);
    }
}
