//! The ergodic stochastic regression model
//! `dY = b0(L) b1(U, theta) dt + sigma0(L) sigma1(U) dw`
//! with a slowly mixing environment `L` and a fast mixing factor `U`.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::process_sim::{ou_fill, OUSpec, SamplePath, SlowMixSampler, SlowMixSpec, TimeGrid};
use crate::random_field::ThetaBox;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scalar::Real;

/// Coefficient functions of the regression model. The state is
/// `x = (l, u)` and the observation is scalar.
pub trait RegressionCoefficients<T: Real>: Send + Sync + Debug {
    fn name(&self) -> &str;
    /// Parameter dimension `p`.
    fn dim(&self) -> usize;
    fn b0(&self, l: T) -> T;
    fn b1(&self, u: T, theta: &[T]) -> T;
    /// `d b1 / d theta` into `out` (length `p`).
    fn b1_grad(&self, u: T, theta: &[T], out: &mut [T]);
    /// `d^2 b1 / d theta^2` into `out` (`p x p`, row-major).
    fn b1_hess(&self, u: T, theta: &[T], out: &mut [T]);
    fn sigma0(&self, l: T) -> T;
    fn sigma1(&self, u: T) -> T;
    /// When `b1(u, theta) = phi(u) . theta + psi(u)`, write `phi` and return `psi`.
    fn affine(&self, _u: T, _phi: &mut [T]) -> Option<T> {
        None
    }
    /// Dominating function `H1(l, u)` of the first four theta-derivatives of
    /// the likelihood integrands, uniformly over the box.
    fn envelope(&self, l: T, u: T, theta_box: &ThetaBox<T>, theta_star: &[T]) -> T;
}

/// `b0(l) = 1 + l^2`, `b1(u, theta) = scale * (theta_1 tanh(u) [+ theta_2])`,
/// constant `sigma0`, `sigma1`.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, bound(serialize = "T: serde::Serialize", deserialize = "T: Real + serde::Deserialize<'de>"))]
pub struct ReferenceRegression<T> {
    /// Adds the intercept parameter `theta_2` (p = 2).
    #[serde(default)]
    pub intercept: bool,
    #[serde(default = "one")]
    pub drift_scale: T,
    #[serde(default = "one")]
    pub sigma0: T,
    #[serde(default = "one")]
    pub sigma1: T,
}

fn one<T: Real>() -> T {
    T::one()
}

impl<T: Real> Default for ReferenceRegression<T> {
    fn default() -> Self {
        ReferenceRegression { intercept: false, drift_scale: T::one(), sigma0: T::one(), sigma1: T::one() }
    }
}

impl<T: Real> ReferenceRegression<T> {
    fn phi(&self, u: T, out: &mut [T]) {
        out[0] = self.drift_scale * u.tanh();
        if self.intercept {
            out[1] = self.drift_scale;
        }
    }
}

impl<T: Real> RegressionCoefficients<T> for ReferenceRegression<T> {
    fn name(&self) -> &str {
        if self.intercept {
            "regression-p2"
        } else {
            "regression"
        }
    }

    fn dim(&self) -> usize {
        if self.intercept {
            2
        } else {
            1
        }
    }

    fn b0(&self, l: T) -> T {
        T::one() + l * l
    }

    fn b1(&self, u: T, theta: &[T]) -> T {
        let mut b = self.drift_scale * theta[0] * u.tanh();
        if self.intercept {
            b = b + self.drift_scale * theta[1];
        }
        b
    }

    fn b1_grad(&self, u: T, _theta: &[T], out: &mut [T]) {
        self.phi(u, out);
    }

    fn b1_hess(&self, _u: T, _theta: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
    }

    fn sigma0(&self, _l: T) -> T {
        self.sigma0
    }

    fn sigma1(&self, _u: T) -> T {
        self.sigma1
    }

    fn affine(&self, u: T, phi: &mut [T]) -> Option<T> {
        self.phi(u, phi);
        Some(T::zero())
    }

    fn envelope(&self, l: T, u: T, theta_box: &ThetaBox<T>, theta_star: &[T]) -> T {
        let mut phi = [T::zero(); 2];
        self.phi(u, &mut phi);
        let g = self.b0(l) * phi[..self.dim()].iter().fold(T::zero(), |a, v| a + v.abs());
        let r = theta_box
            .lower
            .iter()
            .chain(&theta_box.upper)
            .fold(T::zero(), |m, v| m.max(v.abs()));
        let rs = theta_star.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let sigma = (self.sigma0 * self.sigma1).abs();
        // first component b / sigma and its gradient; second component
        // (b b* - b^2/2) / sigma^2 with its first two derivatives
        let first = g * (r + T::one()) / sigma;
        let second = g * g * (r * rs + r * r * T::lit(0.5) + rs + r + T::one()) / (sigma * sigma);
        first + second
    }
}

/// Full specification of the ergodic regression experiment.
#[derive(Clone, Debug)]
pub struct ErgodicModelSpec<T: Real> {
    pub coeffs: Arc<dyn RegressionCoefficients<T>>,
    pub theta_star: Vec<T>,
    pub theta_box: ThetaBox<T>,
    pub ou: OUSpec<T>,
    pub slow: SlowMixSpec<T>,
    /// Internal Euler steps per observation step.
    pub refine: usize,
    pub y0: T,
}

impl<T: Real> ErgodicModelSpec<T> {
    /// p = 1 reference: `b1 = theta tanh(u)`, `Theta = [-2, 2]`, `theta* = 1`,
    /// `U` with unit stationary variance, `L` with `a = 0.5`.
    pub fn reference() -> Self {
        Self::with_coefficients(ReferenceRegression::default(), vec![T::one()])
    }

    /// p = 2 reference: `b1 = theta_1 tanh(u) + theta_2`, `Theta = [-2, 2]^2`.
    pub fn reference_p2() -> Self {
        let c = ReferenceRegression { intercept: true, ..Default::default() };
        Self::with_coefficients(c, vec![T::one(), T::lit(0.5)])
    }

    pub fn with_coefficients(coeffs: impl RegressionCoefficients<T> + 'static, theta_star: Vec<T>) -> Self {
        let p = coeffs.dim();
        ErgodicModelSpec {
            coeffs: Arc::new(coeffs),
            theta_star,
            theta_box: ThetaBox::cube(p, T::lit(-2.0), T::lit(2.0)).expect("valid default box"),
            ou: OUSpec { kappa: T::one(), s: T::lit(2.0).sqrt() },
            slow: SlowMixSpec { a: T::lit(0.5), clip_threshold: 1e-8 },
            refine: 10,
            y0: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.ou.validate()?;
        self.slow.validate()?;
        self.theta_box.validate()?;
        if self.theta_box.dim() != self.coeffs.dim() || self.theta_star.len() != self.coeffs.dim() {
            return Err(Error::InvalidModel("theta* and box must match the coefficient dimension".into()));
        }
        if !self.theta_box.contains(&self.theta_star) {
            return Err(Error::InvalidModel("theta* must lie in the box".into()));
        }
        if self.refine == 0 {
            return Err(Error::InvalidModel("refinement factor must be >= 1".into()));
        }
        Ok(())
    }

    /// Drift `b0(l) b1(u, theta)`.
    pub fn drift(&self, l: T, u: T, theta: &[T]) -> T {
        self.coeffs.b0(l) * self.coeffs.b1(u, theta)
    }

    pub fn diffusion(&self, l: T, u: T) -> T {
        self.coeffs.sigma0(l) * self.coeffs.sigma1(u)
    }
}

/// Simulated `(L, U, Y)` on the observation grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionPaths<T> {
    pub l: SamplePath<T>,
    pub u: SamplePath<T>,
    pub y: SamplePath<T>,
}

impl<T: Real> RegressionPaths<T> {
    pub fn grid(&self) -> TimeGrid<T> {
        self.y.grid
    }

    pub fn check_aligned(&self) -> Result<()> {
        if self.l.grid != self.y.grid || self.u.grid != self.y.grid {
            return Err(Error::InvalidArgument("L, U and Y must share one grid".into()));
        }
        Ok(())
    }
}

/// Euler–Maruyama for `Y` given the state on the fine grid. Returns the fine
/// `Y` path (`dw.len() + 1` values).
pub fn euler_regression<T: Real>(model: &ErgodicModelSpec<T>, dt: T, l: &[T], u: &[T], dw: &[T]) -> Result<Vec<T>> {
    let n = dw.len();
    if l.len() < n || u.len() < n {
        return Err(Error::InvalidArgument("state paths shorter than noise".into()));
    }
    let mut y = Vec::with_capacity(n + 1);
    y.push(model.y0);
    let mut cur = model.y0;
    for k in 0..n {
        let sig = model.diffusion(l[k], u[k]);
        if !(sig.abs() > T::zero()) {
            return Err(Error::InvalidModel(format!("sigma0 * sigma1 vanishes at fine step {k}")));
        }
        cur = cur + model.drift(l[k], u[k], &model.theta_star) * dt + sig * dw[k];
        if !cur.is_finite() {
            return Err(Error::NonFinite { label: "Y".into(), index: k + 1 });
        }
        y.push(cur);
    }
    Ok(y)
}

/// Reusable simulator; the environment sampler is built once per grid.
#[derive(Debug)]
pub struct RegressionSimulator<T: Real> {
    model: ErgodicModelSpec<T>,
    grid: TimeGrid<T>,
    fine: TimeGrid<T>,
    slow: SlowMixSampler<T>,
}

impl<T: Real> RegressionSimulator<T> {
    pub fn new(model: &ErgodicModelSpec<T>, grid: TimeGrid<T>) -> Result<Self> {
        model.validate()?;
        let fine = grid.refine(model.refine)?;
        let slow = SlowMixSampler::new(&model.slow, fine)?;
        Ok(RegressionSimulator { model: model.clone(), grid, fine, slow })
    }

    pub fn model(&self) -> &ErgodicModelSpec<T> {
        &self.model
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    /// Environment path `L` on the fine grid.
    pub fn environment(&self, env_seed: u64) -> Result<SamplePath<T>> {
        self.slow.sample(derive_seed(env_seed, stream::SLOW, 0))
    }

    pub fn simulate(&self, seed: u64) -> Result<RegressionPaths<T>> {
        let env = self.environment(seed)?;
        self.simulate_given_environment(&env, seed)
    }

    /// `U`, `w` and `Y` drawn from `noise_seed` with a fixed fine `L` path.
    pub fn simulate_given_environment(&self, env: &SamplePath<T>, noise_seed: u64) -> Result<RegressionPaths<T>> {
        if env.grid != self.fine {
            return Err(Error::InvalidArgument("environment path is not on the fine grid".into()));
        }
        let dt = self.fine.step();
        let mut u = vec![T::zero(); self.fine.n_points()];
        let mut rng = rng_from_seed(derive_seed(noise_seed, stream::OU, 0));
        ou_fill(&self.model.ou, dt, None, &mut rng, &mut u);
        let mut rng = rng_from_seed(derive_seed(noise_seed, stream::WIENER, 0));
        let sd = dt.sqrt();
        let dw: Vec<T> = (0..self.fine.n_steps()).map(|_| sd * T::std_normal(&mut rng)).collect();
        let y = euler_regression(&self.model, dt, &env.values, &u, &dw)?;
        let r = self.model.refine;
        let obs = |v: &[T]| -> Vec<T> { (0..self.grid.n_points()).map(|j| v[j * r]).collect() };
        Ok(RegressionPaths {
            l: SamplePath::scalar(self.grid, obs(&env.values), env.seed, "L")?,
            u: SamplePath::scalar(self.grid, obs(&u), noise_seed, "U")?,
            y: SamplePath::scalar(self.grid, obs(&y), noise_seed, "Y")?,
        })
    }
}

pub fn sim_regression<T: Real>(model: &ErgodicModelSpec<T>, grid: TimeGrid<T>, seed: u64) -> Result<RegressionPaths<T>> {
    RegressionSimulator::new(model, grid)?.simulate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::gen_wiener;

    #[test]
    fn pure_noise_when_drift_vanishes() {
        let c = ReferenceRegression { drift_scale: 0.0, ..Default::default() };
        let mut model = ErgodicModelSpec::with_coefficients(c, vec![1.0_f64]);
        model.refine = 1;
        let g = TimeGrid::new(5.0, 50).unwrap();
        let sim = RegressionSimulator::new(&model, g).unwrap();
        let paths = sim.simulate(9).unwrap();
        let w = gen_wiener(g, 1, derive_seed(9, stream::WIENER, 0)).unwrap();
        let wp = w.to_path("w").unwrap();
        for j in 0..g.n_points() {
            assert!((paths.y.x(j) - wp.x(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn vanishing_diffusion_is_rejected() {
        let c = ReferenceRegression { sigma0: 0.0, sigma1: 0.0, ..Default::default() };
        let model = ErgodicModelSpec::with_coefficients(c, vec![1.0_f64]);
        let g = TimeGrid::new(1.0, 10).unwrap();
        assert!(matches!(sim_regression(&model, g, 1), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn deterministic_given_seed() {
        let model = ErgodicModelSpec::<f64>::reference();
        let g = TimeGrid::new(2.0, 20).unwrap();
        assert_eq!(sim_regression(&model, g, 4).unwrap(), sim_regression(&model, g, 4).unwrap());
        assert_ne!(sim_regression(&model, g, 4).unwrap().y, sim_regression(&model, g, 5).unwrap().y);
    }

    #[test]
    fn fixed_environment_is_shared() {
        let model = ErgodicModelSpec::<f64>::reference();
        let g = TimeGrid::new(2.0, 20).unwrap();
        let sim = RegressionSimulator::new(&model, g).unwrap();
        let env = sim.environment(77).unwrap();
        let a = sim.simulate_given_environment(&env, 1).unwrap();
        let b = sim.simulate_given_environment(&env, 2).unwrap();
        assert_eq!(a.l, b.l);
        assert_ne!(a.u, b.u);
    }

    #[test]
    fn reference_envelope_dominates_integrands() {
        let model = ErgodicModelSpec::<f64>::reference();
        let c = &model.coeffs;
        for (l, u) in [(0.0, 0.3), (1.5, -2.0), (-3.0, 0.01)] {
            let env = c.envelope(l, u, &model.theta_box, &model.theta_star);
            for k in 0..=40 {
                let th = -2.0 + 0.1 * k as f64;
                let b = c.b0(l) * c.b1(u, &[th]);
                let bs = c.b0(l) * c.b1(u, &[1.0]);
                let db = c.b0(l) * u.tanh();
                let h2 = b * bs - 0.5 * b * b;
                let dh2 = db * (bs - b);
                let ddh2 = db * db;
                assert!(b.abs() + db.abs() + h2.abs() + dh2.abs() + ddh2.abs() <= env + 1e-12);
            }
        }
    }
}
