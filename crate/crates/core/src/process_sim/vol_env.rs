//! Volatility regression in a random environment:
//! `dY = b_t dt + sigma(gamma, X, theta) dw`, with the state `X` driven by an
//! environment Brownian path `B` that is drawn first and then held fixed.

use std::fmt::Debug;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::process_sim::{SamplePath, TimeGrid};
use crate::random_field::ThetaBox;
use crate::rng::{derive_seed, fingerprint_f64, rng_from_seed, stream};
use crate::scalar::Real;

/// Scalar diffusion `S(x, theta) = sigma(x, theta)^2` with analytic
/// theta-derivatives.
pub trait VolatilityModel<T: Real>: Send + Sync + Debug {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn s(&self, x: T, theta: &[T]) -> T;
    fn s_grad(&self, x: T, theta: &[T], out: &mut [T]);
    fn s_hess(&self, x: T, theta: &[T], out: &mut [T]);
    /// When `S(x, theta) = scale(theta) * shape(x)`, the shape factor.
    fn shape(&self, _x: T) -> Option<T> {
        None
    }
    /// `scale(theta)` with its gradient and Hessian; only called when
    /// [`VolatilityModel::shape`] returns `Some`.
    fn scale(&self, _theta: &[T], _grad: &mut [T], _hess: &mut [T]) -> T {
        unreachable!("scale() on a non-separable model")
    }
}

/// `sigma = theta sqrt(shape(x))` for a scalar parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarVolatility {
    /// `sigma = theta sqrt(1 + x^2)`.
    Remark,
    /// `sigma = theta`.
    Constant,
}

impl<T: Real> VolatilityModel<T> for ScalarVolatility {
    fn name(&self) -> &str {
        match self {
            ScalarVolatility::Remark => "vol-remark",
            ScalarVolatility::Constant => "vol-constant",
        }
    }

    fn dim(&self) -> usize {
        1
    }

    fn s(&self, x: T, theta: &[T]) -> T {
        theta[0] * theta[0] * self.shape(x).unwrap_or(T::one())
    }

    fn s_grad(&self, x: T, theta: &[T], out: &mut [T]) {
        out[0] = T::lit(2.0) * theta[0] * self.shape(x).unwrap_or(T::one());
    }

    fn s_hess(&self, x: T, _theta: &[T], out: &mut [T]) {
        out[0] = T::lit(2.0) * self.shape(x).unwrap_or(T::one());
    }

    fn shape(&self, x: T) -> Option<T> {
        Some(match self {
            ScalarVolatility::Remark => T::one() + x * x,
            ScalarVolatility::Constant => T::one(),
        })
    }

    fn scale(&self, theta: &[T], grad: &mut [T], hess: &mut [T]) -> T {
        grad[0] = T::lit(2.0) * theta[0];
        hess[0] = T::lit(2.0);
        theta[0] * theta[0]
    }
}

/// Drift of the state: `dX = g(B_t) X dt + d w~`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateDrift {
    /// `g(B) = exp(B^4)`.
    ExpQuartic,
    Zero,
}

impl StateDrift {
    fn rate<T: Real>(&self, b: T) -> T {
        match self {
            StateDrift::ExpQuartic => (b * b * b * b).exp(),
            StateDrift::Zero => T::zero(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VolEnvModelSpec<T: Real> {
    pub sigma: Arc<dyn VolatilityModel<T>>,
    pub state_drift: StateDrift,
    pub theta_star: Vec<T>,
    /// Must stay away from parameters where `S` is singular.
    pub theta_box: ThetaBox<T>,
    pub refine: usize,
    /// `|X|` above this aborts the replication.
    pub guard: T,
    pub x0: T,
    pub y0: T,
}

impl<T: Real> VolEnvModelSpec<T> {
    /// `sigma = theta sqrt(1 + x^2)`, `dX = exp(B^4) X dt + dw~`, `theta* = 1`.
    pub fn remark() -> Self {
        VolEnvModelSpec {
            sigma: Arc::new(ScalarVolatility::Remark),
            state_drift: StateDrift::ExpQuartic,
            theta_star: vec![T::one()],
            theta_box: ThetaBox::new(vec![T::lit(0.1)], vec![T::lit(3.0)]).expect("valid box"),
            refine: 10,
            guard: T::lit(1e6),
            x0: T::zero(),
            y0: T::zero(),
        }
    }

    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn validate(&self) -> Result<()> {
        self.theta_box.validate()?;
        if self.theta_box.dim() != self.dim() || self.theta_star.len() != self.dim() {
            return Err(Error::InvalidModel("theta* and box must match the volatility dimension".into()));
        }
        if !self.theta_box.contains(&self.theta_star) {
            return Err(Error::InvalidModel("theta* must lie in the box".into()));
        }
        if self.refine == 0 {
            return Err(Error::InvalidModel("refinement factor must be >= 1".into()));
        }
        if !(self.guard > T::zero()) {
            return Err(Error::InvalidModel("explosion guard must be positive".into()));
        }
        // S must stay nonsingular over the closed box; scan its corners and
        // a coarse interior grid at x = 0
        let grid = self.theta_box.grid(9);
        for th in grid.points() {
            if !(self.sigma.s(T::zero(), &th) > T::zero()) {
                return Err(Error::InvalidModel(format!("S is singular at theta = {th:?}")));
            }
        }
        Ok(())
    }
}

/// Environment draw: the Brownian path `B` on the fine grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VolEnvironment<T> {
    pub seed: u64,
    pub brownian: SamplePath<T>,
}

impl<T: Real> VolEnvironment<T> {
    pub fn fingerprint(&self) -> u64 {
        fingerprint_f64(self.brownian.values.iter().map(|v| v.to_f64_lossy()))
    }
}

/// Observations `(gamma, X_{t_j}, Y_{t_j})`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolData<T> {
    pub env: VolEnvironment<T>,
    pub x: SamplePath<T>,
    pub y: SamplePath<T>,
}

#[derive(Debug)]
pub struct VolSimulator<T: Real> {
    model: VolEnvModelSpec<T>,
    grid: TimeGrid<T>,
    fine: TimeGrid<T>,
}

impl<T: Real> VolSimulator<T> {
    pub fn new(model: &VolEnvModelSpec<T>, grid: TimeGrid<T>) -> Result<Self> {
        model.validate()?;
        let fine = grid.refine(model.refine)?;
        Ok(VolSimulator { model: model.clone(), grid, fine })
    }

    pub fn model(&self) -> &VolEnvModelSpec<T> {
        &self.model
    }

    pub fn environment(&self, env_seed: u64) -> Result<VolEnvironment<T>> {
        let mut rng = rng_from_seed(derive_seed(env_seed, stream::ENV, 0));
        let sd = self.fine.step().sqrt();
        let mut values = Vec::with_capacity(self.fine.n_points());
        let mut b = T::zero();
        values.push(b);
        for _ in 0..self.fine.n_steps() {
            b = b + sd * T::std_normal(&mut rng);
            values.push(b);
        }
        Ok(VolEnvironment { seed: env_seed, brownian: SamplePath::scalar(self.fine, values, env_seed, "B")? })
    }

    pub fn simulate(&self, seed: u64) -> Result<VolData<T>> {
        let env = self.environment(seed)?;
        self.simulate_given_environment(env, seed)
    }

    pub fn simulate_given_environment(&self, env: VolEnvironment<T>, noise_seed: u64) -> Result<VolData<T>> {
        if env.brownian.grid != self.fine {
            return Err(Error::InvalidArgument("environment path is not on the fine grid".into()));
        }
        let m = &self.model;
        let dt = self.fine.step();
        let sd = dt.sqrt();
        let mut rng_x = rng_from_seed(derive_seed(noise_seed, stream::STATE_NOISE, 0));
        let mut rng_y = rng_from_seed(derive_seed(noise_seed, stream::WIENER, 0));
        let r = m.refine;
        let mut xs = Vec::with_capacity(self.grid.n_points());
        let mut ys = Vec::with_capacity(self.grid.n_points());
        let (mut x, mut y) = (m.x0, m.y0);
        xs.push(x);
        ys.push(y);
        for k in 0..self.fine.n_steps() {
            let sig = m.sigma.s(x, &m.theta_star).sqrt();
            let dw_y = sd * T::std_normal(&mut rng_y);
            let dw_x = sd * T::std_normal(&mut rng_x);
            y = y + sig * dw_y;
            x = x + m.state_drift.rate(env.brownian.values[k]) * x * dt + dw_x;
            if !(x.abs() <= m.guard) {
                return Err(Error::Explosion { threshold: m.guard.to_f64_lossy(), index: k + 1 });
            }
            if !y.is_finite() {
                return Err(Error::NonFinite { label: "Y".into(), index: k + 1 });
            }
            if (k + 1) % r == 0 {
                xs.push(x);
                ys.push(y);
            }
        }
        Ok(VolData {
            x: SamplePath::scalar(self.grid, xs, noise_seed, "X")?,
            y: SamplePath::scalar(self.grid, ys, noise_seed, "Y")?,
            env,
        })
    }
}

pub fn sim_vol_env<T: Real>(model: &VolEnvModelSpec<T>, grid: TimeGrid<T>, seed: u64) -> Result<VolData<T>> {
    VolSimulator::new(model, grid)?.simulate(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::gen_wiener;

    #[test]
    fn constant_volatility_without_drift_is_scaled_wiener() {
        let mut model = VolEnvModelSpec::<f64>::remark();
        model.sigma = Arc::new(ScalarVolatility::Constant);
        model.state_drift = StateDrift::Zero;
        model.theta_star = vec![1.7];
        model.refine = 1;
        let g = TimeGrid::new(1.0, 100).unwrap();
        let d = sim_vol_env(&model, g, 3).unwrap();
        let w = gen_wiener(g, 1, derive_seed(3, stream::WIENER, 0)).unwrap();
        // the simulator interleaves no other draws on the Y stream
        let wp = w.to_path("w").unwrap();
        for j in 0..g.n_points() {
            assert!((d.y.x(j) - 1.7 * wp.x(j)).abs() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_data() {
        let model = VolEnvModelSpec::<f64>::remark();
        let g = TimeGrid::new(1.0, 200).unwrap();
        let a = sim_vol_env(&model, g, 12);
        let b = sim_vol_env(&model, g, 12);
        match (a, b) {
            (Ok(a), Ok(b)) => assert_eq!(a, b),
            (Err(a), Err(b)) => assert_eq!(a.to_string(), b.to_string()),
            _ => panic!("nondeterministic"),
        }
    }

    #[test]
    fn explosion_is_reported() {
        let mut model = VolEnvModelSpec::<f64>::remark();
        model.guard = 1e-3;
        let g = TimeGrid::new(1.0, 100).unwrap();
        assert!(matches!(sim_vol_env(&model, g, 1), Err(Error::Explosion { .. })));
    }

    #[test]
    fn singular_box_is_rejected() {
        let mut model = VolEnvModelSpec::<f64>::remark();
        model.theta_box = ThetaBox::new(vec![-1.0], vec![1.0]).unwrap();
        model.theta_star = vec![0.5];
        assert!(model.validate().is_err());
    }
}
