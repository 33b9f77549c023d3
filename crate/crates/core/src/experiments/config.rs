use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, QbeOptions, QmleOptions};
use crate::process_sim::{ErgodicModelSpec, OUSpec, ReferenceRegression, ScalarVolatility, SlowMixSpec, StateDrift, VolEnvModelSpec};
use crate::random_field::ThetaBox;
use crate::theory_checks::PsiConfig;

fn default_ou() -> OUSpec<f64> {
    OUSpec { kappa: 1.0, s: std::f64::consts::SQRT_2 }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionConfig {
    #[serde(default)]
    pub coefficients: ReferenceRegression<f64>,
    /// Defaults to `1` (and `0.5` for the intercept).
    #[serde(default)]
    pub theta_star: Option<Vec<f64>>,
    /// Defaults to `[-2, 2]^p`.
    #[serde(default)]
    pub theta_box: Option<ThetaBox<f64>>,
    #[serde(default = "default_ou")]
    pub ou: OUSpec<f64>,
    #[serde(default = "default_slow_a")]
    pub slow_a: f64,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default = "default_obs_step")]
    pub obs_step: f64,
}

fn default_slow_a() -> f64 {
    0.5
}
fn default_refine() -> usize {
    10
}
fn default_obs_step() -> f64 {
    0.002
}

impl Default for RegressionConfig {
    fn default() -> Self {
        RegressionConfig {
            coefficients: ReferenceRegression::default(),
            theta_star: None,
            theta_box: None,
            ou: default_ou(),
            slow_a: default_slow_a(),
            refine: default_refine(),
            obs_step: default_obs_step(),
        }
    }
}

impl RegressionConfig {
    pub fn build(&self) -> Result<ErgodicModelSpec<f64>> {
        let c = self.coefficients.clone();
        let default_star = if c.intercept { vec![1.0, 0.5] } else { vec![1.0] };
        let mut m = ErgodicModelSpec::with_coefficients(c, self.theta_star.clone().unwrap_or(default_star));
        if let Some(b) = &self.theta_box {
            m.theta_box = b.clone();
        }
        m.ou = self.ou;
        m.slow = SlowMixSpec::new(self.slow_a)?;
        m.refine = self.refine;
        m.validate()?;
        if !(self.obs_step > 0.0) {
            return Err(Error::InvalidModel("obs_step must be positive".into()));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolatilityConfig {
    #[serde(default = "default_sigma")]
    pub sigma: ScalarVolatility,
    #[serde(default = "default_drift")]
    pub state_drift: StateDrift,
    #[serde(default = "default_vol_star")]
    pub theta_star: Vec<f64>,
    #[serde(default = "default_vol_box")]
    pub theta_box: ThetaBox<f64>,
    #[serde(default = "default_refine")]
    pub refine: usize,
    #[serde(default = "default_guard")]
    pub guard: f64,
    #[serde(default)]
    pub x0: f64,
    /// Observation window `[0, T]`; the experiment horizons are numbers of
    /// observations `n`.
    #[serde(default = "default_window")]
    pub window: f64,
}

fn default_sigma() -> ScalarVolatility {
    ScalarVolatility::Remark
}
fn default_drift() -> StateDrift {
    StateDrift::ExpQuartic
}
fn default_vol_star() -> Vec<f64> {
    vec![1.0]
}
fn default_vol_box() -> ThetaBox<f64> {
    ThetaBox { lower: vec![0.1], upper: vec![3.0], margin: 1e-9 }
}
fn default_guard() -> f64 {
    1e6
}
fn default_window() -> f64 {
    1.0
}

impl Default for VolatilityConfig {
    fn default() -> Self {
        VolatilityConfig {
            sigma: default_sigma(),
            state_drift: default_drift(),
            theta_star: default_vol_star(),
            theta_box: default_vol_box(),
            refine: default_refine(),
            guard: default_guard(),
            x0: 0.0,
            window: default_window(),
        }
    }
}

impl VolatilityConfig {
    pub fn build(&self) -> Result<VolEnvModelSpec<f64>> {
        let m = VolEnvModelSpec {
            sigma: Arc::new(self.sigma),
            state_drift: self.state_drift,
            theta_star: self.theta_star.clone(),
            theta_box: self.theta_box.clone(),
            refine: self.refine,
            guard: self.guard,
            x0: self.x0,
            y0: 0.0,
        };
        m.validate()?;
        if !(self.window > 0.0) {
            return Err(Error::InvalidModel("window must be positive".into()));
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelConfig {
    Regression(RegressionConfig),
    Volatility(VolatilityConfig),
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Regression(RegressionConfig::default())
    }
}

impl ModelConfig {
    pub fn dim(&self) -> Result<usize> {
        Ok(match self {
            ModelConfig::Regression(r) => r.build()?.dim(),
            ModelConfig::Volatility(v) => v.build()?.dim(),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelConfig::Regression(_) => "regression",
            ModelConfig::Volatility(_) => "volatility",
        }
    }
}

/// Whether replications share one environment draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    #[default]
    Unconditional,
    FixedEnvironment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub model: ModelConfig,
    /// `T` for the regression model, `n` for the volatility model; ascending.
    pub horizons: Vec<f64>,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub conditioning: Conditioning,
    #[serde(default)]
    pub qmle: QmleOptions,
    #[serde(default)]
    pub qbe: QbeOptions,
    /// Localization indicator per replication (regression model only).
    #[serde(default)]
    pub psi: Option<PsiConfig>,
    /// Limit information; computed by Monte Carlo when absent.
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "default_gamma_mc")]
    pub gamma_mc: usize,
    /// Worker threads; all available when absent.
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output: Option<String>,
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::M, EstimatorKind::B]
}
fn default_gamma_mc() -> usize {
    1_000_000
}

impl ExperimentConfig {
    pub fn new(model: ModelConfig, horizons: Vec<f64>, reps: usize, seed: u64) -> Self {
        ExperimentConfig {
            model,
            horizons,
            estimators: default_estimators(),
            reps,
            seed,
            conditioning: Conditioning::Unconditional,
            qmle: QmleOptions::default(),
            qbe: QbeOptions::default(),
            psi: None,
            gamma: None,
            gamma_mc: default_gamma_mc(),
            jobs: None,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() || self.horizons.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::InvalidArgument("horizons must be positive and non-empty".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("horizons must be strictly ascending".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidArgument("at least one estimator is required".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidArgument("jobs must be >= 1".into()));
        }
        let p = self.model.dim()?;
        if let Some(g) = &self.gamma {
            if g.len() != p * p {
                return Err(Error::InvalidArgument(format!("gamma needs {} entries", p * p)));
            }
        }
        if let ModelConfig::Volatility(_) = self.model {
            if self.horizons.iter().any(|h| h.fract() != 0.0 || *h < 2.0) {
                return Err(Error::InvalidArgument("volatility horizons are observation counts n >= 2".into()));
            }
        }
        Ok(())
    }
}
