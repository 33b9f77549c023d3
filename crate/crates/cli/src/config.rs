use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pqla::estimators::{EstimatorKind, QbeOptions, QmleOptions};
use pqla::experiments::{Conditioning, ExperimentConfig, ModelConfig};
use pqla::theory_checks::PsiConfig;

use crate::exit::Failure;

pub const RESOLVED_NAME: &str = "config.resolved.json";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub estimators: EstimatorSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub output: OutputSection,
}

/// `horizon` is `T` for the regression model and the observation count `n`
/// for the volatility model.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub horizon: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    #[serde(default = "default_kinds")]
    pub kinds: Vec<EstimatorKind>,
    #[serde(default)]
    pub qmle: QmleOptions,
    #[serde(default)]
    pub qbe: QbeOptions,
}

fn default_kinds() -> Vec<EstimatorKind> {
    vec![EstimatorKind::M, EstimatorKind::B]
}

impl Default for EstimatorSection {
    fn default() -> Self {
        EstimatorSection { kinds: default_kinds(), qmle: QmleOptions::default(), qbe: QbeOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Defaults to `[grid.horizon]`.
    #[serde(default)]
    pub horizons: Option<Vec<f64>>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub conditioning: Conditioning,
    #[serde(default)]
    pub psi: Option<PsiConfig>,
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default = "default_gamma_mc")]
    pub gamma_mc: usize,
    #[serde(default)]
    pub jobs: Option<usize>,
}

fn default_reps() -> usize {
    100
}
fn default_gamma_mc() -> usize {
    1_000_000
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            horizons: None,
            reps: default_reps(),
            seed: None,
            conditioning: Conditioning::Unconditional,
            psi: None,
            gamma: None,
            gamma_mc: default_gamma_mc(),
            jobs: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<String>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub jobs: Option<usize>,
    pub horizon: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn parse_config(text: &str, origin: &str) -> Result<CliConfig, Failure> {
    serde_json::from_str(text).map_err(|e| {
        Failure::config(format!("{origin}:{}:{}: {}", e.line(), e.column(), strip_position(&e.to_string())))
    })
}

// serde_json appends " at line L column C"; the prefix already says so
fn strip_position(msg: &str) -> &str {
    match msg.rfind(" at line ") {
        Some(i) => &msg[..i],
        None => msg,
    }
}

/// Reads the config file, or the all-defaults document when `path` is
/// `None`.
pub fn load(path: Option<&Path>) -> Result<CliConfig, Failure> {
    match path {
        None => Ok(CliConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
            parse_config(&text, &p.display().to_string())
        }
    }
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("PQLA_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::config(format!("PQLA_SEED={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

impl CliConfig {
    /// Applies overrides and defaults so that every optional field the
    /// commands read is filled in. Seed precedence: flag, file, `PQLA_SEED`,
    /// then 0.
    pub fn resolve(mut self, o: &Overrides) -> Result<CliConfig, Failure> {
        let horizon = match (o.horizon, self.grid.horizon) {
            (Some(h), _) | (None, Some(h)) => h,
            (None, None) => match self.model {
                ModelConfig::Regression(_) => 200.0,
                ModelConfig::Volatility(_) => 1000.0,
            },
        };
        self.grid.horizon = Some(horizon);
        let seed = match (o.seed, self.experiment.seed) {
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => env_seed()?.unwrap_or(0),
        };
        self.experiment.seed = Some(seed);
        if self.experiment.horizons.is_none() || o.horizon.is_some() {
            self.experiment.horizons = Some(vec![horizon]);
        }
        if let Some(r) = o.reps {
            self.experiment.reps = r;
        }
        if o.jobs.is_some() {
            self.experiment.jobs = o.jobs;
        }
        if let Some(out) = &o.out {
            self.output.dir = Some(out.display().to_string());
        }
        if let ModelConfig::Regression(rc) = &mut self.model {
            let m = rc.build()?;
            rc.theta_star = Some(m.theta_star);
            rc.theta_box = Some(m.theta_box);
        }
        self.model.dim()?;
        Ok(self)
    }

    pub fn horizon(&self) -> f64 {
        self.grid.horizon.expect("resolved config")
    }

    pub fn seed(&self) -> u64 {
        self.experiment.seed.expect("resolved config")
    }

    pub fn out_dir(&self) -> Result<PathBuf, Failure> {
        self.output
            .dir
            .as_ref()
            .map(PathBuf::from)
            .ok_or_else(|| Failure::config("no output directory: pass --out or set output.dir".to_string()))
    }

    pub fn experiment(&self) -> ExperimentConfig {
        let e = &self.experiment;
        let mut cfg = ExperimentConfig::new(
            self.model.clone(),
            e.horizons.clone().unwrap_or_else(|| vec![self.horizon()]),
            e.reps,
            self.seed(),
        );
        cfg.estimators = self.estimators.kinds.clone();
        cfg.conditioning = e.conditioning;
        cfg.qmle = self.estimators.qmle.clone();
        cfg.qbe = self.estimators.qbe.clone();
        cfg.psi = e.psi.clone();
        cfg.gamma = e.gamma.clone();
        cfg.gamma_mc = e.gamma_mc;
        cfg.jobs = e.jobs;
        cfg.output = self.output.dir.clone();
        cfg
    }

    /// Writes the resolved document next to the outputs.
    pub fn echo(&self, dir: &Path) -> Result<PathBuf, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        let path = dir.join(RESOLVED_NAME);
        let text = serde_json::to_string_pretty(self).map_err(|e| Failure::config(e.to_string()))? + "\n";
        fs::write(&path, text).map_err(|e| Failure::io(&path, e))?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_reports_position() {
        let err = parse_config("{\n  \"model\": {\"kind\": \"regression\"},\n  \"grdi\": {}\n}", "c.json").unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.starts_with("c.json:3:"), "{}", err.message);
        assert!(err.message.contains("grdi"));
    }

    #[test]
    fn unknown_nested_key_is_rejected() {
        let e = parse_config(r#"{"model": {"kind": "volatility", "gard": 1}}"#, "x").unwrap_err();
        assert!(e.message.contains("gard"), "{}", e.message);
    }

    #[test]
    fn defaults_resolve_per_model() {
        let c = CliConfig::default().resolve(&Overrides::default()).unwrap();
        assert_eq!(c.horizon(), 200.0);
        let v = parse_config(r#"{"model": {"kind": "volatility"}}"#, "x").unwrap();
        let v = v.resolve(&Overrides { seed: Some(4), ..Default::default() }).unwrap();
        assert_eq!(v.horizon(), 1000.0);
        assert_eq!(v.seed(), 4);
        assert_eq!(v.experiment.horizons, Some(vec![1000.0]));
    }

    #[test]
    fn resolved_config_reparses_to_itself() {
        let c = CliConfig::default().resolve(&Overrides { reps: Some(7), ..Default::default() }).unwrap();
        let text = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&text, "x").unwrap(), c);
    }
}
