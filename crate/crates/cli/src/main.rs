//! `pqla`: simulate, estimate, run Monte Carlo studies, check theory
//! conditions and render reports.
//!
//! Exit codes: 0 ok, 2 configuration or input error, 3 simulation error,
//! 4 estimation error.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pqla::experiments::LaqStudyConfig;
use pqla::theory_checks::{B1Set, BlockFunctional, PldConfig, RosenthalConfig};

use crate::config::{CliConfig, Overrides};
use crate::exit::Failure;

#[derive(Parser)]
#[command(name = "pqla", version, about = "Quasi-likelihood analysis under partial mixing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config; all defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; falls back to the config, then PQLA_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one data set and write paths.csv.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        /// T (regression) or n (volatility).
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Estimate from a paths.csv and write one record per estimator.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        paths: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo replications of simulate + estimate.
    Mc {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        jobs: Option<usize>,
        /// Single horizon; replaces experiment.horizons.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Theory checks.
    Check {
        #[command(subcommand)]
        check: Check,
    },
    /// Render SVG figures and a summary table from mc outputs.
    Report {
        /// Directory holding rows_*.csv and summary_*.json.
        #[arg(long)]
        input: PathBuf,
        /// Defaults to the input directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV written by `check pld`.
        #[arg(long)]
        pld: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Check {
    /// Evaluate the exponent inequalities for a parameter family.
    B1 {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        /// Parameter family: i or ii.
        #[arg(long, default_value = "i")]
        set: B1Set,
        /// Optional CSV of the table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximal-sum moments of OU block functionals against the mixing bracket.
    Rosenthal {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,256,1024,4096")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 4.0)]
        r: f64,
        /// tanh, sign or zero.
        #[arg(long, default_value = "tanh")]
        functional: BlockFunctional,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fraction of environments with a vanishing localization indicator.
    Psi {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "100,400")]
        horizons: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        /// Directory for psi_h<T>.csv files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tail probabilities of the likelihood-ratio field.
    Pld {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100.0)]
        horizon: f64,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Median LAQ remainder across horizons.
    Laq {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
        horizons: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolved(common: &Common, o: Overrides) -> Result<CliConfig, Failure> {
    config::load(common.config.as_deref())?.resolve(&Overrides { seed: common.seed, ..o })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { common, out, horizon } => {
            let cfg = resolved(&common, Overrides { out, horizon, ..Default::default() })?;
            let dir = cfg.out_dir()?;
            cfg.echo(&dir)?;
            let path = commands::simulate(&cfg, &dir)?;
            println!("wrote {}", path.display());
        }
        Command::Estimate { common, paths, out } => {
            let cfg = resolved(&common, Overrides { out, ..Default::default() })?;
            let dir = cfg.out_dir()?;
            let recs = commands::estimate(&cfg, &paths, &dir)?;
            cfg.echo(&dir)?;
            commands::print_estimates(&recs);
        }
        Command::Mc { common, out, reps, jobs, horizon } => {
            let cfg = resolved(&common, Overrides { out, reps, jobs, horizon, ..Default::default() })?;
            let dir = cfg.out_dir()?;
            cfg.echo(&dir)?;
            let reports = commands::mc(&cfg, &dir)?;
            commands::print_summaries(&reports);
        }
        Command::Check { check } => run_check(check)?,
        Command::Report { input, out, pld } => {
            let out = out.unwrap_or_else(|| input.clone());
            let files = commands::report(&input, &out, pld.as_deref())?;
            println!("wrote {} figures to {}", files.len(), out.display());
        }
    }
    Ok(())
}

fn run_check(check: Check) -> Result<(), Failure> {
    match check {
        Check::B1 { alpha, rho, set, out } => {
            commands::check_b1_cmd(alpha, rho, set, out.as_deref())?;
        }
        Check::Rosenthal { seed, reps, n, p, r, functional, out } => {
            let base = RosenthalConfig::default();
            let cfg = RosenthalConfig { seed: seed.unwrap_or(base.seed), reps, n_list: n, p, r, functional, ..base };
            commands::check_rosenthal(&cfg, out.as_deref())?;
        }
        Check::Psi { common, horizons, reps, out } => {
            let cfg = resolved(&common, Overrides::default())?;
            commands::check_psi(&cfg, &horizons, reps, out.as_deref())?;
        }
        Check::Pld { common, horizon, reps, out } => {
            let cfg = resolved(&common, Overrides::default())?;
            let pld = PldConfig { horizon, reps, seed: cfg.seed(), psi: cfg.experiment.psi.clone().or(PldConfig::default().psi), ..PldConfig::default() };
            commands::check_pld(&cfg, &pld, out.as_deref())?;
        }
        Check::Laq { common, horizons, reps, out } => {
            let cfg = resolved(&common, Overrides::default())?;
            let pqla::experiments::ModelConfig::Regression(rc) = &cfg.model else {
                return Err(Failure::config("the LAQ study applies to the regression model"));
            };
            let study = LaqStudyConfig {
                model: rc.clone(),
                horizons,
                reps,
                seed: cfg.seed(),
                radius: 3.0,
                points: 61,
                gamma: cfg.experiment.gamma.clone(),
                gamma_mc: cfg.experiment.gamma_mc,
            };
            commands::check_laq(&study, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
