//! Config-driven Monte Carlo studies of the limit theorems, with
//! persistence and SVG figures.

mod config;
mod mc;
mod persist;
mod single;
pub mod plots;
pub mod stats;
mod studies;

pub use config::{Conditioning, ExperimentConfig, ModelConfig, RegressionConfig, VolatilityConfig};
pub use mc::{
    mc_estimate, moment_table, summarize, EstimatorSummary, MassQuantiles, McReport, McRow, McSummary, MomentRow, Studentization,
    DEFAULT_MOMENTS,
};
pub use persist::{load_report, read_rows_csv, report_stem, write_report, write_rows_csv};
pub use single::{estimate_regression, estimate_volatility};
pub use studies::{
    a5_mass_diagnostic, laq_shrink_study, moment_convergence, normality_test, A5Row, LaqStudyConfig, LaqStudyRow, NormalityResult,
};
