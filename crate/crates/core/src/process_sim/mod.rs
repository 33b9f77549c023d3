//! Simulation of the driving noise, the fast and slow mixing components,
//! and the two reference models.

mod grid;
mod io;
mod mixing;
mod ou;
mod regression;
mod slow;
mod vol_env;
mod wiener;

pub use grid::{SamplePath, TimeGrid};
pub use io::{read_paths_csv, write_paths_csv, PathTable};
pub use mixing::{mixing_alpha_bound, MixingSource};
pub use ou::{ou_fill, sim_ou, sim_ou_from, OUSpec};
pub use regression::{
    euler_regression, sim_regression, ErgodicModelSpec, ReferenceRegression, RegressionCoefficients, RegressionPaths,
    RegressionSimulator,
};
pub use slow::{sim_slow_gaussian, SlowMixSampler, SlowMixSpec};
pub use vol_env::{
    sim_vol_env, ScalarVolatility, StateDrift, VolData, VolEnvModelSpec, VolEnvironment, VolSimulator,
    VolatilityModel,
};
pub use wiener::{gen_wiener, WienerIncrements};
