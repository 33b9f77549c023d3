//! Polynomial-type large deviation and quasi-likelihood analysis toolkit:
//! simulation of ergodic regression and volatility-in-environment models,
//! quasi-likelihood random fields, QMLE/QBE, checks of the moment and mixing
//! conditions, and Monte Carlo experiments.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod process_sim;
pub mod quadrature;
pub mod random_field;
pub mod rng;
pub mod scalar;
pub mod theory_checks;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TimeGrid = process_sim::TimeGrid<f64>;
pub type SamplePath = process_sim::SamplePath<f64>;
pub type ErgodicModelSpec = process_sim::ErgodicModelSpec<f64>;
pub type VolEnvModelSpec = process_sim::VolEnvModelSpec<f64>;
pub type ThetaBox = random_field::ThetaBox<f64>;
pub type FieldEval = random_field::FieldEval<f64>;
pub type LaqDecomp = random_field::LaqDecomp<f64>;
pub type LimitField = random_field::LimitField<f64>;
