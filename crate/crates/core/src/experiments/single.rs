use crate::error::Result;
use crate::estimators::{EstimateRecord, EstimatorKind, QbeOptions, QmleOptions};
use crate::experiments::mc::{estimate_records, observed_information};
use crate::process_sim::{ErgodicModelSpec, RegressionPaths, VolData, VolEnvModelSpec};
use crate::random_field::{Rate, RegressionField, VolatilityField};

/// Estimates from one observed regression data set, standardized at the
/// model's `theta*` with `a_T = T^{-1/2}`. `gamma_T` is the observed
/// information at `theta*`.
pub fn estimate_regression(
    paths: &RegressionPaths<f64>,
    model: &ErgodicModelSpec<f64>,
    kinds: &[EstimatorKind],
    qmle_opts: &QmleOptions,
    qbe_opts: &QbeOptions,
) -> Result<Vec<EstimateRecord<f64>>> {
    let rate = Rate::root(model.dim(), paths.grid().horizon())?;
    let field = RegressionField::new(paths, model)?;
    match field.quadratic() {
        Some(q) => {
            let g = observed_information(&q, &model.theta_star, &rate)?;
            estimate_records(kinds, qmle_opts, qbe_opts, &q, &model.theta_box, &model.theta_star, &rate, &g)
        }
        None => {
            let g = observed_information(&field, &model.theta_star, &rate)?;
            estimate_records(kinds, qmle_opts, qbe_opts, &field, &model.theta_box, &model.theta_star, &rate, &g)
        }
    }
}

/// Volatility counterpart with `a_n = n^{-1/2}` and `gamma_T` the
/// discretized information at `theta*`.
pub fn estimate_volatility(
    data: &VolData<f64>,
    model: &VolEnvModelSpec<f64>,
    kinds: &[EstimatorKind],
    qmle_opts: &QmleOptions,
    qbe_opts: &QbeOptions,
) -> Result<Vec<EstimateRecord<f64>>> {
    let n = data.y.grid.n_steps();
    let rate = Rate::root(model.dim(), n as f64)?;
    let field = VolatilityField::new(data, model)?;
    let g = field.information(&model.theta_star)?;
    estimate_records(kinds, qmle_opts, qbe_opts, &field, &model.theta_box, &model.theta_star, &rate, &g)
}
