use std::sync::Arc;

use pqla::estimators::*;
use pqla::process_sim::{
    gen_wiener, sim_regression, ErgodicModelSpec, ReferenceRegression, RegressionPaths, SamplePath, TimeGrid, VolData,
    VolEnvModelSpec, VolEnvironment,
};
use pqla::random_field::{FnField, QuadraticField, QuasiLikelihood, Rate, RegressionField, ThetaBox, VolatilityField};

fn unit_box() -> ThetaBox<f64> {
    ThetaBox::new(vec![0.0], vec![1.0]).unwrap()
}

fn wide_box() -> ThetaBox<f64> {
    ThetaBox::new(vec![-2.0], vec![2.0]).unwrap()
}

fn vol_data(x: Vec<f64>, y: Vec<f64>, horizon: f64) -> VolData<f64> {
    let grid = TimeGrid::new(horizon, x.len() - 1).unwrap();
    VolData {
        env: VolEnvironment { seed: 0, brownian: SamplePath::scalar(grid, vec![0.0; x.len()], 0, "B").unwrap() },
        x: SamplePath::scalar(grid, x, 0, "X").unwrap(),
        y: SamplePath::scalar(grid, y, 0, "Y").unwrap(),
    }
}

#[test]
fn qmle_finds_interior_maximum() {
    let f = FnField::new(1, |t: &[f64]| -(t[0] - 0.3).powi(2));
    let r = qmle(&f, &wide_box(), &QmleOptions::default()).unwrap();
    assert!((r.theta_hat[0] - 0.3).abs() <= 1e-8, "{:?}", r.theta_hat);
    assert!(!r.boundary_flag && !r.flat_field);
    assert_eq!(r.kind, EstimatorKind::M);
}

#[test]
fn qmle_clamps_to_boundary() {
    let f = FnField::new(1, |t: &[f64]| t[0]);
    let r = qmle(&f, &wide_box(), &QmleOptions::default()).unwrap();
    assert_eq!(r.theta_hat, vec![2.0]);
    assert!(r.boundary_flag);
}

#[test]
fn qmle_flat_field_returns_center() {
    let f = FnField::new(1, |_: &[f64]| 3.0);
    let b = ThetaBox::new(vec![-1.0], vec![3.0]).unwrap();
    let r = qmle(&f, &b, &QmleOptions::default()).unwrap();
    assert!(r.flat_field);
    assert_eq!(r.theta_hat, vec![1.0]);
}

#[test]
fn qmle_dominates_scanned_grid() {
    let f = FnField::new(1, |t: &[f64]| (3.0 * t[0]).sin() - 0.2 * t[0] * t[0]);
    let b = wide_box();
    let r = qmle(&f, &b, &QmleOptions::default()).unwrap();
    let best = f.value(&r.theta_hat).unwrap();
    for th in b.grid(101).points() {
        assert!(best >= f.value(&th).unwrap());
    }
}

#[test]
fn qmle_in_two_dimensions() {
    let f: QuadraticField<f64> = QuadraticField { linear: vec![1.0, -0.5], curvature: vec![2.0, 0.5, 0.5, 1.0], constant: 0.0 };
    let b = ThetaBox::cube(2, -2.0, 2.0).unwrap();
    let r = qmle(&f, &b, &QmleOptions::default()).unwrap();
    let exact = f.argmax().unwrap();
    for k in 0..2 {
        assert!((r.theta_hat[k] - exact[k]).abs() < 1e-8);
    }
}

#[test]
fn qmle_matches_linear_oracle_on_reference_paths() {
    let model = ErgodicModelSpec::<f64>::reference();
    let grid = TimeGrid::new(20.0, 2000).unwrap();
    for seed in 0..100u64 {
        let paths = sim_regression(&model, grid, seed).unwrap();
        let oracle = qmle_linear_oracle(&paths, &model).unwrap();
        let f = RegressionField::new(&paths, &model).unwrap();
        let r = qmle(&f, &model.theta_box, &QmleOptions::default()).unwrap();
        assert!((r.theta_hat[0] - oracle[0]).abs() <= 1e-6, "seed {seed}: {} vs {}", r.theta_hat[0], oracle[0]);
    }
}

#[test]
fn oracle_recovers_theta_without_noise() {
    let coeffs = ReferenceRegression { sigma0: 1e-6, ..Default::default() };
    let mut model: ErgodicModelSpec<f64> = ErgodicModelSpec::with_coefficients(coeffs, vec![1.0]);
    // Euler on the observation grid, so dY = b h exactly up to the noise
    model.refine = 1;
    let paths = sim_regression(&model, TimeGrid::new(10.0, 1000).unwrap(), 3).unwrap();
    let th = qmle_linear_oracle(&paths, &model).unwrap();
    assert!((th[0] - 1.0).abs() < 1e-4, "{th:?}");
}

#[test]
fn oracle_rejects_degenerate_information() {
    let model = ErgodicModelSpec::<f64>::reference();
    let grid = TimeGrid::new(1.0, 10).unwrap();
    let zeros = vec![0.0; 11];
    let y: Vec<f64> = (0..11).map(|j| j as f64 * 0.1).collect();
    let paths = RegressionPaths {
        l: SamplePath::scalar(grid, zeros.clone(), 0, "L").unwrap(),
        u: SamplePath::scalar(grid, zeros, 0, "U").unwrap(),
        y: SamplePath::scalar(grid, y, 0, "Y").unwrap(),
    };
    assert!(matches!(qmle_linear_oracle(&paths, &model), Err(pqla::Error::SingularInformation(_))));
}

#[test]
fn intercept_model_oracle_matches_generic_qmle() {
    let model = ErgodicModelSpec::<f64>::reference_p2();
    let paths = sim_regression(&model, TimeGrid::new(50.0, 5000).unwrap(), 21).unwrap();
    let oracle = qmle_linear_oracle(&paths, &model).unwrap();
    let f = RegressionField::new(&paths, &model).unwrap();
    let r = qmle(&f, &model.theta_box, &QmleOptions::default()).unwrap();
    for k in 0..2 {
        assert!((r.theta_hat[k] - oracle[k]).abs() <= 1e-6);
    }
}

#[test]
fn qbe_constant_field_gives_prior_mean() {
    let f = FnField::new(1, |_: &[f64]| 0.0);
    let r = qbe(&f, &Prior::uniform(), &unit_box(), &QbeOptions::default(), None).unwrap();
    assert!((r.theta_hat[0] - 0.5).abs() < 1e-14);
    assert_eq!(r.kind, EstimatorKind::B);
    let lin = Prior::from_fn("1+theta", |t: &[f64]| 1.0 + t[0]);
    let r = qbe(&f, &lin, &unit_box(), &QbeOptions::default(), None).unwrap();
    assert!((r.theta_hat[0] - 5.0 / 9.0).abs() < 1e-6, "{:?}", r.theta_hat);
}

#[test]
fn qbe_concentrates_for_sharp_gaussian_field() {
    let t = 1e4;
    let f = QuadraticField::bowl(&[0.3], t);
    let r = qbe(&f, &Prior::uniform(), &wide_box(), &QbeOptions::default(), None).unwrap();
    assert!((r.theta_hat[0] - 0.3).abs() <= 1e-3, "{:?}", r.theta_hat);
}

#[test]
fn qbe_gaussian_mass_is_root_two_pi() {
    let t = 400.0;
    let f = QuadraticField::bowl(&[0.1], t);
    let rate = Rate::root(1, t).unwrap();
    let r = qbe(&f, &Prior::uniform(), &wide_box(), &QbeOptions::default(), Some((&[0.1], &rate))).unwrap();
    let mass = r.mass_log_z.unwrap();
    assert!((mass - (2.0 * std::f64::consts::PI).sqrt().ln()).abs() < 1e-6, "{mass}");
}

#[test]
fn qbe_is_invariant_to_prior_scale_and_field_shift() {
    let model = ErgodicModelSpec::<f64>::reference();
    let paths = sim_regression(&model, TimeGrid::new(10.0, 1000).unwrap(), 5).unwrap();
    let q = RegressionField::new(&paths, &model).unwrap().quadratic().unwrap();
    let prior = Prior::from_fn("bump", |t: &[f64]| (-t[0] * t[0]).exp());
    let opts = QbeOptions::default();
    let base = qbe(&q, &prior, &model.theta_box, &opts, None).unwrap().theta_hat[0];
    let scaled = qbe(&q, &prior.scaled(1e5), &model.theta_box, &opts, None).unwrap().theta_hat[0];
    let shifted = qbe(&q.shifted(1e3), &prior, &model.theta_box, &opts, None).unwrap().theta_hat[0];
    assert!((base - scaled).abs() <= 1e-12);
    assert!((base - shifted).abs() <= 1e-12);
    let m0 = qmle(&q, &model.theta_box, &QmleOptions::default()).unwrap().theta_hat[0];
    let m1 = qmle(&q.shifted(1e3), &model.theta_box, &QmleOptions::default()).unwrap().theta_hat[0];
    assert!((m0 - m1).abs() <= 1e-12);
}

#[test]
fn qbe_stays_in_box_and_matches_finer_quadrature() {
    let model = ErgodicModelSpec::<f64>::reference();
    for seed in 0..20u64 {
        let paths = sim_regression(&model, TimeGrid::new(30.0, 3000).unwrap(), seed).unwrap();
        let q = RegressionField::new(&paths, &model).unwrap().quadratic().unwrap();
        let coarse = qbe(&q, &Prior::uniform(), &model.theta_box, &QbeOptions::default(), None).unwrap();
        let fine_opts = QbeOptions { points: 2001, ..Default::default() };
        let fine = qbe(&q, &Prior::uniform(), &model.theta_box, &fine_opts, None).unwrap();
        assert!(model.theta_box.contains(&coarse.theta_hat));
        assert!((coarse.theta_hat[0] - fine.theta_hat[0]).abs() <= 1e-5);
    }
}

#[test]
fn qbe_rejects_bad_prior() {
    let f = FnField::new(1, |_: &[f64]| 0.0);
    let p = Prior::from_fn("neg", |t: &[f64]| t[0] - 0.5);
    assert!(qbe(&f, &p, &unit_box(), &QbeOptions::default(), None).is_err());
    let p = Prior::from_fn("nan", |_: &[f64]| f64::NAN);
    assert!(qbe(&f, &p, &unit_box(), &QbeOptions::default(), None).is_err());
}

#[test]
fn standardize_scales_by_rate() {
    let mut r = EstimateRecord::new(EstimatorKind::M, vec![1.0]);
    assert_eq!(standardize(&mut r, &[1.0], &Rate::root(1, 100.0).unwrap()).unwrap(), vec![0.0]);
    let mut r = EstimateRecord::new(EstimatorKind::M, vec![1.1f64]);
    let u = standardize(&mut r, &[1.0], &Rate::root(1, 100.0).unwrap()).unwrap();
    assert!((u[0] - 1.0).abs() < 1e-12);
    assert_eq!(r.u_hat, u);
    let mut r = EstimateRecord::new(EstimatorKind::B, vec![0.5f64, -0.2]);
    let u = standardize(&mut r, &[0.0, 0.0], &Rate::new(vec![0.5, 0.1]).unwrap()).unwrap();
    assert!((u[0] - 1.0).abs() < 1e-12 && (u[1] + 2.0).abs() < 1e-12);
}

#[test]
fn record_json_round_trip() {
    let mut r = EstimateRecord::new(EstimatorKind::B, vec![0.123456789012345]);
    r.set_gamma_t(1, &[2.5]);
    r.mass_log_z = Some(0.9189);
    let back = EstimateRecord::<f64>::from_json(&r.to_json().unwrap()).unwrap();
    assert_eq!(back, r);
}

#[test]
fn vol_oracle_on_pure_noise() {
    let n = 10_000;
    let grid = TimeGrid::new(1.0, n).unwrap();
    let w = gen_wiener(grid, 1, 77).unwrap().to_path("Y").unwrap();
    let data = vol_data(vec![0.0; n + 1], w.values, 1.0);
    let (th, flag) = qmle_vol_oracle(&data, &VolEnvModelSpec::remark()).unwrap();
    assert!(!flag);
    assert!((th[0] * th[0] - 1.0).abs() <= 3.0 * (2.0 / n as f64).sqrt(), "{th:?}");
}

#[test]
fn vol_oracle_on_manufactured_data() {
    // sum dY^2 / (1 + X^2) = 4 T with T = 1
    let n = 8;
    let h = 1.0 / n as f64;
    let x: Vec<f64> = (0..=n).map(|j| 0.25 * j as f64).collect();
    let mut y = vec![0.0];
    for j in 0..n {
        let step = 2.0 * (h * (1.0 + x[j] * x[j])).sqrt();
        let last = y[j];
        y.push(if j % 2 == 0 { last + step } else { last - step });
    }
    let (th, flag) = qmle_vol_oracle(&vol_data(x, y, 1.0), &VolEnvModelSpec::remark()).unwrap();
    assert!((th[0] - 2.0).abs() < 1e-12 && !flag);
}

#[test]
fn vol_oracle_flags_zero_increments() {
    let data = vol_data(vec![0.0; 5], vec![0.0; 5], 1.0);
    let model = VolEnvModelSpec::remark();
    let (th, flag) = qmle_vol_oracle(&data, &model).unwrap();
    assert!(flag);
    assert_eq!(th, model.theta_box.lower);
}

#[test]
fn vol_grid_qmle_matches_oracle() {
    let mut model = VolEnvModelSpec::<f64>::remark();
    model.state_drift = pqla::process_sim::StateDrift::Zero;
    for seed in 0..10u64 {
        let data = pqla::process_sim::sim_vol_env(&model, TimeGrid::new(1.0, 500).unwrap(), seed).unwrap();
        let (oracle, _) = qmle_vol_oracle(&data, &model).unwrap();
        let f = VolatilityField::new(&data, &model).unwrap();
        let r = qmle(&f, &model.theta_box, &QmleOptions::default()).unwrap();
        assert!((r.theta_hat[0] - oracle[0]).abs() <= 1e-6, "{} vs {}", r.theta_hat[0], oracle[0]);
        let raw = VolatilityField::from_increments(Arc::new(pqla::process_sim::ScalarVolatility::Remark), 1.0 / 500.0, data.x.values[..500].to_vec(), data.y.increments()).unwrap();
        assert!((raw.value(&[1.3]).unwrap() - f.value(&[1.3]).unwrap()).abs() < 1e-9 * f.value(&[1.3]).unwrap().abs());
    }
}

#[test]
fn qmle_in_single_precision() {
    let f = QuadraticField::<f32>::bowl(&[0.3], 50.0);
    let b = ThetaBox::<f32>::new(vec![-2.0], vec![2.0]).unwrap();
    let r = qmle(&f, &b, &QmleOptions::default()).unwrap();
    assert!((r.theta_hat[0] - 0.3).abs() < 1e-5);
    let q = qbe(&f, &Prior::uniform(), &b, &QbeOptions::default(), None).unwrap();
    assert!((q.theta_hat[0] - 0.3).abs() < 1e-3);
}
