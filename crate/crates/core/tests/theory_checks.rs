use pqla::process_sim::{ErgodicModelSpec, MixingSource, OUSpec, RegressionCoefficients, SamplePath, TimeGrid};
use pqla::random_field::ThetaBox;
use pqla::theory_checks::*;

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn b1_reference_families() {
    let ok = check_b1(&B1Params::family(B1Set::I, 0.1, 2.0)).unwrap();
    assert!(ok.pass && ok.failures().count() == 0);
    let bad = check_b1(&B1Params::family(B1Set::I, 0.25, 2.0)).unwrap();
    assert!(!bad.pass);
    let failed: Vec<&Constraint<f64>> = bad.failures().collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0].name, "0<1-2beta2-rho2");
    assert!(close(failed[0].rhs, -0.25, 1e-12));
    assert!(check_b1(&B1Params::family(B1Set::II, 0.3, 2.0)).unwrap().pass);
    assert!(check_b1(&B1Params::family(B1Set::I, 1.2, 2.0)).is_err());
}

#[test]
fn b1_set_one_holds_below_one_fifth() {
    for k in 1..200 {
        let alpha = 0.2 * k as f64 / 200.0;
        assert!(check_b1(&B1Params::family(B1Set::I, alpha, 2.0)).unwrap().pass, "alpha {alpha}");
    }
    assert!(!check_b1(&B1Params::family(B1Set::I, 0.2, 2.0)).unwrap().pass);
    for k in 1..200 {
        let alpha = k as f64 / 600.0;
        assert!(check_b1(&B1Params::family(B1Set::II, alpha, 2.0)).unwrap().pass, "alpha {alpha}");
    }
}

#[test]
fn b1_csv_lists_every_constraint() {
    let mut buf = Vec::new();
    check_b1(&B1Params::family(B1Set::I, 0.1, 2.0)).unwrap().write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("constraint,lhs,rhs,pass\n"));
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn moment_orders_worked_examples() {
    let m = moment_orders(4.0, &B1Params::family(B1Set::I, 0.1, 2.0)).unwrap();
    assert!(close(m.m1, 4.0 / 0.9, 1e-12));
    assert!(close(m.m2, 8.0, 1e-12));
    assert!(close(m.m3, 360.0, 1e-9));
    assert!(close(m.m4, 360.0, 1e-9));
    assert!(close(m.max(), 360.0, 1e-9));
    let m = moment_orders(4.0, &B1Params::family(B1Set::II, 0.1, 2.0)).unwrap();
    assert!(close(m.m2, 4.0 / 0.7, 1e-12));
    let mut p = B1Params::family(B1Set::I, 0.1, 2.0);
    p.rho1 = 0.0;
    // rho1 = 0 violates 0 < rho1, so only the formula is checked here
    assert!(moment_orders(4.0, &p).is_err());
    assert!(moment_orders(4.0, &B1Params::family(B1Set::I, 0.25, 2.0)).is_err());
}

#[test]
fn rosenthal_bracket_independent_case() {
    let zero = MixingProfile::constant(0.0, 5000).unwrap();
    for n in [2usize, 17, 1000] {
        assert_eq!(rosenthal_rhs(2.0, 4.0, n, &zero).unwrap(), n as f64);
        assert!(close(rosenthal_rhs(3.0, 6.0, n, &zero).unwrap(), (n as f64).powf(1.5), 1e-14));
    }
    assert!(rosenthal_rhs(4.0, 4.0, 10, &zero).is_err());
    assert!(rosenthal_rhs(2.0, 4.0, 1, &zero).is_err());
}

#[test]
fn rosenthal_bracket_half_mixing_closed_form() {
    let half = MixingProfile::constant(0.5, 5000).unwrap();
    let c = 0.5f64.sqrt();
    for n in [2usize, 10, 1000, 5000] {
        let nf = n as f64;
        let exact = nf * (1.0 + (nf - 1.0) * c) + nf * (nf - 1.0) * c;
        assert!(close(rosenthal_rhs(2.0, 4.0, n, &half).unwrap(), exact, 1e-12), "n {n}");
    }
}

#[test]
fn rosenthal_bracket_exponential_profile_scales_like_n() {
    let ou = MixingSource::Ou(OUSpec::new(1.0, 2f64.sqrt()).unwrap());
    let prof = MixingProfile::from_source(&ou, 1 << 14).unwrap();
    assert_eq!(prof.source, ProfileSource::AnalyticOu);
    let ratios: Vec<f64> = (6..=14).map(|k| rosenthal_rhs(2.0, 4.0, 1 << k, &prof).unwrap() / (1 << k) as f64).collect();
    for w in ratios.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
    assert!(close(ratios[8], ratios[7], 1e-6));
    let mut prev = 0.0;
    for n in [2usize, 3, 50, 400, 4000] {
        let b = rosenthal_rhs(2.0, 4.0, n, &prof).unwrap();
        assert!(b >= prev);
        prev = b;
    }
}

#[test]
fn mixing_profile_rejects_bad_values() {
    assert!(MixingProfile::new(vec![0.5, 0.6], ProfileSource::UserSupplied).is_err());
    assert!(MixingProfile::new(vec![0.1, 0.2], ProfileSource::UserSupplied).is_err());
    assert!(MixingProfile::new(vec![-0.1], ProfileSource::UserSupplied).is_err());
    assert!(MixingProfile::new(vec![0.5, 0.5, 0.1], ProfileSource::UserSupplied).is_ok());
}

#[test]
fn rademacher_sums_by_enumeration() {
    // all 2^n sign sequences with equal weight
    let n = 12usize;
    let (mut end, mut max) = (0.0, 0.0);
    for mask in 0u32..(1 << n) {
        let (mut s, mut m) = (0i64, 0i64);
        for j in 0..n {
            s += if mask >> j & 1 == 1 { 1 } else { -1 };
            m = m.max(s * s);
        }
        end += (s * s) as f64;
        max += m as f64;
    }
    let total = (1u64 << n) as f64;
    let (end, max) = (end / total, max / total);
    assert_eq!(end, n as f64);
    let bracket = rosenthal_rhs(2.0, 4.0, n, &MixingProfile::constant(0.0, n).unwrap()).unwrap();
    assert_eq!(end / bracket, 1.0);
    assert!(max >= n as f64 && max <= 4.0 * n as f64, "{max}");
}

#[test]
fn rosenthal_zero_functional_gives_zero() {
    let cfg = RosenthalConfig { functional: BlockFunctional::Zero, n_list: vec![16, 64], reps: 20, ..Default::default() };
    for row in rosenthal_mc_check(&cfg).unwrap() {
        assert_eq!(row.lhs, 0.0);
        assert_eq!(row.ratio, 0.0);
    }
}

#[test]
fn rosenthal_ratios_stay_bounded() {
    let cfg = RosenthalConfig { n_list: vec![64, 256, 1024], reps: 400, seed: 5, ..Default::default() };
    let rows = rosenthal_mc_check(&cfg).unwrap();
    let first = rows[0].ratio;
    for r in &rows {
        assert!(r.ratio > 0.0 && r.ratio <= 2.0 * first, "{rows:?}");
        assert!(r.lhs >= r.lhs_terminal);
    }
    let again = rosenthal_mc_check(&cfg).unwrap();
    assert_eq!(rows, again);
    let mut buf = Vec::new();
    write_rosenthal_csv(&rows, &mut buf).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with("n,lhs,bracket,ratio"));
}

#[test]
fn pld_boundary_radii() {
    let model = ErgodicModelSpec::<f64>::reference();
    let cfg = PldConfig { horizon: 10.0, r_list: vec![0.0, 1.0, 100.0], reps: 20, psi: None, ..Default::default() };
    let rep = pld_tail_mc(&model, &cfg).unwrap();
    assert_eq!(rep.rows[0].prob, 1.0);
    assert_eq!(rep.rows[0].threshold, 1.0);
    assert_eq!(rep.rows[2].prob, 0.0);
    assert!(rep.rows[2].empty);
    assert!(!rep.rows[1].empty);
    assert_eq!(rep.psi_pass_fraction, 1.0);
    assert!(pld_tail_mc(&model, &PldConfig { u_step: 0.1, ..cfg }).is_err());
}

#[test]
fn pld_probabilities_decrease_in_r() {
    let model = ErgodicModelSpec::<f64>::reference();
    let cfg = PldConfig { horizon: 20.0, r_list: vec![0.5, 1.0, 2.0, 3.0, 4.0], reps: 200, psi: None, ..Default::default() };
    let rep = pld_tail_mc(&model, &cfg).unwrap();
    for w in rep.rows.windows(2) {
        assert!(w[1].prob <= w[0].prob + 2.0 * (w[0].se + w[1].se), "{:?}", rep.rows);
    }
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().nth(1), Some("r,threshold,prob,se,n_eff"));
}

#[derive(Debug)]
struct Bounded;

impl RegressionCoefficients<f64> for Bounded {
    fn name(&self) -> &str {
        "bounded"
    }
    fn dim(&self) -> usize {
        1
    }
    fn b0(&self, _l: f64) -> f64 {
        1.0
    }
    fn b1(&self, u: f64, theta: &[f64]) -> f64 {
        0.5 * theta[0] * u.tanh()
    }
    fn b1_grad(&self, u: f64, _theta: &[f64], out: &mut [f64]) {
        out[0] = 0.5 * u.tanh();
    }
    fn b1_hess(&self, _u: f64, _theta: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn sigma0(&self, _l: f64) -> f64 {
        1.0
    }
    fn sigma1(&self, _u: f64) -> f64 {
        1.0
    }
    fn envelope(&self, _l: f64, _u: f64, _b: &ThetaBox<f64>, _ts: &[f64]) -> f64 {
        1.0
    }
}

fn raw_psi() -> PsiConfig {
    PsiConfig { n_inner: 16, normalize: false, ..Default::default() }
}

#[test]
fn psi_is_one_for_bounded_envelope() {
    let model = ErgodicModelSpec::with_coefficients(Bounded, vec![1.0]);
    for t in [1.0, 5.0, 30.0] {
        for r in psi_study(&model, t, 5, &raw_psi(), 3).unwrap() {
            assert!(r.psi && r.max_block <= 1.0 + 1e-12);
        }
    }
}

#[test]
fn psi_is_zero_for_huge_block() {
    let model = ErgodicModelSpec::<f64>::reference();
    let grid = TimeGrid::new(20.0, 200).unwrap();
    let mut l = vec![0.0; 201];
    for v in &mut l[50..60] {
        *v = 30.0;
    }
    let path = SamplePath::scalar(grid, l, 0, "L").unwrap();
    let r = psi_truncation(&path, &model, &PsiConfig::default(), 1).unwrap();
    assert!(!r.psi, "{r:?}");
    assert!(r.max_block > r.threshold);
    let flat = SamplePath::scalar(grid, vec![0.0; 201], 0, "L").unwrap();
    assert!(psi_truncation(&flat, &model, &PsiConfig::default(), 1).unwrap().psi);
}

#[test]
fn psi_is_deterministic_and_monotone_in_eps() {
    let model = ErgodicModelSpec::<f64>::reference();
    let cfg = PsiConfig { n_inner: 32, ..Default::default() };
    let a = psi_study(&model, 50.0, 40, &cfg, 9).unwrap();
    assert_eq!(a, psi_study(&model, 50.0, 40, &cfg, 9).unwrap());
    let wider = PsiConfig { eps_star: 0.5, ..cfg.clone() };
    let b = psi_study(&model, 50.0, 40, &wider, 9).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.max_block, y.max_block);
        assert!(!x.psi || y.psi);
    }
    assert!(zero_fraction(&b) <= zero_fraction(&a));
    let mut buf = Vec::new();
    write_psi_csv(&a, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("rep,psi,max_block\n"));
    assert_eq!(text.lines().count(), 41);
}

#[test]
fn psi_rejects_bad_config() {
    let model = ErgodicModelSpec::<f64>::reference();
    let path = SamplePath::scalar(TimeGrid::new(5.0, 50).unwrap(), vec![0.0; 51], 0, "L").unwrap();
    let bad = PsiConfig { r_star: 1.0, ..Default::default() };
    assert!(psi_truncation(&path, &model, &bad, 0).is_err());
    let coarse = SamplePath::scalar(TimeGrid::new(5.0, 15).unwrap(), vec![0.0; 16], 0, "L").unwrap();
    assert!(psi_truncation(&coarse, &model, &PsiConfig::default(), 0).is_err());
}

#[test]
fn envelope_moment_normalizes_stationary_blocks() {
    let model = ErgodicModelSpec::<f64>::reference();
    let k = envelope_moment(&model, 8.0);
    assert!(k.is_finite() && k > 1.0);
    let r = psi_study(&model, 10.0, 20, &PsiConfig { n_inner: 64, ..Default::default() }, 2).unwrap();
    assert!(r.iter().all(|x| x.scale == k));
}
