use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use pqla::estimators::EstimateRecord;
use pqla::experiments::plots::{histogram_svg, loglog_svg, qq_svg};
use pqla::experiments::{
    estimate_regression, estimate_volatility, laq_shrink_study, load_report, mc_estimate, normality_test, write_report, LaqStudyConfig,
    McReport, ModelConfig, RegressionConfig,
};
use pqla::process_sim::{read_paths_csv, sim_regression, sim_vol_env, write_paths_csv, RegressionPaths, VolData, VolEnvironment};
use pqla::theory_checks::{
    check_b1, pld_tail_mc, psi_study, rosenthal_mc_check, write_psi_csv, write_rosenthal_csv, zero_fraction, B1Params, B1Set, PldConfig,
    RosenthalConfig,
};
use pqla::{SamplePath, TimeGrid};

use crate::config::CliConfig;
use crate::exit::{Failure, ESTIMATION, SIMULATION};

pub const PATHS_NAME: &str = "paths.csv";

fn create(path: &Path) -> Result<fs::File, Failure> {
    fs::File::create(path).map_err(|e| Failure::io(path, e))
}

fn regression_grid(rc: &RegressionConfig, horizon: f64) -> Result<TimeGrid, Failure> {
    let n = (horizon / rc.obs_step).round() as usize;
    if ((n as f64) * rc.obs_step - horizon).abs() > 1e-9 * horizon {
        return Err(Failure::config(format!("horizon {horizon} is not a multiple of obs_step {}", rc.obs_step)));
    }
    Ok(TimeGrid::new(horizon, n)?)
}

fn vol_count(horizon: f64) -> Result<usize, Failure> {
    if horizon.fract() != 0.0 || horizon < 2.0 {
        return Err(Failure::config(format!("volatility horizon is an observation count n >= 2, got {horizon}")));
    }
    Ok(horizon as usize)
}

/// One data set on the configured grid; writes `paths.csv` and returns its
/// path.
pub fn simulate(cfg: &CliConfig, out: &Path) -> Result<PathBuf, Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let path = out.join(PATHS_NAME);
    let seed = cfg.seed();
    match &cfg.model {
        ModelConfig::Regression(rc) => {
            let model = rc.build()?;
            let grid = regression_grid(rc, cfg.horizon())?;
            let p = sim_regression(&model, grid, seed).map_err(|e| Failure::at_stage(e, SIMULATION))?;
            write_paths_csv(create(&path)?, "regression", seed, &[&p.l, &p.u, &p.y])?;
        }
        ModelConfig::Volatility(vc) => {
            let model = vc.build()?;
            let grid = TimeGrid::new(vc.window, vol_count(cfg.horizon())?)?;
            let d = sim_vol_env(&model, grid, seed).map_err(|e| Failure::at_stage(e, SIMULATION))?;
            let b = d.env.brownian.subsample(model.refine)?;
            write_paths_csv(create(&path)?, "volatility", seed, &[&b, &d.x, &d.y])?;
        }
    }
    Ok(path)
}

/// Estimates from a `paths.csv`; writes one `estimate_<kind>.json` per
/// estimator.
pub fn estimate(cfg: &CliConfig, paths: &Path, out: &Path) -> Result<Vec<(PathBuf, EstimateRecord<f64>)>, Failure> {
    let file = fs::File::open(paths).map_err(|e| Failure::io(paths, e))?;
    let table = read_paths_csv::<f64, _>(BufReader::new(file))?;
    if table.model != cfg.model.label() {
        return Err(Failure::config(format!(
            "{} holds {} data but the config describes the {} model",
            paths.display(),
            table.model,
            cfg.model.label()
        )));
    }
    let kinds = &cfg.estimators.kinds;
    let (qm, qb) = (&cfg.estimators.qmle, &cfg.estimators.qbe);
    let records = match &cfg.model {
        ModelConfig::Regression(rc) => {
            let model = rc.build()?;
            let data = RegressionPaths { l: table.path("L")?, u: table.path("U")?, y: table.path("Y")? };
            estimate_regression(&data, &model, kinds, qm, qb)
        }
        ModelConfig::Volatility(vc) => {
            let model = vc.build()?;
            let brownian = match table.path("B") {
                Ok(b) => b,
                Err(_) => SamplePath::scalar(table.grid, vec![0.0; table.grid.n_points()], table.seed, "B")?,
            };
            let data = VolData { env: VolEnvironment { seed: table.seed, brownian }, x: table.path("X")?, y: table.path("Y")? };
            estimate_volatility(&data, &model, kinds, qm, qb)
        }
    }
    .map_err(|e| Failure::at_stage(e, ESTIMATION))?;
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    records
        .into_iter()
        .map(|rec| {
            let path = out.join(format!("estimate_{}.json", rec.kind.label()));
            fs::write(&path, rec.to_json()? + "\n").map_err(|e| Failure::io(&path, e))?;
            Ok((path, rec))
        })
        .collect()
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.5}")).collect();
    format!("[{}]", parts.join(", "))
}

pub fn print_estimates(recs: &[(PathBuf, EstimateRecord<f64>)]) {
    println!("{:<4} {:<24} {:<24} {:<9}", "est", "theta_hat", "u_hat", "boundary");
    for (_, r) in recs {
        println!("{:<4} {:<24} {:<24} {:<9}", r.kind.label(), fmt_vec(&r.theta_hat), fmt_vec(&r.u_hat), r.boundary_flag);
    }
}

pub fn mc(cfg: &CliConfig, out: &Path) -> Result<Vec<McReport>, Failure> {
    let reports = mc_estimate(&cfg.experiment())?;
    for r in &reports {
        write_report(r, out)?;
    }
    Ok(reports)
}

pub fn print_summaries(reports: &[McReport]) {
    println!(
        "{:<11} {:>8} {:<4} {:>6} {:>8} {:>24} {:>24} {:>8}",
        "model", "horizon", "est", "n_ok", "fail", "mean_u", "cov_u", "ks_p"
    );
    for r in reports {
        let s = &r.summary;
        for e in &s.estimators {
            let ks: Vec<String> =
                e.ks.iter().map(|k| k.as_ref().map_or("-".to_string(), |k| format!("{:.3}", k.p_value))).collect();
            println!(
                "{:<11} {:>8} {:<4} {:>6} {:>8.4} {:>24} {:>24} {:>8}",
                s.model,
                s.horizon,
                e.kind.label(),
                e.n_ok,
                s.failure_rate,
                fmt_vec(&e.mean_u),
                fmt_vec(&e.cov_u),
                ks.join("/")
            );
        }
    }
}

pub fn check_b1_cmd(alpha: f64, rho: f64, set: B1Set, out: Option<&Path>) -> Result<bool, Failure> {
    let report = check_b1(&B1Params::family(set, alpha, rho))?;
    println!("{:<36} {:>12} {:>12}  result", "constraint", "lhs", "rhs");
    for c in &report.constraints {
        println!("{:<36} {:>12.6} {:>12.6}  {}", c.name, c.lhs, c.rhs, if c.pass { "PASS" } else { "FAIL" });
    }
    println!("overall: {}", if report.pass { "PASS" } else { "FAIL" });
    if let Some(path) = out {
        report.write_csv(create(path)?)?;
    }
    Ok(report.pass)
}

pub fn check_rosenthal(cfg: &RosenthalConfig, out: Option<&Path>) -> Result<(), Failure> {
    let rows = rosenthal_mc_check(cfg)?;
    println!("{:>6} {:>12} {:>12} {:>10} {:>8}", "n", "lhs", "bracket", "ratio", "ratio/r0");
    let r0 = rows.first().map_or(1.0, |r| r.ratio);
    for r in &rows {
        println!("{:>6} {:>12.4} {:>12.4} {:>10.5} {:>8.3}", r.n, r.lhs, r.bracket, r.ratio, r.ratio / r0);
    }
    if let Some(path) = out {
        write_rosenthal_csv(&rows, create(path)?)?;
    }
    Ok(())
}

pub fn check_psi(cfg: &CliConfig, horizons: &[f64], n_env: usize, out: Option<&Path>) -> Result<(), Failure> {
    let ModelConfig::Regression(rc) = &cfg.model else {
        return Err(Failure::config("the localization check applies to the regression model"));
    };
    let model = rc.build()?;
    let pc = cfg.experiment.psi.clone().unwrap_or_default();
    println!("{:>8} {:>6} {:>10} {:>10}", "T", "envs", "psi=0", "threshold");
    for &t in horizons {
        let res = psi_study(&model, t, n_env, &pc, cfg.seed())?;
        println!("{t:>8} {n_env:>6} {:>10.4} {:>10.4}", zero_fraction(&res), res[0].threshold);
        if let Some(dir) = out {
            fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
            write_psi_csv(&res, create(&dir.join(format!("psi_h{t}.csv")))?)?;
        }
    }
    Ok(())
}

pub fn check_pld(cfg: &CliConfig, pld: &PldConfig, out: Option<&Path>) -> Result<(), Failure> {
    let ModelConfig::Regression(rc) = &cfg.model else {
        return Err(Failure::config("the tail check applies to the regression model"));
    };
    let model = rc.build()?;
    let report = pld_tail_mc(&model, pld)?;
    println!("{:>5} {:>12} {:>10} {:>10} {:>6}", "r", "threshold", "prob", "se", "n_eff");
    for r in &report.rows {
        println!("{:>5} {:>12.4e} {:>10.5} {:>10.5} {:>6}", r.r, r.threshold, r.prob, r.se, r.n_eff);
    }
    match report.loglog_slope() {
        Some(s) => println!("log-log slope: {s:.3}"),
        None => println!("log-log slope: undefined (fewer than two positive probabilities)"),
    }
    if let Some(path) = out {
        report.write_csv(create(path)?)?;
    }
    Ok(())
}

pub fn check_laq(cfg: &LaqStudyConfig, out: Option<&Path>) -> Result<(), Failure> {
    let rows = laq_shrink_study(cfg)?;
    println!("{:>8} {:>12} {:>12} {:>12}", "T", "median", "q25", "q75");
    for r in &rows {
        println!("{:>8} {:>12.5} {:>12.5} {:>12.5}", r.horizon, r.median, r.q25, r.q75);
    }
    if let Some(path) = out {
        let mut f = create(path)?;
        let w = |e: std::io::Error| Failure::io(path, e);
        writeln!(f, "horizon,median,q25,q75").map_err(w)?;
        for r in &rows {
            writeln!(f, "{},{},{},{}", r.horizon, r.median, r.q25, r.q75).map_err(w)?;
        }
    }
    Ok(())
}

fn report_pairs(input: &Path) -> Result<Vec<(PathBuf, PathBuf)>, Failure> {
    let mut pairs = Vec::new();
    let entries = fs::read_dir(input).map_err(|e| Failure::io(input, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Failure::io(input, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(stem) = name.strip_prefix("rows_").and_then(|n| n.strip_suffix(".csv")) {
            let summary = input.join(format!("summary_{stem}.json"));
            if summary.exists() {
                pairs.push((path.clone(), summary));
            }
        }
    }
    pairs.sort();
    Ok(pairs)
}

fn read_pld_points(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.starts_with("r,") || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| Failure::config(format!("{}:{}: bad number {s:?}", path.display(), i + 1)));
        if f.len() < 3 {
            return Err(Failure::config(format!("{}:{}: expected r,threshold,prob,...", path.display(), i + 1)));
        }
        let (r, p) = (parse(f[0])?, parse(f[2])?);
        if r > 0.0 && p > 0.0 {
            pts.push((r, p));
        }
    }
    Ok(pts)
}

/// Renders every report under `input` (histogram and QQ plot of each
/// studentized coordinate per estimator), plus the tail-decay plot when a
/// PLD CSV is given. Returns the written files.
pub fn report(input: &Path, out: &Path, pld: Option<&Path>) -> Result<Vec<PathBuf>, Failure> {
    let pairs = report_pairs(input)?;
    if pairs.is_empty() && pld.is_none() {
        return Err(Failure::config(format!("no rows_*.csv / summary_*.json pairs in {}", input.display())));
    }
    fs::create_dir_all(out).map_err(|e| Failure::io(out, e))?;
    let mut written = Vec::new();
    let mut save = |name: String, svg: String| -> Result<(), Failure> {
        let path = out.join(name);
        fs::write(&path, svg).map_err(|e| Failure::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    let mut reports = Vec::new();
    for (rows, summary) in &pairs {
        let rep = load_report(rows, summary)?;
        let stem = pqla::experiments::report_stem(&rep.summary);
        for e in &rep.summary.estimators {
            let z = rep.studentized(e.kind)?;
            if z.is_empty() {
                continue;
            }
            for k in 0..rep.summary.dim {
                let col: Vec<f64> = z.iter().map(|v| v[k]).collect();
                let title = format!("{} {} coordinate {}", stem, e.kind.label(), k + 1);
                save(format!("hist_{stem}_{}_{}.svg", e.kind.label(), k + 1), histogram_svg(&col, 30, &title))?;
                save(format!("qq_{stem}_{}_{}.svg", e.kind.label(), k + 1), qq_svg(&col, &title))?;
            }
            if z.len() >= 100 {
                for n in normality_test(&rep, e.kind, 0.01)? {
                    println!(
                        "{stem} {} coordinate {}: KS D={:.4} p={:.4} {}",
                        e.kind.label(),
                        n.coordinate + 1,
                        n.ks.statistic,
                        n.ks.p_value,
                        if n.pass { "PASS" } else { "FAIL" }
                    );
                }
            }
        }
        reports.push(rep);
    }
    if !reports.is_empty() {
        print_summaries(&reports);
    }
    if let Some(p) = pld {
        let pts = read_pld_points(p)?;
        save("pld_tail.svg".into(), loglog_svg(&pts, "PLD tail", "r", "P[sup Z >= threshold]"))?;
    }
    Ok(written)
}
