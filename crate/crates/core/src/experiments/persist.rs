use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::experiments::mc::{summarize, McReport, McRow, McSummary};

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn header(p: usize) -> Vec<String> {
    let mut h = vec!["rep".to_string(), "estimator".into()];
    h.extend((1..=p).map(|k| format!("theta_hat_{k}")));
    h.extend((1..=p).map(|k| format!("u_hat_{k}")));
    h.extend(["psi", "boundary", "mass_logZ", "env_hash", "failed"].map(String::from));
    for a in 1..=p {
        for b in 1..=p {
            h.push(format!("gamma_T_{a}{b}"));
        }
    }
    h
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[McRow], p: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Format(e.to_string());
    wr.write_record(header(p)).map_err(io)?;
    for r in rows {
        let mut rec = vec![r.rep.to_string(), r.estimator.label().to_string()];
        rec.extend(r.theta_hat.iter().map(|v| v.to_string()));
        rec.extend(r.u_hat.iter().map(|v| v.to_string()));
        rec.push(r.psi.map(|b| u8::from(b).to_string()).unwrap_or_default());
        rec.push(u8::from(r.boundary).to_string());
        rec.push(fmt_opt(r.mass_log_z));
        rec.push(format!("{:016x}", r.env_hash));
        rec.push(u8::from(r.failed).to_string());
        rec.extend(r.gamma_t.iter().map(|v| v.to_string()));
        wr.write_record(&rec).map_err(io)?;
    }
    wr.flush()?;
    Ok(())
}

fn parse<T: std::str::FromStr>(s: &str, what: &str, line: usize) -> Result<T> {
    s.parse().map_err(|_| Error::Format(format!("line {line}: bad {what} {s:?}")))
}

fn parse_flag(s: &str, line: usize) -> Result<bool> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(Error::Format(format!("line {line}: bad flag {s:?}"))),
    }
}

pub fn read_rows_csv<R: std::io::Read>(r: R, p: usize) -> Result<Vec<McRow>> {
    let mut rd = csv::Reader::from_reader(r);
    let io = |e: csv::Error| Error::Format(e.to_string());
    let hdr: Vec<String> = rd.headers().map_err(io)?.iter().map(String::from).collect();
    if hdr != header(p) {
        return Err(Error::Format(format!("unexpected row header {hdr:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(io)?;
        let line = i + 2;
        let f: Vec<&str> = rec.iter().collect();
        let mut k = 0;
        let mut next = || {
            k += 1;
            f[k - 1]
        };
        let rep = parse(next(), "rep", line)?;
        let estimator: EstimatorKind = next().parse()?;
        let theta_hat = (0..p).map(|_| parse(next(), "theta_hat", line)).collect::<Result<_>>()?;
        let u_hat = (0..p).map(|_| parse(next(), "u_hat", line)).collect::<Result<_>>()?;
        let psi = match next() {
            "" => None,
            s => Some(parse_flag(s, line)?),
        };
        let boundary = parse_flag(next(), line)?;
        let mass_log_z = match next() {
            "" => None,
            s => Some(parse(s, "mass_logZ", line)?),
        };
        let env_hash = u64::from_str_radix(next(), 16).map_err(|_| Error::Format(format!("line {line}: bad env_hash")))?;
        let failed = parse_flag(next(), line)?;
        let gamma_t = (0..p * p).map(|_| parse(next(), "gamma_T", line)).collect::<Result<_>>()?;
        rows.push(McRow { rep, estimator, theta_hat, u_hat, psi, boundary, mass_log_z, env_hash, failed, gamma_t });
    }
    Ok(rows)
}

/// File stem shared by the rows and summary files of one report.
pub fn report_stem(summary: &McSummary) -> String {
    format!("{}_h{}", summary.model, summary.horizon)
}

/// Writes `rows_<stem>.csv` and `summary_<stem>.json` into `dir`.
pub fn write_report(report: &McReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let stem = report_stem(&report.summary);
    let rows_path = dir.join(format!("rows_{stem}.csv"));
    let summary_path = dir.join(format!("summary_{stem}.json"));
    write_rows_csv(&report.rows, report.summary.dim, fs::File::create(&rows_path)?)?;
    fs::write(&summary_path, serde_json::to_string_pretty(&report.summary)? + "\n")?;
    Ok((rows_path, summary_path))
}

/// Loads a persisted report and checks that the stored summary equals the
/// one recomputed from the rows.
pub fn load_report(rows_path: &Path, summary_path: &Path) -> Result<McReport> {
    let summary: McSummary = serde_json::from_str(&fs::read_to_string(summary_path)?)?;
    let rows = read_rows_csv(fs::File::open(rows_path)?, summary.dim)?;
    let recomputed = summarize(&rows, &summary)?;
    if serde_json::to_value(&recomputed)? != serde_json::to_value(&summary)? {
        return Err(Error::Format(format!(
            "summary {} does not match the statistics recomputed from {}",
            summary_path.display(),
            rows_path.display()
        )));
    }
    Ok(McReport { rows, summary })
}
