//! CSV exchange format for sample paths:
//!
//! ```text
//! # seed=<u64> model=<name> T=<f> n=<int>
//! t,<label_0>,...,<label_k>
//! ```
//!
//! Floats use Rust's shortest round-trip representation.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::process_sim::{SamplePath, TimeGrid};
use crate::scalar::Real;

/// Paths read back from CSV, keyed by column label.
#[derive(Clone, Debug, PartialEq)]
pub struct PathTable<T> {
    pub seed: u64,
    pub model: String,
    pub grid: TimeGrid<T>,
    pub columns: Vec<(String, Vec<T>)>,
}

impl<T: Real> PathTable<T> {
    pub fn column(&self, label: &str) -> Result<&[T]> {
        self.columns
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
            .ok_or_else(|| Error::Format(format!("missing column {label}")))
    }

    pub fn path(&self, label: &str) -> Result<SamplePath<T>> {
        SamplePath::scalar(self.grid, self.column(label)?.to_vec(), self.seed, label)
    }
}

fn column_labels<T: Real>(p: &SamplePath<T>) -> Vec<String> {
    if p.dim == 1 {
        vec![p.label.clone()]
    } else {
        (0..p.dim).map(|d| format!("{}_{d}", p.label)).collect()
    }
}

pub fn write_paths_csv<T: Real, W: Write>(mut w: W, model: &str, seed: u64, paths: &[&SamplePath<T>]) -> Result<()> {
    let first = paths.first().ok_or_else(|| Error::InvalidArgument("no paths to write".into()))?;
    let grid = first.grid;
    if paths.iter().any(|p| p.grid != grid) {
        return Err(Error::InvalidArgument("paths must share one grid".into()));
    }
    writeln!(w, "# seed={seed} model={model} T={} n={}", grid.horizon(), grid.n_steps())?;
    let mut header = vec!["t".to_string()];
    for p in paths {
        header.extend(column_labels(p));
    }
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for j in 0..grid.n_points() {
        line.clear();
        line.push_str(&grid.time(j).to_string());
        for p in paths {
            for v in p.at(j) {
                line.push(',');
                line.push_str(&v.to_string());
            }
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

fn parse_meta(line: &str) -> Result<(u64, String, String, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("first line must be the '# seed=... model=... T=... n=...' comment".into()))?;
    let (mut seed, mut model, mut horizon, mut n) = (None, None, None, None);
    for tok in body.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad metadata token {tok}")))?;
        match k {
            "seed" => seed = Some(v.parse::<u64>().map_err(|e| Error::Format(format!("seed: {e}")))?),
            "model" => model = Some(v.to_string()),
            "T" => horizon = Some(v.to_string()),
            "n" => n = Some(v.parse::<usize>().map_err(|e| Error::Format(format!("n: {e}")))?),
            _ => return Err(Error::Format(format!("unknown metadata key {k}"))),
        }
    }
    match (seed, model, horizon, n) {
        (Some(s), Some(m), Some(t), Some(n)) => Ok((s, m, t, n)),
        _ => Err(Error::Format("metadata must contain seed, model, T and n".into())),
    }
}

fn parse_float<T: Real>(s: &str, row: usize) -> Result<T> {
    s.trim()
        .parse::<T>()
        .map_err(|_| Error::Format(format!("line {row}: cannot parse '{s}' as a number")))
}

pub fn read_paths_csv<T: Real, R: BufRead>(r: R) -> Result<PathTable<T>> {
    let mut lines = r.lines();
    let meta = lines.next().ok_or_else(|| Error::Format("empty file".into()))??;
    let (seed, model, horizon, n) = parse_meta(&meta)?;
    let header = lines.next().ok_or_else(|| Error::Format("missing header row".into()))??;
    let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if labels.first().map(String::as_str) != Some("t") || labels.len() < 2 {
        return Err(Error::Format("header must start with 't' and name at least one column".into()));
    }
    let mut columns: Vec<Vec<T>> = vec![Vec::with_capacity(n + 1); labels.len() - 1];
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != labels.len() {
            return Err(Error::Format(format!("line {}: expected {} fields, got {}", i + 3, labels.len(), fields.len())));
        }
        for (c, f) in columns.iter_mut().zip(&fields[1..]) {
            c.push(parse_float(f, i + 3)?);
        }
        rows += 1;
    }
    if rows != n + 1 {
        return Err(Error::Format(format!("expected {} rows, found {rows}", n + 1)));
    }
    let grid = TimeGrid::new(parse_float::<T>(&horizon, 1)?, n)?;
    Ok(PathTable { seed, model, grid, columns: labels[1..].iter().cloned().zip(columns).collect() })
}
