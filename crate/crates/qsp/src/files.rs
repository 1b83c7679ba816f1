//! On-disk formats. CSV files always start with a header row; run records
//! are JSON lines.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use qsp_core::qgan::TrainedGenerator;
use qsp_core::scenarios::{ScenarioGrid, TestScenarioSet};

use crate::error::{CliError, CliResult};

pub fn samples_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("samples_{k:02}.csv"))
}

pub fn dist_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("dist_{k:02}.csv"))
}

pub fn test_set_path(dir: &Path) -> PathBuf {
    dir.join("test_set.csv")
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Write `header` then `rows` as CSV.
pub fn write_csv<R, I>(path: &Path, header: &[String], rows: I) -> CliResult<()>
where
    R: IntoIterator<Item = String>,
    I: IntoIterator<Item = R>,
{
    if let Some(parent) = path.parent() {
        ensure_dir(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::format(path, e))?;
    w.write_record(header).map_err(|e| CliError::format(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::format(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Numeric columns of a CSV file, checked against the expected header.
pub fn read_columns(path: &Path, header: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    })?;
    let found = r.headers().map_err(|e| CliError::format(path, e))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(CliError::format(path, format!("expected header {header:?}")));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for rec in r.records() {
        let rec = rec.map_err(|e| CliError::format(path, e))?;
        for (col, field) in cols.iter_mut().zip(rec.iter()) {
            col.push(field.trim().parse::<f64>().map_err(|e| CliError::format(path, e))?);
        }
    }
    Ok(cols)
}

pub fn write_samples(path: &Path, values: &[f64]) -> CliResult<()> {
    write_csv(path, &["value".into()], values.iter().map(|v| [v.to_string()]))
}

pub fn read_samples(path: &Path) -> CliResult<Vec<f64>> {
    Ok(read_columns(path, &["value"])?.remove(0))
}

pub fn write_distribution(path: &Path, xi: &[f64], probs: &[f64]) -> CliResult<()> {
    write_csv(
        path,
        &["xi".into(), "prob".into()],
        xi.iter().zip(probs).map(|(x, p)| [x.to_string(), p.to_string()]),
    )
}

pub fn read_grid(path: &Path) -> CliResult<ScenarioGrid> {
    let mut cols = read_columns(path, &["xi", "prob"])?;
    let probs = cols.pop().expect("two columns");
    let xi = cols.pop().expect("two columns");
    Ok(ScenarioGrid { xi, probs })
}

pub fn read_test_set(path: &Path) -> CliResult<TestScenarioSet> {
    let grid = read_grid(path)?;
    let total: f64 = grid.probs.iter().sum();
    if grid.xi.is_empty() || (total - 1.0).abs() > 1e-9 || grid.probs.iter().any(|&p| p < 0.0) {
        return Err(CliError::format(path, "test set weights must be non-negative and sum to 1"));
    }
    Ok(TestScenarioSet {
        xi: grid.xi,
        probs: grid.probs,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

pub fn read_generator(path: &Path) -> CliResult<TrainedGenerator> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> CliResult<()> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| CliError::format(path, e))?;
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&out).map_err(|e| CliError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> CliResult<Vec<T>> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut items = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CliError::format(path, format!("line {}: {e}", n + 1)))?;
        items.push(item);
    }
    Ok(items)
}
