//! File plumbing: CSV datasets, label extraction, JSON reports, plot TSV.
//!
//! CSV dialect: comma separator, `.` decimals, header row required, the
//! column named `label` is reserved for integer cluster labels and is
//! always the trailing column when written.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use unicluster_core::Dataset;

use crate::CliError;

fn io_err(path: &Path, what: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{what} {}: {detail}", path.display()))
}

/// Write `data` with headers `x0..x{d-1}` plus `label` when present.
pub fn write_csv(path: &Path, data: &Dataset) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, "cannot write", e))?;
    let mut header: Vec<String> = (0..data.d()).map(|j| format!("x{j}")).collect();
    if data.labels().is_some() {
        header.push("label".to_string());
    }
    w.write_record(&header)
        .map_err(|e| io_err(path, "cannot write", e))?;
    for (i, point) in data.points().enumerate() {
        let mut record: Vec<String> = point.iter().map(|v| v.to_string()).collect();
        if let Some(labels) = data.labels() {
            record.push(labels[i].to_string());
        }
        w.write_record(&record)
            .map_err(|e| io_err(path, "cannot write", e))?;
    }
    w.flush().map_err(|e| io_err(path, "cannot write", e))
}

/// Read a dataset: every column except `label` is a feature, in file
/// order; a `label` column is attached as labels.
pub fn read_csv(path: &Path) -> Result<Dataset, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_err(path, "cannot read", e))?;
    let headers = r
        .headers()
        .map_err(|e| io_err(path, "cannot parse", e))?
        .clone();
    let label_col = headers.iter().position(|h| h == "label");
    let d = headers.len() - usize::from(label_col.is_some());
    if d == 0 {
        return Err(io_err(path, "cannot parse", "no feature columns"));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record.map_err(|e| io_err(path, "cannot parse", e))?;
        if record.len() != headers.len() {
            return Err(io_err(
                path,
                "cannot parse",
                format!("row {row} has {} fields, header has {}", record.len(), headers.len()),
            ));
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_col {
                let label: i64 = field
                    .parse()
                    .map_err(|e| io_err(path, "cannot parse", format!("row {row} label: {e}")))?;
                labels.push(label);
            } else {
                let value: f64 = field.parse().map_err(|e| {
                    io_err(path, "cannot parse", format!("row {row} column {col}: {e}"))
                })?;
                values.push(value);
            }
        }
    }
    let data = Dataset::new(values, d).map_err(|e| io_err(path, "cannot parse", e))?;
    match label_col {
        Some(_) => data
            .with_labels(labels)
            .map_err(|e| io_err(path, "cannot parse", e)),
        None => Ok(data),
    }
}

/// Labels from a fit-report JSON (`labels` field) or a labeled CSV.
pub fn read_labels(path: &Path) -> Result<Vec<i64>, CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, "cannot read", e))?;
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| io_err(path, "cannot parse", e))?;
        let labels = value
            .get("labels")
            .and_then(|l| l.as_array())
            .ok_or_else(|| {
                CliError::Usage(format!("{}: no labels array in report", path.display()))
            })?;
        labels
            .iter()
            .map(|v| {
                v.as_i64().ok_or_else(|| {
                    CliError::Usage(format!("{}: non-integer label in report", path.display()))
                })
            })
            .collect()
    } else {
        let data = read_csv(path)?;
        data.labels()
            .map(|l| l.to_vec())
            .ok_or_else(|| CliError::Usage(format!("{}: no label column", path.display())))
    }
}

/// Serialize pretty JSON to `path`, or to stdout when `path` is None.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match path {
        Some(path) => {
            fs::write(path, text + "\n").map_err(|e| io_err(path, "cannot write", e))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Tab-separated `x y label` rows (first two features; y = 0 when d = 1).
pub fn write_plot_tsv(path: &Path, data: &Dataset, labels: &[i64]) -> Result<(), CliError> {
    let mut out = String::from("x\ty\tlabel\n");
    for (point, label) in data.points().zip(labels) {
        let y = point.get(1).copied().unwrap_or(0.0);
        out.push_str(&format!("{}\t{}\t{}\n", point[0], y, label));
    }
    fs::File::create(path)
        .and_then(|mut f| f.write_all(out.as_bytes()))
        .map_err(|e| io_err(path, "cannot write", e))
}
