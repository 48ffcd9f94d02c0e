// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series CSV ingestion and atomic file output.

use crate::errors::CliError;
use cpkit::TimeSeries;
use std::io::Write;
use std::path::Path;

/// Parse a two-column `time,value` CSV into a series. A non-numeric first
/// line is treated as the header. With `aggregate_mean`, rows sharing a time
/// label are averaged (multi-site inputs); otherwise labels must be strictly
/// increasing.
pub fn read_series(path: &Path, aggregate_mean: bool) -> Result<TimeSeries, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split(',');
        let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(CliError::input(format!(
                "{}: line {lineno}: expected exactly 2 columns",
                path.display()
            )));
        };
        let parsed = t.trim().parse::<f64>().and_then(|tt| {
            v.trim().parse::<f64>().map(|vv| (tt, vv))
        });
        match parsed {
            Ok(pair) => {
                if !pair.0.is_finite() || !pair.1.is_finite() {
                    return Err(CliError::input(format!(
                        "{}: line {lineno}: non-finite value",
                        path.display()
                    )));
                }
                rows.push(pair);
            }
            Err(_) if lineno == 1 => continue, // header row
            Err(_) => {
                return Err(CliError::input(format!(
                    "{}: line {lineno}: non-numeric row {line:?}",
                    path.display()
                )))
            }
        }
    }
    if aggregate_mean {
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, usize)> = Vec::new();
        let mut labels = Vec::new();
        for (t, v) in rows {
            match labels.last() {
                Some(&last) if last == t => {
                    let slot = merged.last_mut().unwrap();
                    slot.0 += v;
                    slot.1 += 1;
                }
                _ => {
                    labels.push(t);
                    merged.push((v, 1));
                }
            }
        }
        let values = merged.iter().map(|(s, c)| s / *c as f64).collect();
        TimeSeries::with_labels(values, labels)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    } else {
        let (labels, values) = rows.into_iter().unzip();
        TimeSeries::with_labels(values, labels)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

/// Whole-file atomic write: contents land in a temporary sibling first and
/// are renamed into place.
pub fn atomic_write(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError::output(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::Builder::new()
        .prefix(".cpkit-tmp")
        .tempfile_in(dir)
        .map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.flush().map_err(fail)?;
    tmp.persist(path)
        .map_err(|e| CliError::output(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Render an f64 time label without a trailing `.0` for integral values.
pub fn fmt_label(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}
