// SPDX-License-Identifier: MIT OR Apache-2.0

//! `key = value` run-configuration files for the grid runner.
//!
//! Recognized keys mirror the grid/detector settings: `n_values`,
//! `es_values`, `k_values`, `reps`, `phi`, `detector`, `master_seed`,
//! `out_csv`, `svg_prefix`. Lists are comma-separated; `#` starts a comment.
//! Unknown keys are rejected rather than ignored so typos cannot silently
//! fall back to defaults.

use crate::errors::CliError;
use cpkit::power::GridSpec;
use cpkit::Method;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub master_seed: Option<u64>,
    pub out_csv: Option<PathBuf>,
    pub svg_prefix: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            master_seed: None,
            out_csv: None,
            svg_prefix: None,
        }
    }
}

fn parse_list<T: std::str::FromStr>(value: &str, lineno: usize, key: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::input(format!("line {lineno}: bad {key} entry {s:?}")))
        })
        .collect()
}

fn parse_scalar<T: std::str::FromStr>(value: &str, lineno: usize, key: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::input(format!("line {lineno}: bad {key} value {value:?}")))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "{}: line {lineno}: expected key = value",
                    path.display()
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n_values" => cfg.grid.n_values = parse_list(value, lineno, key)?,
                "es_values" => cfg.grid.es_values = parse_list(value, lineno, key)?,
                "k_values" => cfg.grid.k_values = parse_list(value, lineno, key)?,
                "reps" => cfg.grid.reps = parse_scalar(value, lineno, key)?,
                "phi" => cfg.grid.phi = parse_scalar(value, lineno, key)?,
                "detector" => {
                    cfg.grid.detector = match value {
                        "binseg_bic" | "binseg" => Method::BinsegBic,
                        "pelt" => Method::Pelt,
                        other => {
                            return Err(CliError::input(format!(
                                "line {lineno}: unknown detector {other:?}"
                            )))
                        }
                    }
                }
                "master_seed" => cfg.master_seed = Some(parse_scalar(value, lineno, key)?),
                "out_csv" => cfg.out_csv = Some(PathBuf::from(value)),
                "svg_prefix" => cfg.svg_prefix = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::input(format!(
                        "{}: line {lineno}: unknown key {other:?}",
                        path.display()
                    )))
                }
            }
        }
        cfg.grid.validate()?;
        Ok(cfg)
    }
}
