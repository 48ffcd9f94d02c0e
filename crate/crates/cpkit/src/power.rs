// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo power grids over (series length, effect size, changepoint
//! count) and the derived minimum-effect-size guideline table.
//!
//! Each grid cell gets its own derived master seed, and each replicate
//! inside a cell its own noise stream, so the table is a pure function of
//! `(GridSpec, master_seed)` regardless of worker count or scheduling.

use crate::detect::{pelt, select_bic, DetectorConfig, Method};
use crate::error::Error;
use crate::rng::{self, stream, word};
use crate::simulate::{gen_series, true_breakpoints, ScenarioSpec, SeedSpec};
use rayon::prelude::*;

/// Shortest true segment a cell may place and still count as a meaningful
/// detection target; anything shorter is reported "Not feasible".
const MIN_TRUE_SEG: usize = 3;

/// Full factorial simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub n_values: Vec<usize>,
    pub es_values: Vec<f64>,
    pub k_values: Vec<usize>,
    pub reps: usize,
    pub phi: f64,
    pub detector: Method,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_values: vec![10, 15, 18, 20, 30, 50],
            es_values: vec![0.5, 1.0, 1.5, 2.0, 3.0, 5.0],
            k_values: vec![1, 2, 3],
            reps: 200,
            phi: 0.0,
            detector: Method::BinsegBic,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_values.is_empty() || self.es_values.is_empty() || self.k_values.is_empty() {
            return Err(Error::argument("grid axes must be non-empty"));
        }
        if self.reps == 0 {
            return Err(Error::argument("reps must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.phi) {
            return Err(Error::argument(format!(
                "phi must be in [0, 1), got {}",
                self.phi
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.n_values.len() * self.es_values.len() * self.k_values.len()
    }
}

/// Aggregated Monte Carlo outcomes of one feasible cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    /// Percent of replicates with K-hat = K_true.
    pub pct_correct_k: f64,
    /// Percent with K-hat = K_true and every location inside tolerance.
    pub pct_correct_k_and_loc: f64,
    pub mean_k_hat: f64,
    /// Percent with K-hat < K_true.
    pub under_rate: f64,
    /// Percent with K-hat > K_true.
    pub over_rate: f64,
}

/// One cell of the power grid; `stats` is `None` for infeasible designs.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCell {
    pub n: usize,
    pub effect_size: f64,
    pub k_true: usize,
    pub stats: Option<CellStats>,
}

impl PowerCell {
    pub fn is_feasible(&self) -> bool {
        self.stats.is_some()
    }
}

/// Complete grid results plus the run metadata needed to reproduce them.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerTable {
    pub detector: Method,
    pub phi: f64,
    pub reps: usize,
    pub master_seed: u64,
    pub cells: Vec<PowerCell>,
}

impl PowerTable {
    pub fn cell(&self, n: usize, effect_size: f64, k_true: usize) -> Option<&PowerCell> {
        self.cells
            .iter()
            .find(|c| c.n == n && c.effect_size == effect_size && c.k_true == k_true)
    }
}

/// Location tolerance `max(2, floor(n / 10))` in time steps.
pub fn location_tolerance(n: usize) -> Result<usize, Error> {
    if n < 2 {
        return Err(Error::argument("n must be >= 2"));
    }
    Ok((n / 10).max(2))
}

/// Whether sorted `detected` pairs index-wise with sorted `truth` within
/// `tol` steps everywhere. Both inputs must have the same length.
pub fn match_locations(detected: &[usize], truth: &[usize], tol: usize) -> Result<bool, Error> {
    if detected.len() != truth.len() {
        return Err(Error::argument(format!(
            "location match needs equal counts, got {} vs {}",
            detected.len(),
            truth.len()
        )));
    }
    let mut d: Vec<usize> = detected.to_vec();
    let mut t: Vec<usize> = truth.to_vec();
    d.sort_unstable();
    t.sort_unstable();
    Ok(d.iter().zip(&t).all(|(&a, &b)| a.abs_diff(b) <= tol))
}

/// A cell is feasible when every placed true segment has at least
/// [`MIN_TRUE_SEG`] observations.
pub fn cell_feasible(n: usize, k_true: usize) -> bool {
    let bps = true_breakpoints(n, k_true);
    let mut prev = 0usize;
    for &b in bps.iter().chain(std::iter::once(&n)) {
        if b < prev + MIN_TRUE_SEG {
            return false;
        }
        prev = b;
    }
    true
}

fn detect_k_hat(
    series: &crate::series::TimeSeries,
    detector: Method,
    oracle_sigma: f64,
    cfg: &DetectorConfig,
) -> Result<Vec<usize>, Error> {
    let result = match detector {
        Method::BinsegBic => select_bic(series, cfg)?,
        // The simulation studies give PELT the scenario's known noise scale;
        // empirical runs estimate it instead (see `pelt_auto`).
        Method::Pelt => {
            let penalty = 2.0 * oracle_sigma * oracle_sigma * (series.len() as f64).ln();
            pelt(series, penalty, cfg)?
        }
    };
    Ok(result.breakpoints().to_vec())
}

/// Monte Carlo evaluation of one design cell.
pub fn run_cell(
    spec: &ScenarioSpec,
    reps: usize,
    detector: Method,
    cell_seed: u64,
) -> Result<PowerCell, Error> {
    if reps == 0 {
        return Err(Error::argument("reps must be >= 1"));
    }
    let shell = PowerCell {
        n: spec.n,
        effect_size: spec.effect_size,
        k_true: spec.n_bkps,
        stats: None,
    };
    if !cell_feasible(spec.n, spec.n_bkps) {
        return Ok(shell);
    }
    spec.validate()?;
    let cfg = DetectorConfig::default();
    let tol = location_tolerance(spec.n)?;
    let truth = true_breakpoints(spec.n, spec.n_bkps);

    let (correct, correct_loc, under, k_sum) = (0..reps)
        .into_par_iter()
        .map(|rep| -> Result<(u64, u64, u64, u64), Error> {
            let (series, _) = gen_series(spec, SeedSpec::new(cell_seed, rep as u64))?;
            let detected = detect_k_hat(&series, detector, spec.sigma, &cfg)?;
            let k_hat = detected.len();
            let correct = k_hat == spec.n_bkps;
            let loc_ok = correct && match_locations(&detected, &truth, tol)?;
            Ok((
                u64::from(correct),
                u64::from(loc_ok),
                u64::from(k_hat < spec.n_bkps),
                k_hat as u64,
            ))
        })
        .try_reduce(
            || (0, 0, 0, 0),
            |a, b| Ok((a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3)),
        )?;

    let pct = |count: u64| 100.0 * count as f64 / reps as f64;
    let over = reps as u64 - correct - under;
    Ok(PowerCell {
        stats: Some(CellStats {
            pct_correct_k: pct(correct),
            pct_correct_k_and_loc: pct(correct_loc),
            mean_k_hat: k_sum as f64 / reps as f64,
            under_rate: pct(under),
            over_rate: pct(over),
        }),
        ..shell
    })
}

/// Derived master seed of a grid cell, a pure function of the cell's
/// coordinates so both detectors and any execution order see the same data.
pub fn cell_seed(master_seed: u64, n: usize, effect_size: f64, k_true: usize, phi: f64) -> u64 {
    rng::derive_seed(
        master_seed,
        &[stream::CELL, n as u64, word(effect_size), k_true as u64, word(phi)],
    )
}

/// Evaluate the full grid. `workers = 0` uses the global thread pool;
/// results are identical for every worker count.
pub fn run_grid(grid: &GridSpec, master_seed: u64, workers: usize) -> Result<PowerTable, Error> {
    grid.validate()?;
    let coords: Vec<(usize, f64, usize)> = grid
        .n_values
        .iter()
        .flat_map(|&n| {
            grid.es_values
                .iter()
                .flat_map(move |&es| grid.k_values.iter().map(move |&k| (n, es, k)))
        })
        .collect();

    let eval = |coords: &[(usize, f64, usize)]| -> Result<Vec<PowerCell>, Error> {
        coords
            .par_iter()
            .map(|&(n, es, k)| {
                let spec = ScenarioSpec::new(n, es, k).with_phi(grid.phi);
                run_cell(
                    &spec,
                    grid.reps,
                    grid.detector,
                    cell_seed(master_seed, n, es, k, grid.phi),
                )
            })
            .collect()
    };

    let cells = if workers == 0 {
        eval(&coords)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::argument(e.to_string()))?;
        pool.install(|| eval(&coords))?
    };

    Ok(PowerTable {
        detector: grid.detector,
        phi: grid.phi,
        reps: grid.reps,
        master_seed,
        cells,
    })
}

/// Categorical outcome of one guideline row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Guideline {
    /// Smallest tested effect size reaching the power threshold.
    MinEffect(f64),
    /// No tested effect size reached the threshold.
    AboveMax(f64),
    NotFeasible,
}

impl std::fmt::Display for Guideline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Guideline::MinEffect(es) => write!(f, "{es:.1}"),
            Guideline::AboveMax(max) => write!(f, ">{max:.1}"),
            Guideline::NotFeasible => write!(f, "Not feasible"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidelineRow {
    pub n: usize,
    pub k_true: usize,
    pub outcome: Guideline,
}

/// Per (n, K): smallest tested effect size whose correct-K power meets
/// `threshold` percent.
pub fn derive_guidelines(table: &PowerTable, threshold: f64) -> Result<Vec<GuidelineRow>, Error> {
    let mut ns: Vec<usize> = table.cells.iter().map(|c| c.n).collect();
    ns.dedup();
    let mut ks: Vec<usize> = table.cells.iter().map(|c| c.k_true).collect();
    ks.sort_unstable();
    ks.dedup();

    let mut rows = Vec::new();
    for &n in &ns {
        for &k in &ks {
            let mut col: Vec<&PowerCell> = table
                .cells
                .iter()
                .filter(|c| c.n == n && c.k_true == k)
                .collect();
            if col.is_empty() {
                return Err(Error::argument(format!(
                    "table has no cells for n = {n}, k = {k}"
                )));
            }
            col.sort_by(|a, b| a.effect_size.partial_cmp(&b.effect_size).unwrap());
            let outcome = if col.iter().any(|c| !c.is_feasible()) {
                Guideline::NotFeasible
            } else {
                match col
                    .iter()
                    .find(|c| c.stats.unwrap().pct_correct_k >= threshold)
                {
                    Some(c) => Guideline::MinEffect(c.effect_size),
                    None => Guideline::AboveMax(col.last().unwrap().effect_size),
                }
            };
            rows.push(GuidelineRow {
                n,
                k_true: k,
                outcome,
            });
        }
    }
    Ok(rows)
}

const CSV_HEADER: &str = "n,effect_size,k_true,detector,phi,reps,pct_correct_k,\
pct_correct_k_and_loc,under_rate,over_rate,master_seed,mean_k_hat";

impl PowerTable {
    /// Serialize to CSV. Infeasible cells carry `NA` in every statistic
    /// column; float formatting is shortest-round-trip so parsing the output
    /// reproduces the table exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let stats = match &c.stats {
                Some(s) => format!(
                    "{},{},{},{},{}",
                    s.pct_correct_k, s.pct_correct_k_and_loc, s.under_rate, s.over_rate, s.mean_k_hat
                ),
                None => "NA,NA,NA,NA,NA".to_string(),
            };
            let (head, tail) = stats.rsplit_once(',').expect("five stat fields");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.n, c.effect_size, c.k_true, self.detector, self.phi, self.reps, head,
                self.master_seed, tail
            ));
        }
        out
    }

    /// Parse a CSV produced by [`PowerTable::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header == CSV_HEADER => {}
            _ => return Err(Error::argument("missing or unexpected power-table header")),
        }

        fn field<T: std::str::FromStr>(s: &str, line: usize, name: &str) -> Result<T, Error> {
            s.parse().map_err(|_| {
                Error::argument(format!("line {line}: bad {name} value {s:?}"))
            })
        }

        let mut meta: Option<(Method, f64, usize, u64)> = None;
        let mut cells = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 12 {
                return Err(Error::argument(format!(
                    "line {lineno}: expected 12 columns, got {}",
                    cols.len()
                )));
            }
            let detector = match cols[3] {
                "binseg_bic" => Method::BinsegBic,
                "pelt" => Method::Pelt,
                other => {
                    return Err(Error::argument(format!(
                        "line {lineno}: unknown detector {other:?}"
                    )))
                }
            };
            let row_meta = (
                detector,
                field::<f64>(cols[4], lineno, "phi")?,
                field::<usize>(cols[5], lineno, "reps")?,
                field::<u64>(cols[10], lineno, "master_seed")?,
            );
            match &meta {
                None => meta = Some(row_meta),
                Some(m) if *m == row_meta => {}
                Some(_) => {
                    return Err(Error::argument(format!(
                        "line {lineno}: inconsistent table metadata"
                    )))
                }
            }
            let stat_cols = [cols[6], cols[7], cols[8], cols[9], cols[11]];
            let stats = if stat_cols.iter().all(|&s| s == "NA") {
                None
            } else {
                Some(CellStats {
                    pct_correct_k: field(cols[6], lineno, "pct_correct_k")?,
                    pct_correct_k_and_loc: field(cols[7], lineno, "pct_correct_k_and_loc")?,
                    under_rate: field(cols[8], lineno, "under_rate")?,
                    over_rate: field(cols[9], lineno, "over_rate")?,
                    mean_k_hat: field(cols[11], lineno, "mean_k_hat")?,
                })
            };
            cells.push(PowerCell {
                n: field(cols[0], lineno, "n")?,
                effect_size: field(cols[1], lineno, "effect_size")?,
                k_true: field(cols[2], lineno, "k_true")?,
                stats,
            });
        }
        let (detector, phi, reps, master_seed) =
            meta.ok_or_else(|| Error::argument("power-table CSV has no rows"))?;
        Ok(PowerTable {
            detector,
            phi,
            reps,
            master_seed,
            cells,
        })
    }
}
