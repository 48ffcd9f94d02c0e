// SPDX-License-Identifier: MIT OR Apache-2.0

//! Permutation significance tests and bootstrap confidence intervals for
//! detected changepoints.
//!
//! The permutation test uses the BIC improvement of the selected model over
//! the no-changepoint model as its statistic and a full uniform shuffle as
//! its null. Note the shuffle also destroys autocorrelation, so the test is
//! anti-conservative for AR(1) data. The bootstrap resamples residuals of
//! the fixed-order piecewise fit and re-detects at the same order, giving a
//! location interval conditional on the model order.

use crate::detect::{binseg, select_bic, DetectorConfig};
use crate::error::Error;
use crate::rng::{self, stream};
use crate::series::TimeSeries;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

/// Outcome of a permutation test.
#[derive(Debug, Clone, Copy)]
pub struct PermutationReport {
    /// BIC(K = 0) minus the minimum BIC over all K; zero when K-hat = 0.
    pub observed_stat: f64,
    /// Add-one p-value: `(1 + #{permuted >= observed}) / (n_perm + 1)`.
    pub p_value: f64,
    pub n_perm: usize,
}

/// One changepoint's location interval in time-label units.
#[derive(Debug, Clone, Copy)]
pub struct CpInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Outcome of a fixed-order location bootstrap.
#[derive(Debug, Clone)]
pub struct BootstrapReport {
    /// Per ordered breakpoint, in time-label units.
    pub intervals: Vec<CpInterval>,
    pub n_boot: usize,
    pub level: f64,
    /// Resamples where detection could not place the full breakpoint count.
    pub skipped: usize,
}

fn delta_bic(trace: &[f64]) -> f64 {
    let min = trace.iter().cloned().fold(f64::INFINITY, f64::min);
    (trace[0] - min).max(0.0)
}

/// Permutation test of the no-changepoint null.
pub fn permutation_test(
    series: &TimeSeries,
    cfg: &DetectorConfig,
    n_perm: usize,
    master_seed: u64,
) -> Result<PermutationReport, Error> {
    if n_perm < 99 {
        return Err(Error::argument("n_perm must be >= 99"));
    }
    if cfg.feasible_k(series.len()) < 1 {
        return Err(Error::TooShort {
            need: 2 * cfg.min_seg_len,
            got: series.len(),
        });
    }
    let observed = delta_bic(
        select_bic(series, cfg)?
            .bic_trace
            .as_ref()
            .expect("binseg_bic result carries a trace"),
    );

    // Count ties with a small relative tolerance: permuted statistics that
    // equal the observed one in exact arithmetic can land an ulp on either
    // side, and the add-one p-value should not depend on that.
    let threshold = observed - 1e-9 * observed.abs().max(1.0);
    let exceed = (0..n_perm)
        .into_par_iter()
        .map(|perm| {
            let mut rng = rng::derive_rng(master_seed, &[stream::PERMUTATION, perm as u64]);
            let mut shuffled = series.values().to_vec();
            shuffled.shuffle(&mut rng);
            let permuted = TimeSeries::new(shuffled).expect("shuffle preserves validity");
            let trace = select_bic(&permuted, cfg)
                .expect("permuted series stays detectable")
                .bic_trace
                .expect("binseg_bic result carries a trace");
            usize::from(delta_bic(&trace) >= threshold)
        })
        .sum::<usize>();

    Ok(PermutationReport {
        observed_stat: observed,
        p_value: (1 + exceed) as f64 / (n_perm + 1) as f64,
        n_perm,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let m = sorted.len();
    let idx = ((q * m as f64).ceil() as usize).clamp(1, m) - 1;
    sorted[idx]
}

/// Residual bootstrap for changepoint locations at fixed model order.
pub fn bootstrap_ci(
    series: &TimeSeries,
    fixed_k: usize,
    n_boot: usize,
    level: f64,
    master_seed: u64,
) -> Result<BootstrapReport, Error> {
    if fixed_k < 1 {
        return Err(Error::argument("fixed_k must be >= 1"));
    }
    if n_boot < 1 {
        return Err(Error::argument("n_boot must be >= 1"));
    }
    if !(0.0..1.0).contains(&level) || level == 0.0 {
        return Err(Error::argument("level must be in (0, 1)"));
    }
    let cfg = DetectorConfig::default();
    let fit = binseg(series, fixed_k, &cfg)?;
    if fit.truncated {
        return Err(Error::argument(format!(
            "cannot place {fixed_k} breakpoints in a series of length {}",
            series.len()
        )));
    }
    let n = series.len();
    let x = series.values();
    let mut fitted = vec![0.0; n];
    for (s, e) in fit.segmentation.segments() {
        let mean = x[s..e].iter().sum::<f64>() / (e - s) as f64;
        fitted[s..e].fill(mean);
    }
    let residuals: Vec<f64> = x.iter().zip(&fitted).map(|(v, f)| v - f).collect();

    let draws: Vec<Option<Vec<usize>>> = (0..n_boot)
        .into_par_iter()
        .map(|boot| {
            let mut rng = rng::derive_rng(master_seed, &[stream::BOOTSTRAP, boot as u64]);
            let resampled: Vec<f64> = (0..n)
                .map(|i| fitted[i] + residuals[rng.gen_range(0..n)])
                .collect();
            let series = TimeSeries::new(resampled).expect("resample preserves validity");
            let det = binseg(&series, fixed_k, &cfg).expect("resample stays segmentable");
            if det.truncated {
                None
            } else {
                Some(det.breakpoints().to_vec())
            }
        })
        .collect();

    let skipped = draws.iter().filter(|d| d.is_none()).count();
    let complete: Vec<&Vec<usize>> = draws.iter().flatten().collect();
    if complete.is_empty() {
        return Err(Error::argument("all bootstrap resamples failed to detect"));
    }

    let alpha = 1.0 - level;
    let mut intervals = Vec::with_capacity(fixed_k);
    for (i, &bp) in fit.breakpoints().iter().enumerate() {
        let estimate = series.label_at(bp);
        let mut locs: Vec<f64> = complete.iter().map(|bps| series.label_at(bps[i])).collect();
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lower = percentile(&locs, alpha / 2.0).min(estimate);
        let upper = percentile(&locs, 1.0 - alpha / 2.0).max(estimate);
        intervals.push(CpInterval {
            estimate,
            lower,
            upper,
        });
    }
    Ok(BootstrapReport {
        intervals,
        n_boot,
        level,
        skipped,
    })
}
