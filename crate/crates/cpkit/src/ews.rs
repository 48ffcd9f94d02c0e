// SPDX-License-Identifier: MIT OR Apache-2.0

//! Rolling-variance early-warning-signal test with Kendall tau trend
//! detection.
//!
//! The detector looks at trailing-window variances just before a known
//! transition time and fires when their Kendall tau against time is above
//! the configured threshold. Trailing windows keep the test from peeking
//! across the changepoint.

use crate::error::Error;
use crate::series::TimeSeries;
use crate::simulate::{gen_series, ScenarioSpec, SeedSpec};

/// Early-warning-signal test settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EwsConfig {
    /// Rolling-window width.
    pub window: usize,
    /// Number of pre-transition windows fed to the trend test.
    pub lead: usize,
    /// Detection fires when tau exceeds this strictly.
    pub tau_threshold: f64,
}

impl Default for EwsConfig {
    fn default() -> Self {
        EwsConfig {
            window: 4,
            lead: 4,
            tau_threshold: 0.0,
        }
    }
}

impl EwsConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.window < 2 || self.lead < 2 {
            return Err(Error::argument("window and lead must be >= 2"));
        }
        Ok(())
    }
}

/// Trailing sample variances: output index `t` (for `t = window-1 .. n-1`)
/// covers `x[t-window+1 ..= t]` with denominator `window - 1`.
pub fn rolling_variance(series: &TimeSeries, window: usize) -> Result<Vec<f64>, Error> {
    let n = series.len();
    if window < 2 || window > n {
        return Err(Error::argument(format!(
            "window {window} invalid for series length {n}"
        )));
    }
    let x = series.values();
    let mut out = Vec::with_capacity(n - window + 1);
    for t in (window - 1)..n {
        let w = &x[t + 1 - window..=t];
        let mean = w.iter().sum::<f64>() / window as f64;
        let ss = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
        out.push(ss / (window - 1) as f64);
    }
    Ok(out)
}

/// Kendall tau-a of `x` against its index: (concordant - discordant) over
/// m(m-1)/2, ties contributing zero.
pub fn kendall_tau(x: &[f64]) -> Result<f64, Error> {
    let m = x.len();
    if m < 2 {
        return Err(Error::argument("kendall_tau needs at least 2 values"));
    }
    let mut net = 0i64;
    for i in 0..m {
        for j in (i + 1)..m {
            if x[j] > x[i] {
                net += 1;
            } else if x[j] < x[i] {
                net -= 1;
            }
        }
    }
    Ok(net as f64 / (m * (m - 1) / 2) as f64)
}

/// Pre-transition variance-trend test at a known changepoint.
///
/// Takes the `lead` rolling-variance values for windows ending at
/// `true_cp - lead .. true_cp - 1` and fires when their tau exceeds the
/// threshold. Returns `None` when the changepoint has too little history
/// for the required windows.
pub fn ews_detect(
    series: &TimeSeries,
    true_cp: usize,
    cfg: &EwsConfig,
) -> Result<Option<bool>, Error> {
    cfg.validate()?;
    if true_cp >= series.len() {
        return Err(Error::argument(format!(
            "changepoint {true_cp} outside series of length {}",
            series.len()
        )));
    }
    if true_cp < cfg.lead + cfg.window - 1 {
        return Ok(None); // not evaluable: first window would start before t=0
    }
    let variances = rolling_variance(series, cfg.window)?;
    // rolling_variance index 0 ends at t = window - 1
    let first = true_cp - cfg.lead - (cfg.window - 1);
    let vals = &variances[first..first + cfg.lead];
    let tau = kendall_tau(vals)?;
    Ok(Some(tau > cfg.tau_threshold))
}

/// Monte Carlo detection rate of [`ews_detect`] at the first true
/// changepoint, in percent over evaluable replicates.
pub fn ews_rate(
    spec: &ScenarioSpec,
    reps: usize,
    cfg: &EwsConfig,
    master_seed: u64,
) -> Result<f64, Error> {
    if reps == 0 {
        return Err(Error::argument("reps must be >= 1"));
    }
    if spec.n_bkps == 0 {
        return Err(Error::scenario("ews_rate needs at least one changepoint"));
    }
    spec.validate()?;
    let mut evaluable = 0usize;
    let mut hits = 0usize;
    for rep in 0..reps {
        let (series, truth) = gen_series(spec, SeedSpec::new(master_seed, rep as u64))?;
        match ews_detect(&series, truth[0], cfg)? {
            Some(hit) => {
                evaluable += 1;
                if hit {
                    hits += 1;
                }
            }
            None => {}
        }
    }
    if evaluable == 0 {
        return Err(Error::scenario(
            "no replicate had enough pre-changepoint history",
        ));
    }
    Ok(100.0 * hits as f64 / evaluable as f64)
}
