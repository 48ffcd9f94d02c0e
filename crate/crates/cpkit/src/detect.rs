// SPDX-License-Identifier: MIT OR Apache-2.0

//! Binary Segmentation, BIC model selection, robust noise estimation, and
//! exact penalized PELT.
//!
//! Binary Segmentation greedily inserts the single admissible split with the
//! largest RSS reduction; model order is then chosen by minimizing
//! `BIC = n ln(RSS/n) + k ln(n)` with `k = 2(K + 1)` parameters for `K`
//! breakpoints. PELT minimizes total segment RSS plus a per-changepoint
//! penalty exactly, with candidate pruning that provably never changes the
//! optimum (removal of a dominated candidate is delayed until every future
//! time can route through the dominating one under the minimum segment
//! length).

use crate::error::Error;
use crate::series::{
    build_prefix, segment_rss_unchecked, total_rss, PrefixSums, Segmentation, TimeSeries,
};

/// Detector identification carried in results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    BinsegBic,
    Pelt,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::BinsegBic => write!(f, "binseg_bic"),
            Method::Pelt => write!(f, "pelt"),
        }
    }
}

/// Shared detector settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// Largest breakpoint count considered by model selection.
    pub k_max: usize,
    /// Minimum admissible segment length.
    pub min_seg_len: usize,
    /// Per-point RSS floor protecting `ln(RSS/n)` from degenerate fits.
    pub rss_floor: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            k_max: 5,
            min_seg_len: 2,
            rss_floor: 1e-8,
        }
    }
}

impl DetectorConfig {
    fn validate(&self) -> Result<(), Error> {
        if self.min_seg_len < 2 {
            return Err(Error::argument("min_seg_len must be >= 2"));
        }
        if !(self.rss_floor > 0.0) {
            return Err(Error::argument("rss_floor must be positive"));
        }
        Ok(())
    }

    /// Largest breakpoint count a series of length `n` admits.
    pub fn feasible_k(&self, n: usize) -> usize {
        (n / self.min_seg_len).saturating_sub(1)
    }
}

/// Outcome of a detection run.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub segmentation: Segmentation,
    pub method: Method,
    /// BIC value per breakpoint count, index = K (BinsegBic only).
    pub bic_trace: Option<Vec<f64>>,
    pub penalty_used: Option<f64>,
    pub sigma_hat: Option<f64>,
    /// Set when fewer breakpoints than requested were admissible.
    pub truncated: bool,
    /// Set when the noise estimate collapsed to its floor value.
    pub degenerate_sigma: bool,
}

impl DetectionResult {
    pub fn breakpoints(&self) -> &[usize] {
        self.segmentation.breakpoints()
    }
}

/// `BIC = n ln(max(rss, floor * n) / n) + 2 (K + 1) ln(n)`.
pub fn bic_score(n: usize, rss: f64, n_bkps: usize, rss_floor: f64) -> f64 {
    let nf = n as f64;
    nf * (rss.max(rss_floor * nf) / nf).ln() + (2 * (n_bkps + 1)) as f64 * nf.ln()
}

/// Best admissible split of `[start, end)`: `(gain, index)`, ties resolved
/// toward the smaller index.
fn best_split(
    prefix: &PrefixSums,
    start: usize,
    end: usize,
    min_seg_len: usize,
) -> Option<(f64, usize)> {
    if end - start < 2 * min_seg_len {
        return None;
    }
    let full = segment_rss_unchecked(prefix, start, end);
    let mut best: Option<(f64, usize)> = None;
    for b in (start + min_seg_len)..=(end - min_seg_len) {
        let gain = full
            - segment_rss_unchecked(prefix, start, b)
            - segment_rss_unchecked(prefix, b, end);
        match best {
            Some((g, _)) if gain <= g => {}
            _ => best = Some((gain, b)),
        }
    }
    best
}

/// Greedy insertion order of up to `k` breakpoints. May return fewer when no
/// admissible split remains.
fn binseg_order(prefix: &PrefixSums, n: usize, k: usize, cfg: &DetectorConfig) -> Vec<usize> {
    let mut segments = vec![(0usize, n)];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let mut chosen: Option<(f64, usize, usize)> = None; // (gain, bkp, segment slot)
        for (slot, &(s, e)) in segments.iter().enumerate() {
            if let Some((gain, b)) = best_split(prefix, s, e, cfg.min_seg_len) {
                let better = match chosen {
                    None => true,
                    Some((g, bb, _)) => gain > g || (gain == g && b < bb),
                };
                if better {
                    chosen = Some((gain, b, slot));
                }
            }
        }
        let Some((_, b, slot)) = chosen else { break };
        let (s, e) = segments[slot];
        segments[slot] = (s, b);
        segments.push((b, e));
        order.push(b);
    }
    order
}

/// Binary Segmentation toward exactly `k` breakpoints. When `k` is not
/// admissible the maximal achievable segmentation is returned with the
/// `truncated` flag set.
pub fn binseg(series: &TimeSeries, k: usize, cfg: &DetectorConfig) -> Result<DetectionResult, Error> {
    cfg.validate()?;
    let n = series.len();
    let prefix = build_prefix(series);
    let order = binseg_order(&prefix, n, k, cfg);
    let truncated = order.len() < k;
    let mut bps = order;
    bps.sort_unstable();
    Ok(DetectionResult {
        segmentation: Segmentation::with_min_seg_len(bps, n, cfg.min_seg_len)?,
        method: Method::BinsegBic,
        bic_trace: None,
        penalty_used: None,
        sigma_hat: None,
        truncated,
        degenerate_sigma: false,
    })
}

/// Run Binary Segmentation for `K = 0..=k_max` (capped at feasibility) and
/// return the BIC-minimizing segmentation. Ties favor the smaller K.
pub fn select_bic(series: &TimeSeries, cfg: &DetectorConfig) -> Result<DetectionResult, Error> {
    cfg.validate()?;
    let n = series.len();
    let prefix = build_prefix(series);
    let k_cap = cfg.k_max.min(cfg.feasible_k(n));
    let order = binseg_order(&prefix, n, k_cap, cfg);
    let truncated = order.len() < k_cap;

    let mut trace = Vec::with_capacity(order.len() + 1);
    let mut best_k = 0usize;
    for k in 0..=order.len() {
        let mut bps: Vec<usize> = order[..k].to_vec();
        bps.sort_unstable();
        let seg = Segmentation::with_min_seg_len(bps, n, cfg.min_seg_len)?;
        let score = bic_score(n, total_rss(&prefix, &seg), k, cfg.rss_floor);
        trace.push(score);
        if score < trace[best_k] {
            best_k = k;
        }
    }

    let mut bps: Vec<usize> = order[..best_k].to_vec();
    bps.sort_unstable();
    Ok(DetectionResult {
        segmentation: Segmentation::with_min_seg_len(bps, n, cfg.min_seg_len)?,
        method: Method::BinsegBic,
        bic_trace: Some(trace),
        penalty_used: None,
        sigma_hat: None,
        truncated,
        degenerate_sigma: false,
    })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = xs.len();
    if m % 2 == 1 {
        xs[m / 2]
    } else {
        0.5 * (xs[m / 2 - 1] + xs[m / 2])
    }
}

/// Gaussian-consistent MAD scale factor.
const MAD_SCALE: f64 = 1.4826;

/// Robust noise-SD estimate from first differences:
/// `sigma_hat = 1.4826 * MAD(diff) / sqrt(2)`. Falls back to the sample SD
/// of the differences (again over sqrt(2)) when the MAD vanishes, and to
/// `sqrt(rss_floor)` when both are zero.
pub fn estimate_sigma_mad(series: &TimeSeries) -> Result<f64, Error> {
    estimate_sigma_mad_with_floor(series, DetectorConfig::default().rss_floor)
}

pub fn estimate_sigma_mad_with_floor(series: &TimeSeries, rss_floor: f64) -> Result<f64, Error> {
    let n = series.len();
    if n < 3 {
        return Err(Error::TooShort { need: 3, got: n });
    }
    let values = series.values();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let med = median(&mut diffs.clone());
    let mut abs_dev: Vec<f64> = diffs.iter().map(|d| (d - med).abs()).collect();
    let mad = median(&mut abs_dev);
    if mad > 0.0 {
        return Ok(MAD_SCALE * mad / std::f64::consts::SQRT_2);
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (diffs.len() - 1) as f64;
    let sd = var.sqrt();
    if sd > 0.0 {
        Ok(sd / std::f64::consts::SQRT_2)
    } else {
        Ok(rss_floor.sqrt())
    }
}

/// The paper-standard PELT penalty `2 sigma_hat^2 ln(n)` with its metadata.
#[derive(Debug, Clone, Copy)]
pub struct DefaultPenalty {
    pub penalty: f64,
    pub sigma_hat: f64,
    /// True when `sigma_hat` collapsed to the floor value.
    pub degenerate: bool,
}

pub fn pelt_default_penalty(series: &TimeSeries) -> Result<DefaultPenalty, Error> {
    let rss_floor = DetectorConfig::default().rss_floor;
    let sigma_hat = estimate_sigma_mad_with_floor(series, rss_floor)?;
    Ok(DefaultPenalty {
        penalty: 2.0 * sigma_hat * sigma_hat * (series.len() as f64).ln(),
        sigma_hat,
        degenerate: sigma_hat <= rss_floor.sqrt(),
    })
}

struct Candidate {
    start: usize,
    /// Time at which the candidate became dominated, if any. It stays usable
    /// until every later time can reach a better path through the dominating
    /// time under the minimum segment length.
    marked_at: Option<usize>,
}

/// Exact penalized segmentation: minimizes total segment RSS plus
/// `penalty` per changepoint over all segmentations with segments of at
/// least `cfg.min_seg_len`.
pub fn pelt(
    series: &TimeSeries,
    penalty: f64,
    cfg: &DetectorConfig,
) -> Result<DetectionResult, Error> {
    cfg.validate()?;
    if !(penalty > 0.0) {
        return Err(Error::argument("penalty must be positive"));
    }
    let n = series.len();
    let min_len = cfg.min_seg_len;
    let prefix = build_prefix(series);

    let mut cost = vec![f64::INFINITY; n + 1];
    let mut last = vec![0usize; n + 1];
    cost[0] = -penalty;
    let mut candidates: Vec<Candidate> = Vec::new();

    for t in min_len..=n {
        // `t - min_len` becomes a legal previous-changepoint position now.
        let entering = t - min_len;
        if entering == 0 || entering >= min_len {
            candidates.push(Candidate {
                start: entering,
                marked_at: None,
            });
        }

        let mut best = f64::INFINITY;
        let mut best_s = 0usize;
        for cand in &candidates {
            if let Some(m) = cand.marked_at {
                if t >= m + min_len {
                    continue;
                }
            }
            let value = cost[cand.start] + segment_rss_unchecked(&prefix, cand.start, t) + penalty;
            if value < best {
                best = value;
                best_s = cand.start;
            }
        }
        cost[t] = best;
        last[t] = best_s;

        for cand in &mut candidates {
            if cand.marked_at.is_none()
                && cost[cand.start] + segment_rss_unchecked(&prefix, cand.start, t) > cost[t]
            {
                cand.marked_at = Some(t);
            }
        }
        candidates.retain(|c| match c.marked_at {
            Some(m) => t < m + min_len,
            None => true,
        });
    }

    let mut bps = Vec::new();
    let mut t = n;
    while t > 0 {
        let s = last[t];
        if s > 0 {
            bps.push(s);
        }
        t = s;
    }
    bps.reverse();
    Ok(DetectionResult {
        segmentation: Segmentation::with_min_seg_len(bps, n, min_len)?,
        method: Method::Pelt,
        bic_trace: None,
        penalty_used: Some(penalty),
        sigma_hat: None,
        truncated: false,
        degenerate_sigma: false,
    })
}

/// PELT with the default MAD-calibrated penalty.
pub fn pelt_auto(series: &TimeSeries, cfg: &DetectorConfig) -> Result<DetectionResult, Error> {
    let dp = pelt_default_penalty(series)?;
    let mut result = pelt(series, dp.penalty, cfg)?;
    result.sigma_hat = Some(dp.sigma_hat);
    result.degenerate_sigma = dp.degenerate;
    Ok(result)
}
