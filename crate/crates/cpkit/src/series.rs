// SPDX-License-Identifier: MIT OR Apache-2.0

//! Series representation, segmentations, and O(1) segment cost evaluation.
//!
//! A breakpoint `b` splits a length-`n` series into `[0, b)` and `[b, n)`;
//! `b` is the first index of the right segment. Segment residual sums of
//! squares come from cumulative sums so every detector can price a candidate
//! segment in constant time.

use crate::error::Error;

/// Minimum admissible segment length, applied everywhere a segmentation is
/// constructed or searched. Length-1 segments have zero residual and break
/// the log-likelihood term of the selection criterion.
pub const MIN_SEG_LEN: usize = 2;

/// An ordered univariate series with optional strictly increasing time labels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<f64>>,
}

impl TimeSeries {
    /// Build a series from raw observations. Requires at least two finite
    /// values.
    pub fn new(values: Vec<f64>) -> Result<Self, Error> {
        Self::with_labels_opt(values, None)
    }

    /// Build a series with time labels (e.g. calendar years). Labels must be
    /// strictly increasing and match the value count.
    pub fn with_labels(values: Vec<f64>, labels: Vec<f64>) -> Result<Self, Error> {
        Self::with_labels_opt(values, Some(labels))
    }

    fn with_labels_opt(values: Vec<f64>, labels: Option<Vec<f64>>) -> Result<Self, Error> {
        if values.len() < 2 {
            return Err(Error::TooShort {
                need: 2,
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::series(format!(
                "non-finite value at index {bad}"
            )));
        }
        if let Some(ref ls) = labels {
            if ls.len() != values.len() {
                return Err(Error::series(format!(
                    "label count {} does not match value count {}",
                    ls.len(),
                    values.len()
                )));
            }
            if ls.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Error::series("labels must be strictly increasing"));
            }
        }
        Ok(TimeSeries { values, labels })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 2 by construction
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[f64]> {
        self.labels.as_deref()
    }

    /// Label of index `i`, falling back to the index itself.
    pub fn label_at(&self, i: usize) -> f64 {
        match &self.labels {
            Some(ls) => ls[i],
            None => i as f64,
        }
    }
}

/// Strictly increasing interior breakpoints partitioning a series of known
/// length. Breakpoint `b` starts the right segment `[b, n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation {
    breakpoints: Vec<usize>,
    n: usize,
}

impl Segmentation {
    /// Validate breakpoints against series length and the minimum segment
    /// length.
    pub fn new(breakpoints: Vec<usize>, n: usize) -> Result<Self, Error> {
        Self::with_min_seg_len(breakpoints, n, MIN_SEG_LEN)
    }

    pub fn with_min_seg_len(
        breakpoints: Vec<usize>,
        n: usize,
        min_seg_len: usize,
    ) -> Result<Self, Error> {
        let mut prev = 0usize;
        for &b in &breakpoints {
            if b <= prev && prev != 0 {
                return Err(Error::segmentation("breakpoints must be strictly increasing"));
            }
            if b == 0 || b >= n {
                return Err(Error::segmentation(format!(
                    "breakpoint {b} outside (0, {n})"
                )));
            }
            if b - prev < min_seg_len {
                return Err(Error::segmentation(format!(
                    "segment [{prev}, {b}) shorter than {min_seg_len}"
                )));
            }
            prev = b;
        }
        if n - prev < min_seg_len {
            return Err(Error::segmentation(format!(
                "segment [{prev}, {n}) shorter than {min_seg_len}"
            )));
        }
        Ok(Segmentation { breakpoints, n })
    }

    /// Empty segmentation: the whole series as one segment.
    pub fn trivial(n: usize) -> Self {
        Segmentation {
            breakpoints: Vec::new(),
            n,
        }
    }

    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    pub fn series_len(&self) -> usize {
        self.n
    }

    /// Number of breakpoints (K).
    pub fn count(&self) -> usize {
        self.breakpoints.len()
    }

    /// Segment boundaries as `(start, end)` half-open pairs.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.breakpoints.len() + 1);
        let mut start = 0;
        for &b in &self.breakpoints {
            out.push((start, b));
            start = b;
        }
        out.push((start, self.n));
        out
    }
}

/// Cumulative sums and sums of squares, one slot longer than the series.
#[derive(Debug, Clone)]
pub struct PrefixSums {
    cum_sum: Vec<f64>,
    cum_sumsq: Vec<f64>,
}

impl PrefixSums {
    pub fn n(&self) -> usize {
        self.cum_sum.len() - 1
    }

    pub fn cum_sum(&self) -> &[f64] {
        &self.cum_sum
    }

    pub fn cum_sumsq(&self) -> &[f64] {
        &self.cum_sumsq
    }
}

/// Accumulate prefix sums for a series.
pub fn build_prefix(series: &TimeSeries) -> PrefixSums {
    build_prefix_raw(series.values())
}

/// Prefix sums over a raw slice; callers guarantee finiteness.
pub fn build_prefix_raw(values: &[f64]) -> PrefixSums {
    let n = values.len();
    let mut cum_sum = Vec::with_capacity(n + 1);
    let mut cum_sumsq = Vec::with_capacity(n + 1);
    cum_sum.push(0.0);
    cum_sumsq.push(0.0);
    let (mut s, mut s2) = (0.0, 0.0);
    for &v in values {
        s += v;
        s2 += v * v;
        cum_sum.push(s);
        cum_sumsq.push(s2);
    }
    PrefixSums { cum_sum, cum_sumsq }
}

/// Residual sum of squares of segment `[i, j)` around its own mean,
/// clamped at zero against floating round-off.
pub fn segment_rss(prefix: &PrefixSums, i: usize, j: usize) -> Result<f64, Error> {
    if i >= j || j > prefix.n() {
        return Err(Error::argument(format!(
            "segment indices [{i}, {j}) invalid for length {}",
            prefix.n()
        )));
    }
    Ok(segment_rss_unchecked(prefix, i, j))
}

#[inline]
pub(crate) fn segment_rss_unchecked(prefix: &PrefixSums, i: usize, j: usize) -> f64 {
    let s = prefix.cum_sum[j] - prefix.cum_sum[i];
    let s2 = prefix.cum_sumsq[j] - prefix.cum_sumsq[i];
    let rss = s2 - s * s / (j - i) as f64;
    rss.max(0.0)
}

/// Total RSS of the piecewise-constant fit induced by a segmentation.
pub fn total_rss(prefix: &PrefixSums, seg: &Segmentation) -> f64 {
    seg.segments()
        .iter()
        .map(|&(s, e)| segment_rss_unchecked(prefix, s, e))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn prefix_accumulates() {
        let p = build_prefix(&ts(&[1.0, 2.0, 3.0]));
        assert_eq!(p.cum_sum(), &[0.0, 1.0, 3.0, 6.0]);
        assert_eq!(p.cum_sumsq(), &[0.0, 1.0, 5.0, 14.0]);
    }

    #[test]
    fn prefix_constant_pair() {
        let p = build_prefix(&ts(&[5.0, 5.0]));
        assert_eq!(p.cum_sum(), &[0.0, 5.0, 10.0]);
    }

    #[test]
    fn empty_series_rejected() {
        assert!(TimeSeries::new(vec![]).is_err());
        assert!(TimeSeries::new(vec![1.0]).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(TimeSeries::new(vec![1.0, f64::NAN]).is_err());
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn labels_must_increase() {
        assert!(TimeSeries::with_labels(vec![1.0, 2.0], vec![2000.0, 2000.0]).is_err());
        assert!(TimeSeries::with_labels(vec![1.0, 2.0], vec![2000.0, 2001.0]).is_ok());
    }

    #[test]
    fn segment_rss_examples() {
        let p = build_prefix(&ts(&[5.0, 5.0, 5.0]));
        assert_eq!(segment_rss(&p, 0, 3).unwrap(), 0.0);
        let p = build_prefix(&ts(&[1.0, 2.0, 3.0]));
        assert!((segment_rss(&p, 0, 3).unwrap() - 2.0).abs() < 1e-12);
        let p = build_prefix(&ts(&[0.0, 10.0]));
        assert!((segment_rss(&p, 0, 2).unwrap() - 50.0).abs() < 1e-12);
    }

    #[test]
    fn segment_rss_bad_range() {
        let p = build_prefix(&ts(&[1.0, 2.0, 3.0]));
        assert!(segment_rss(&p, 2, 2).is_err());
        assert!(segment_rss(&p, 0, 4).is_err());
    }

    #[test]
    fn total_rss_examples() {
        let p = build_prefix(&ts(&[0.0, 0.0, 10.0, 10.0]));
        let seg = Segmentation::new(vec![2], 4).unwrap();
        assert_eq!(total_rss(&p, &seg), 0.0);
        let none = Segmentation::trivial(4);
        assert!((total_rss(&p, &none) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn segmentation_min_length_enforced() {
        assert!(Segmentation::new(vec![1], 4).is_err());
        assert!(Segmentation::new(vec![3], 4).is_err());
        assert!(Segmentation::new(vec![2], 4).is_ok());
        assert!(Segmentation::new(vec![2, 3], 6).is_err());
    }
}
