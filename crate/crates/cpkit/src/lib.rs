// SPDX-License-Identifier: MIT OR Apache-2.0

//! Changepoint detection and statistical power analysis for short time series.
//!
//! The crate bundles the pieces needed to study changepoint detection at
//! monitoring-scale series lengths (tens of observations):
//!
//! - [`series`]: series and segmentation types plus O(1) segment cost
//!   evaluation through prefix sums;
//! - [`simulate`]: piecewise-constant signal generators with Gaussian or
//!   AR(1) noise and deterministic, replicate-keyed seeding;
//! - [`detect`]: Binary Segmentation with BIC model selection, robust noise
//!   estimation, and exact penalized PELT;
//! - [`ews`]: rolling-variance early-warning-signal trend tests;
//! - [`inference`]: permutation significance tests and bootstrap confidence
//!   intervals for detected changepoints;
//! - [`power`]: Monte Carlo power grids and the derived guideline table.

#![forbid(unsafe_code)]

pub mod detect;
pub mod error;
pub mod ews;
pub mod inference;
pub mod power;
pub mod rng;
pub mod series;
pub mod simulate;

pub use detect::{DetectionResult, DetectorConfig, Method};
pub use error::Error;
pub use ews::EwsConfig;
pub use power::{GridSpec, PowerCell, PowerTable};
pub use series::{PrefixSums, Segmentation, TimeSeries};
pub use simulate::{Scenario, ScenarioSpec, SeedSpec};
