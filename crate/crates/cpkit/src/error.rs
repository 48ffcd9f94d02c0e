// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors produced by series construction, detection, and resampling.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("series too short: need at least {need} observations, got {got}")]
    TooShort { need: usize, got: usize },
}

impl Error {
    pub fn series(msg: impl Into<String>) -> Self {
        Error::InvalidSeries(msg.into())
    }

    pub fn segmentation(msg: impl Into<String>) -> Self {
        Error::InvalidSegmentation(msg.into())
    }

    pub fn argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn scenario(msg: impl Into<String>) -> Self {
        Error::InvalidScenario(msg.into())
    }
}
