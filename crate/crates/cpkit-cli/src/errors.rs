// SPDX-License-Identifier: MIT OR Apache-2.0

/// Top-level failure classes mapped onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration → exit 2.
    Input(String),
    /// Could not produce an output artifact → exit 3.
    Output(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn output(msg: impl Into<String>) -> Self {
        CliError::Output(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Output(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<cpkit::Error> for CliError {
    fn from(e: cpkit::Error) -> Self {
        CliError::Input(e.to_string())
    }
}
