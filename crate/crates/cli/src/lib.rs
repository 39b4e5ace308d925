//! Command-line front end: grid scans, single-problem discrimination from
//! JSON ensembles, advantage curves, and the verification suite.

pub mod discriminate;
pub mod output;
pub mod scan;
pub mod verify;

use std::fmt;

/// CLI failure classes; mapped to process exit codes (input 1, solver 2).
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl From<luderscope_core::CoreError> for CliError {
    fn from(e: luderscope_core::CoreError) -> Self {
        match e {
            luderscope_core::CoreError::Solver(m) => CliError::Solver(m),
            e @ luderscope_core::CoreError::EigFailure(_) => CliError::Solver(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Cap the rayon worker count from LUDERSCOPE_THREADS (no-op when unset or
/// already configured).
pub fn configure_threads() {
    if let Ok(v) = std::env::var("LUDERSCOPE_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
