//! Replication studies, chf-error diagnostics and the `chfsim` command line.

pub mod cli;
pub mod config;
pub mod diagnose;
pub mod replicate;

use std::path::Path;

use thiserror::Error;

pub use config::ExperimentConfig;
pub use diagnose::{chf_error_diagnostic, DiagnosticRow};
pub use replicate::{run_replications, ReplicationSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] chfsim_core::Error),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Input(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Reads a single-column, header-less CSV of observations. Blank lines are
/// skipped.
pub fn read_series(path: &Path) -> Result<Vec<f64>, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    parse_series(&text)
}

pub fn parse_series(text: &str) -> Result<Vec<f64>, HarnessError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| HarnessError::Input(format!("line {}: '{}' is not a number", i + 1, l.trim())))
        })
        .collect()
}

pub fn series_csv(series: &[f64]) -> String {
    let mut out = String::with_capacity(series.len() * 20);
    for v in series {
        out.push_str(&v.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_round_trip() {
        let x = vec![0.1, -2.5, 3.0, 1e-17];
        assert_eq!(parse_series(&series_csv(&x)).unwrap(), x);
        assert!(parse_series("1.0\nabc\n").is_err());
        assert!(parse_series("1.0,2.0\n").is_err());
        assert_eq!(parse_series("1\n\n2\n").unwrap(), vec![1.0, 2.0]);
    }
}
