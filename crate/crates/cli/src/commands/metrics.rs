//! `qtopo metrics`: standalone evaluation of the scalar formulas.

use std::path::Path;

use qtopo_core::circuit::{distribution_fidelity, idle_ratio};

use crate::CliError;

pub fn cmd_metrics_idle(gates: usize, qubits: usize, depth: usize) -> Result<f64, CliError> {
    idle_ratio(gates, qubits, depth).map_err(|e| CliError::Parse(e.to_string()))
}

/// Probability vector file: one probability per line; blank lines and `#`
/// comments are ignored.
pub fn read_probability_csv(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            CliError::Parse(format!(
                "{} line {}: expected a probability, got `{line}`",
                path.display(),
                ln + 1
            ))
        })?;
        out.push(v);
    }
    Ok(out)
}

pub fn cmd_metrics_fidelity(p_path: &Path, q_path: &Path) -> Result<f64, CliError> {
    let p = read_probability_csv(p_path)?;
    let q = read_probability_csv(q_path)?;
    distribution_fidelity(&p, &q).map_err(|e| CliError::Parse(e.to_string()))
}
