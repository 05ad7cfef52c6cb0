//! Scalar circuit metrics: idle ratio and classical distribution fidelity.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("idle ratio undefined: qubits and depth must be positive")]
    UndefinedIdleInput,
    #[error("idle ratio undefined: gates must be in [1, qubits*depth], got {gates}")]
    GatesOutOfRange { gates: usize },
    #[error("probability vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("probability vector entry {index} is negative ({value})")]
    NegativeProbability { index: usize, value: f64 },
    #[error("probability vector sums to {sum}, not 1 within 1e-9")]
    NotNormalized { sum: f64 },
}

/// Fraction of qubit-timeslots carrying no gate: `1 - gates/(qubits*depth)`.
pub fn idle_ratio(gates: usize, qubits: usize, depth: usize) -> Result<f64, MetricsError> {
    if qubits == 0 || depth == 0 {
        return Err(MetricsError::UndefinedIdleInput);
    }
    if gates == 0 || gates > qubits * depth {
        return Err(MetricsError::GatesOutOfRange { gates });
    }
    Ok(1.0 - gates as f64 / (qubits as f64 * depth as f64))
}

/// Classical fidelity between two outcome distributions:
/// the squared sum of sqrt(P(i) * Q(i)).
pub fn distribution_fidelity(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::LengthMismatch(p.len(), q.len()));
    }
    for (index, vec) in [p, q].into_iter().enumerate() {
        let mut sum = 0.0;
        for (i, &v) in vec.iter().enumerate() {
            if v < 0.0 {
                return Err(MetricsError::NegativeProbability { index: i, value: v });
            }
            sum += v;
        }
        let _ = index;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(MetricsError::NotNormalized { sum });
        }
    }
    let root_sum: f64 = p.iter().zip(q).map(|(&a, &b)| (a * b).sqrt()).sum();
    Ok(root_sum * root_sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idle_ratio_examples() {
        // Fully packed schedule.
        assert_eq!(idle_ratio(10, 2, 5).unwrap(), 0.0);
        // Table-consistent case: 108 gates, 5 qubits, depth 92.
        let v = idle_ratio(108, 5, 92).unwrap();
        assert!((v - 0.7652173913043478).abs() < 1e-12);
        assert_eq!(idle_ratio(1, 2, 1).unwrap(), 0.5);
    }

    #[test]
    fn idle_ratio_rejects_degenerate_inputs() {
        assert_eq!(idle_ratio(1, 0, 5), Err(MetricsError::UndefinedIdleInput));
        assert_eq!(idle_ratio(1, 5, 0), Err(MetricsError::UndefinedIdleInput));
        assert!(matches!(
            idle_ratio(11, 2, 5),
            Err(MetricsError::GatesOutOfRange { gates: 11 })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let p = [0.25, 0.25, 0.5];
        assert!((distribution_fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-12);

        let a = [1.0, 0.0];
        let b = [0.0, 1.0];
        assert_eq!(distribution_fidelity(&a, &b).unwrap(), 0.0);

        let p = [0.5, 0.5];
        let q = [0.25, 0.75];
        assert!((distribution_fidelity(&p, &q).unwrap() - 0.9330127018922193).abs() < 1e-6);
    }

    #[test]
    fn fidelity_validates_inputs() {
        assert!(matches!(
            distribution_fidelity(&[1.0], &[0.5, 0.5]),
            Err(MetricsError::LengthMismatch(1, 2))
        ));
        assert!(matches!(
            distribution_fidelity(&[0.5, 0.4], &[0.5, 0.5]),
            Err(MetricsError::NotNormalized { .. })
        ));
        assert!(matches!(
            distribution_fidelity(&[-0.1, 1.1], &[0.5, 0.5]),
            Err(MetricsError::NegativeProbability { index: 0, .. })
        ));
    }
}
