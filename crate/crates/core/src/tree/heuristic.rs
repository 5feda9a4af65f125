//! Information measures and cost-weighted selection scores.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum HeuristicError {
    #[error("cost must be finite and positive, got {0}")]
    NonPositiveCost(f64),
    #[error("omega must lie in [0, 1], got {0}")]
    OmegaOutOfRange(f64),
}

/// Entropy in bits of a class-count vector.
pub fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Information gain in bits of partitioning `parent` into `parts`, where
/// each part is a class-count vector and the parts sum to `parent`.
pub fn info_gain(parent: &[usize], parts: &[Vec<usize>]) -> f64 {
    let n: usize = parent.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let remainder: f64 = parts
        .iter()
        .map(|p| p.iter().sum::<usize>() as f64 / n as f64 * entropy(p))
        .sum();
    (entropy(parent) - remainder).max(0.0)
}

/// Entropy of the partition sizes themselves.
pub fn split_info(sizes: &[usize]) -> f64 {
    entropy(sizes)
}

/// `(2^gain - 1) / (cost + 1)^omega`.
pub fn icf_score(gain: f64, cost: f64, omega: f64) -> f64 {
    (gain.exp2() - 1.0) / (cost + 1.0).powf(omega)
}

/// `gain^2 / cost`.
pub fn cs_id3_score(gain: f64, cost: f64) -> Result<f64, HeuristicError> {
    check_cost(cost)?;
    Ok(gain * gain / cost)
}

/// `gain / cost`.
pub fn idx_score(gain: f64, cost: f64) -> Result<f64, HeuristicError> {
    check_cost(cost)?;
    Ok(gain / cost)
}

pub(crate) fn check_cost(cost: f64) -> Result<(), HeuristicError> {
    if cost.is_finite() && cost > 0.0 {
        Ok(())
    } else {
        Err(HeuristicError::NonPositiveCost(cost))
    }
}
