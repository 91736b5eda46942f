use serde::Serialize;

use crate::error::{invalid, Result};

/// A decreasing sequence of nonnegative masses summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassPartition(Vec<f64>);

impl MassPartition {
    /// Ranks integer block sizes and divides by `total`.
    ///
    /// Sorting happens on the integers so equal blocks never swap places
    /// because of rounding.
    pub fn from_counts(counts: &[usize], total: usize) -> Result<Self> {
        if total == 0 {
            return Err(invalid("mass partition of an empty population"));
        }
        let sum: usize = counts.iter().sum();
        if sum != total {
            return Err(invalid(format!("block sizes sum to {sum}, expected {total}")));
        }
        let mut sorted: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let denom = total as f64;
        Ok(Self(sorted.into_iter().map(|c| c as f64 / denom).collect()))
    }

    /// Wraps an already ranked sequence, checking the invariants.
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(invalid("masses must be finite and nonnegative"));
        }
        if masses.windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("masses must be ranked in decreasing order"));
        }
        let sum: f64 = masses.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("masses sum to {sum}, expected 1")));
        }
        Ok(Self(masses))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `rank`-th largest mass (1-based), zero past the end.
    pub fn get(&self, rank: usize) -> f64 {
        if rank == 0 {
            return 0.0;
        }
        self.0.get(rank - 1).copied().unwrap_or(0.0)
    }

    pub fn largest(&self) -> f64 {
        self.get(1)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}
