//! Finitely supported real sequences on the non-negative integers.

use serde::{Deserialize, Serialize};

/// A real sequence `f(0), f(1), ...` that vanishes past `support()`.
///
/// The stored slice always has length `support() + 1`; every index beyond it
/// reads as zero. Trailing zeros inside the slice are allowed ("possibly
/// nonzero"), so operators can report a predictable output support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteSequence {
    values: Vec<f64>,
}

impl FiniteSequence {
    pub fn new(values: Vec<f64>) -> Self {
        if values.is_empty() {
            Self { values: vec![0.0] }
        } else {
            Self { values }
        }
    }

    /// The zero sequence with support `support`.
    pub fn zeros(support: usize) -> Self {
        Self {
            values: vec![0.0; support + 1],
        }
    }

    /// Kronecker delta at `k`.
    pub fn delta(k: usize) -> Self {
        let mut values = vec![0.0; k + 1];
        values[k] = 1.0;
        Self { values }
    }

    /// Last index that may hold a nonzero value.
    pub fn support(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, n: usize) -> f64 {
        self.values.get(n).copied().unwrap_or(0.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Copy with support extended (zero padded) or cut to `support`.
    pub fn resized(&self, support: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(support + 1, 0.0);
        Self { values }
    }

    pub fn dot(&self, other: &FiniteSequence) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_sup(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `self - other` over the union of supports.
    pub fn sub(&self, other: &FiniteSequence) -> FiniteSequence {
        let len = self.len().max(other.len());
        FiniteSequence::new((0..len).map(|n| self.get(n) - other.get(n)).collect())
    }

    pub fn scaled(&self, factor: f64) -> FiniteSequence {
        FiniteSequence::new(self.values.iter().map(|v| v * factor).collect())
    }
}

impl From<Vec<f64>> for FiniteSequence {
    fn from(values: Vec<f64>) -> Self {
        Self::new(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_is_zero_at_origin() {
        let f = FiniteSequence::new(vec![]);
        assert_eq!(f.support(), 0);
        assert!(f.is_zero());
    }

    #[test]
    fn reads_past_support_as_zero() {
        let f = FiniteSequence::delta(3);
        assert_eq!(f.support(), 3);
        assert_eq!(f.get(3), 1.0);
        assert_eq!(f.get(100), 0.0);
    }

    #[test]
    fn sub_spans_both_supports() {
        let f = FiniteSequence::new(vec![1.0, 2.0]);
        let g = FiniteSequence::new(vec![0.5, 0.0, 3.0]);
        assert_eq!(f.sub(&g).values(), &[0.5, 2.0, -3.0]);
    }
}
