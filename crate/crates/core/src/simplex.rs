use std::ops::Deref;

use crate::error::{Error, Result};

/// Allowed deviation of `Σ weights` from 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// A point on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::invalid("weights", "empty probability vector"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::invalid("weights", format!("entry {w} is not a non-negative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid("weights", format!("sum {total} differs from 1")));
        }
        Ok(Self(weights))
    }

    /// Two-point distribution `(x, 1 - x)`.
    pub fn bernoulli(x: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::invalid("x", format!("{x} is outside [0, 1]")));
        }
        Ok(Self(vec![x, 1.0 - x]))
    }

    /// Normalizes non-negative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::invalid("weights", "total mass must be positive"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbabilityVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_off_simplex() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![]).is_err());
        assert!(ProbabilityVector::new(vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn normalizes() {
        let p = ProbabilityVector::normalized(vec![1.0, 3.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.25, 0.75]);
        assert!(ProbabilityVector::normalized(vec![0.0, 0.0]).is_err());
    }
}
