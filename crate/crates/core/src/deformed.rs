//! Deformed elementary functions.
//!
//! For a deformation index `q` the q-logarithm and q-exponential are
//!
//! ```text
//! ln_q x   = (x^(1-q) - 1) / (1-q)           x > 0
//! exp_q x  = [1 + (1-q) x]^(1/(1-q))         1 + (1-q) x > 0
//! ```
//!
//! and the q-product / q-ratio are the operations that turn `ln_q` into a
//! homomorphism. Every function checks its own domain inequality and
//! returns a [`DomainViolation`] instead of producing NaN.

use std::fmt;

use crate::error::{DomainViolation, Error, Result};

/// Below this distance from 1 the classical `ln`/`exp` branch is used.
pub const CLASSICAL_WINDOW: f64 = 1e-12;

/// The deformation index `q`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Deformation(f64);

impl Deformation {
    pub const CLASSICAL: Deformation = Deformation(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if !q.is_finite() {
            return Err(Error::invalid("q", format!("{q} is not finite")));
        }
        Ok(Self(q))
    }

    /// Like [`Deformation::new`] but also enforces the `0 < q < 2` window
    /// used by the distribution and LDP layers.
    pub fn in_window(q: f64) -> Result<Self> {
        let d = Self::new(q)?;
        if q <= 0.0 || q >= 2.0 {
            return Err(Error::invalid("q", format!("{q} is outside (0, 2)")));
        }
        Ok(d)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - q`.
    #[inline]
    pub fn one_minus(self) -> f64 {
        1.0 - self.0
    }

    #[inline]
    pub fn is_classical(self) -> bool {
        (self.0 - 1.0).abs() < CLASSICAL_WINDOW
    }

    /// The additive dual `2 - q`.
    pub fn dual(self) -> Deformation {
        Deformation(2.0 - self.0)
    }

    /// q-logarithm, `(x^(1-q) - 1) / (1-q)`.
    pub fn ln(self, x: f64) -> Result<f64> {
        if !(x > 0.0) || x.is_nan() {
            return Err(DomainViolation::new("q_ln", x, "x > 0").into());
        }
        Ok(self.ln_from_log(x.ln()))
    }

    /// q-logarithm of a number given through its natural logarithm.
    ///
    /// Lets callers evaluate `ln_q` of probabilities that underflow `f64`.
    #[inline]
    pub fn ln_from_log(self, ln_x: f64) -> f64 {
        if self.is_classical() {
            ln_x
        } else {
            let a = self.one_minus();
            (a * ln_x).exp_m1() / a
        }
    }

    /// q-exponential, failing outside `1 + (1-q) x > 0`.
    pub fn exp(self, x: f64) -> Result<f64> {
        Ok(self.ln_exp(x, "q_exp")?.exp())
    }

    /// Natural logarithm of `exp_q(x)`, `log1p((1-q) x) / (1-q)`.
    pub fn ln_of_exp(self, x: f64) -> Result<f64> {
        self.ln_exp(x, "q_exp")
    }

    fn ln_exp(self, x: f64, function: &'static str) -> Result<f64> {
        if x.is_nan() {
            return Err(DomainViolation::new(function, x, "x is a number").into());
        }
        if self.is_classical() {
            return Ok(x);
        }
        let a = self.one_minus();
        let t = a * x;
        if !(t > -1.0) {
            return Err(DomainViolation::new(function, x, format!("1 + (1 - {}) x > 0", self.0)).into());
        }
        Ok(t.ln_1p() / a)
    }

    /// q-exponential with the cutoff convention: zero where `1 + (1-q) x <= 0`
    /// and `q < 1`. For `q > 1` the function diverges there, which is an error.
    pub fn exp_cutoff(self, x: f64) -> Result<f64> {
        Ok(self.ln_exp_cutoff(x)?.exp())
    }

    /// Natural logarithm of [`Deformation::exp_cutoff`]; `-inf` in the cut-off region.
    pub fn ln_exp_cutoff(self, x: f64) -> Result<f64> {
        if self.is_classical() || self.0 > 1.0 {
            return self.ln_exp(x, "q_exp_cutoff");
        }
        if x.is_nan() {
            return Err(DomainViolation::new("q_exp_cutoff", x, "x is a number").into());
        }
        let a = self.one_minus();
        let t = a * x;
        if t <= -1.0 {
            Ok(f64::NEG_INFINITY)
        } else {
            Ok(t.ln_1p() / a)
        }
    }

    /// q-product `[x^(1-q) + y^(1-q) - 1]^(1/(1-q))`.
    ///
    /// Evaluated as `exp_q(ln_q x + ln_q y)`, which is the same expression
    /// written in a form that stays accurate near `q = 1`.
    pub fn product(self, x: f64, y: f64) -> Result<f64> {
        let lx = self.ln(x).map_err(|_| DomainViolation::new("q_product", x, "x > 0"))?;
        let ly = self.ln(y).map_err(|_| DomainViolation::new("q_product", y, "y > 0"))?;
        let s = lx + ly;
        self.ln_exp(s, "q_product")
            .map(f64::exp)
            .map_err(|_| {
                DomainViolation::new(
                    "q_product",
                    1.0 + self.one_minus() * s,
                    "x^(1-q) + y^(1-q) - 1 > 0",
                )
                .into()
            })
    }

    /// q-ratio `[x^(1-q) - y^(1-q) + 1]^(1/(1-q))`, the inverse of [`Deformation::product`].
    pub fn ratio(self, x: f64, y: f64) -> Result<f64> {
        let lx = self.ln(x).map_err(|_| DomainViolation::new("q_ratio", x, "x > 0"))?;
        let ly = self.ln(y).map_err(|_| DomainViolation::new("q_ratio", y, "y > 0"))?;
        let s = lx - ly;
        self.ln_exp(s, "q_ratio")
            .map(f64::exp)
            .map_err(|_| {
                DomainViolation::new(
                    "q_ratio",
                    1.0 + self.one_minus() * s,
                    "x^(1-q) - y^(1-q) + 1 > 0",
                )
                .into()
            })
    }
}

impl fmt::Display for Deformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl TryFrom<f64> for Deformation {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Deformation::new(q)
    }
}
