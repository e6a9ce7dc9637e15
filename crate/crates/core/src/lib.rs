//! q-deformed calculus of Tsallis statistics and the large-deviation
//! estimate of the q-binomial law.
//!
//! The crate is layered bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`deformed`] | q-logarithm, q-exponential, q-product, q-ratio |
//! | [`combinatorics`] | q-factorials, q-Stirling formulas, q-multinomial coefficients, Tsallis entropy |
//! | [`distribution`] | q-binomial / q-multinomial laws with a solved normalization constant |
//! | [`divergence`] | q-divergence, KL divergence, α-divergence and their correspondences |
//! | [`ldp`] | tail probabilities, empirical q-rates and the rate function |
//!
//! Everything works in double precision. Near the classical point `q = 1`
//! the deformed functions are evaluated through `expm1`/`log1p` so the
//! limit is approached without cancellation.
//!
//! ```
//! use tsallis_ldp::Deformation;
//!
//! let q = Deformation::new(0.5).unwrap();
//! assert!((q.ln(4.0).unwrap() - 2.0).abs() < 1e-15);
//! assert!((q.exp(2.0).unwrap() - 4.0).abs() < 1e-15);
//! ```

pub mod combinatorics;
pub mod deformed;
pub mod distribution;
pub mod divergence;
pub mod error;
pub mod ldp;
pub mod numeric;
pub mod simplex;

pub use combinatorics::{CountVector, DeltaEstimate, LnFactorialTable, StirlingConstants};
pub use deformed::Deformation;
pub use distribution::{QBinomialPmf, QBinomialSpec, SolverReport};
pub use error::{DomainViolation, Error, Result};
pub use ldp::RateScanRow;
pub use simplex::ProbabilityVector;
