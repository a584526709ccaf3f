//! Exact generation and analysis of variable-order meta-Fibonacci sequences.
//!
//! A sequence is fixed by an order function `r` with `r(0) = 1` and
//! `1 ≤ r(n) ≤ n`; its terms are `b(0) = 1` and `b(n) = b(n-1) + … + b(n-r(n))`.
//!
//! - [`rspec`]: declarative order functions and their validation.
//! - [`sequence`]: the prefix-sum engine producing exact terms.
//! - [`bounds`]: per-step growth bounds, the growth trichotomy and related checks.
//! - [`asymptotics`]: dominant roots of `x^R - x^(R-1) - … - 1` and long-run classification.
//! - [`classical`]: Fibonacci-type comparison sequences (R-bonacci, Hofstadter Q, Conway, T_{a,k}).
//! - [`extended`]: two-sided sequences over an arbitrary scalar field.

pub mod asymptotics;
pub mod bounds;
pub mod classical;
pub mod corpus;
pub mod error;
pub mod extended;
pub mod rspec;
pub mod scalar;
pub mod sequence;

pub use error::{Error, Result};
pub use rspec::{validate_rspec, IndicatorSet, Limit, OrderFunction, Piece, RSpec, SublinearSpec, TailRule};
pub use scalar::Scalar;
pub use sequence::{generate, generate_with, GenerateOptions, VrSequence};

/// Exact rational used for ratios and bounds.
pub type Ratio = num_rational::BigRational;
/// Sequence terms.
pub type Term = num_bigint::BigUint;

/// Extended sequences with exact rational values.
pub type ExactExtended = extended::ExtendedSequence<Ratio>;
/// Extended sequences in double precision.
pub type FloatExtended = extended::ExtendedSequence<f64>;
