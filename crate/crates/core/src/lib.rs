//! Exact computations for a Hilbert field over `ℂ` with a diagonal connection.
//!
//! - [`poly`] and [`scalar`]: Gaussian-rational polynomials in `s, s̄` and the
//!   Wirtinger derivations.
//! - [`field`]: sections, the connection, the hermitian pairing, the
//!   smooth-structure axioms and the curvature operator.
//! - [`splitting`] and [`expansion`]: k-splittings and the closed-form sum
//!   for iterated covariant derivatives.
//! - [`analyticity`]: `(ε, M, δ)` certificates and the decay bounds they imply.

pub mod analyticity;
pub mod error;
pub mod expansion;
pub mod field;
pub mod grid;
pub mod poly;
pub mod scalar;
pub mod splitting;

pub use error::{
    AnalyticityError, ExpansionError, FieldError, GridError, ParseError, SplittingError,
};
pub use field::{ConnectionSpec, FieldSection};
pub use grid::CompactRectangle;
pub use poly::{Direction, WirtingerPolynomial};
pub use scalar::GaussianRational;
pub use splitting::{KSplitting, SplittingType, TermType};
