//! Exact lattice counting in 3-balls, the iterated integrals `N_{3,k}`, their
//! Bessel/trigonometric series with certified remainders, the lattice-sum
//! constants `C_j`, and smeared checks of the underlying distributional
//! identities.

pub mod error;
pub mod lattice_sums;
pub mod oracles;
pub mod quadrature;
pub mod radial_counts;
pub mod report;
pub mod scalar;
pub mod series;
pub mod smeared;
pub mod step_calculus;
pub mod summation;

pub use error::{Error, Result};
pub use radial_counts::{build_table, RadialCountTable, SqrtRadius};
pub use scalar::Scalar;

/// Working precision of the table-backed pipelines.
pub type Real = f64;
pub type Bounded = series::BoundedValue<Real>;
pub type Quadruple = series::CoefficientQuadruple<i64>;
