//! Exact and oracle solvers for stochastic chemical reaction systems.
//!
//! The closed-form engines ([`semilinear`], [`sobolev_jacobi`]) build
//! probability generating functions as truncated power series; the
//! [`master_equation`] and [`ssa`] modules provide independent brute-force
//! references, and [`moments`] turns generating functions into cumulants.

pub mod combinatorics;
pub mod master_equation;
pub mod moments;
pub mod polyseries;
pub mod reaction_model;
pub mod scalar;
pub mod semilinear;
pub mod sobolev_jacobi;
pub mod ssa;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use scalar::{Real, Scalar};

pub type Rational = BigRational;
pub type Integer = BigInt;
pub type Series = polyseries::TruncatedSeries<f64>;
pub type ExactSeries = polyseries::TruncatedSeries<BigRational>;
pub type RationalPolynomial = polyseries::Polynomial<BigRational>;
