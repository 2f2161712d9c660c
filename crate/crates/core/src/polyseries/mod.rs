//! Truncated power series and exact polynomials: the carriers for
//! probability generating functions and orthogonal-polynomial bases.

mod polynomial;
mod series;

pub use polynomial::Polynomial;
pub use series::{Exps, TruncatedSeries, MAX_VARS};

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("series shapes differ: (vars, max_deg) {left:?} vs {right:?}")]
    ShapeMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("expected {expected} variables, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("monomial of degree {degree} lies beyond the cutoff {max_deg}")]
    BeyondCutoff { degree: usize, max_deg: usize },
    #[error("operation needs a nonzero constant term")]
    ZeroConstantTerm,
    #[error("operation needs a zero constant term")]
    NonZeroConstantTerm,
    #[error("outer function is not a polynomial and the inner constant term is nonzero")]
    NotPolynomial,
}

/// Taylor expansion of `exp(p(x))` for a univariate polynomial argument.
pub fn exp_poly<T: Real>(p: &Polynomial<T>, max_deg: usize) -> TruncatedSeries<T> {
    TruncatedSeries::from_polynomial(p, max_deg).exp()
}
