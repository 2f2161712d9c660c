//! Spectral solution of the one-species binary family
//! `{A -> 0 (r_d), 2A -> 0 (r_k), 2A -> A (r_l)}` in the basis of
//! Sobolev-Jacobi polynomials `P~_n^{(-1, beta)}` with `beta = r_d / sigma - 1`,
//! `sigma = r_k + r_l`.
//!
//! Basis polynomials, norms and decomposition coefficients are exact
//! rationals. The time-dependent sum has enormous cancellation between
//! terms, so the exponential weights are evaluated in high-precision fixed
//! point and rounded to `f64` only after summation.

mod basis;
mod coeffs;
mod fixed;
mod solve;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

pub use basis::{phi, sj_norm, sj_polynomial, SobolevValue};
pub use coeffs::{coeff_a, coeff_b, coeff_b_table, hyp2f1_terminating};
pub use solve::{binary_rates, eigencheck, eigenrate, solve_binary, solve_binary_system, BinarySolution};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SobolevError {
    #[error("beta = {0} lies below -1")]
    BetaOutOfRange(BigRational),
    #[error("hypergeometric series hits a pole at c + {0} = 0")]
    Pole(usize),
    #[error("rates must be nonnegative")]
    NegativeRate,
    #[error("time must be finite and nonnegative")]
    InvalidTime,
    #[error("system is not in the binary family {{A -> 0, 2A -> 0, 2A -> A}}")]
    NotBinaryFamily,
    #[error("binary rates r_k + r_l must be positive")]
    NoBinaryReaction,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn check_beta(beta: &BigRational) -> Result<(), SobolevError> {
    if *beta < -BigRational::one() {
        Err(SobolevError::BetaOutOfRange(beta.clone()))
    } else {
        Ok(())
    }
}

fn is_minus_one(beta: &BigRational) -> bool {
    *beta == -BigRational::one()
}
