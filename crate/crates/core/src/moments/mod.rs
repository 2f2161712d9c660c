//! Moment machinery: evolution operators for the exponential and factorial
//! moment generating functions, factorial-moment ODE rows, first-order
//! closure detection and cumulant extraction from generating functions.

mod factorial;
mod operators;

pub use factorial::{factorial_moment_system, first_order_closure, FirstOrderClosure, MomentOde};
pub use operators::{
    build_egf_operator, build_fmgf_operator, stirling_consistent, MultiPoly, OperatorRep, OperatorTerm, Prefactor,
};

use crate::combinatorics::{falling_factorial, stirling_transform};
use crate::polyseries::TruncatedSeries;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MomentError {
    #[error("cumulants above order 3 are not supported (asked for {0})")]
    UnsupportedOrder(usize),
    #[error("generating function is not normalized: P(1) = {0}")]
    NotNormalized(f64),
    #[error("cumulants need a univariate generating function")]
    NotUnivariate,
}

pub const MAX_CUMULANT_ORDER: usize = 3;
const NORMALIZATION_TOL: f64 = 1e-6;

/// Cumulants `c_1..c_order` of the distribution with probabilities `p[n]`.
///
/// Factorial moments `f_k = P^{(k)}(1)` are turned into raw moments with
/// Stirling numbers of the second kind and then into cumulants by the usual
/// recursion. The distribution is renormalized by `P(1)`.
pub fn cumulants_from_coeffs<T: Scalar>(p: &[T], order: usize) -> Result<Vec<T>, MomentError> {
    if order > MAX_CUMULANT_ORDER {
        return Err(MomentError::UnsupportedOrder(order));
    }
    let mass = p.iter().fold(T::zero(), |acc, v| acc + v.clone());
    let mass_f = Scalar::to_f64(&mass);
    if !((mass_f - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(MomentError::NotNormalized(mass_f));
    }
    let factorial: Vec<T> = (0..=order)
        .map(|k| {
            let s = p.iter().enumerate().fold(T::zero(), |acc, (n, v)| {
                acc + T::from_bigint(&falling_factorial(n as u64, k as u64)) * v.clone()
            });
            s / mass.clone()
        })
        .collect();
    let raw = stirling_transform(&factorial);
    // c_n = m_n - sum_{j=1}^{n-1} binom(n-1, j-1) c_j m_{n-j}
    let mut c: Vec<T> = Vec::with_capacity(order);
    for n in 1..=order {
        let mut v = raw[n].clone();
        for j in 1..n {
            let b = T::from_bigint(&crate::combinatorics::binomial(n as u64 - 1, j as u64 - 1));
            v = v - b * c[j - 1].clone() * raw[n - j].clone();
        }
        c.push(v);
    }
    Ok(c)
}

/// [`cumulants_from_coeffs`] on a univariate truncated series.
pub fn cumulants_from_pgf<T: Scalar>(p: &TruncatedSeries<T>, order: usize) -> Result<Vec<T>, MomentError> {
    if p.vars() != 1 {
        return Err(MomentError::NotUnivariate);
    }
    let coeffs: Vec<T> = (0..=p.max_deg()).map(|n| p.coeff(n)).collect();
    cumulants_from_coeffs(&coeffs, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semilinear::pgf;
    use crate::Series;
    use num_rational::BigRational;

    #[test]
    fn poisson_cumulants_are_the_rate() {
        let x = Series::var(1, 80, 0);
        let p = pgf::pois(2.0, &x);
        let c = cumulants_from_pgf(&p, 3).unwrap();
        for v in c {
            assert!((v - 2.0).abs() < 1e-10, "{v}");
        }
    }

    #[test]
    fn deterministic_state() {
        let mut p = vec![0.0; 8];
        p[7] = 1.0;
        assert_eq!(cumulants_from_coeffs(&p, 3).unwrap(), vec![7.0, 0.0, 0.0]);
    }

    #[test]
    fn exact_binomial_cumulants() {
        // Bin(3, 1/2): mean 3/2, variance 3/4, third cumulant 0
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let p = vec![q(1, 8), q(3, 8), q(3, 8), q(1, 8)];
        assert_eq!(cumulants_from_coeffs(&p, 3).unwrap(), vec![q(3, 2), q(3, 4), q(0, 1)]);
    }

    #[test]
    fn geometric_cumulants() {
        // P(n) = (1-q) q^n: mean q/(1-q), variance q/(1-q)^2, c3 = q(1+q)/(1-q)^3
        let qq = 0.3f64;
        let p: Vec<f64> = (0..200).map(|n| (1.0 - qq) * qq.powi(n)).collect();
        let c = cumulants_from_coeffs(&p, 3).unwrap();
        let r = 1.0 - qq;
        assert!((c[0] - qq / r).abs() < 1e-12);
        assert!((c[1] - qq / (r * r)).abs() < 1e-12);
        assert!((c[2] - qq * (1.0 + qq) / r.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(cumulants_from_coeffs(&[1.0], 4), Err(MomentError::UnsupportedOrder(4)));
        assert!(matches!(cumulants_from_coeffs(&[0.5, 0.4], 1), Err(MomentError::NotNormalized(_))));
        let s = Series::var(2, 4, 0);
        assert_eq!(cumulants_from_pgf(&s, 1), Err(MomentError::NotUnivariate));
    }
}
