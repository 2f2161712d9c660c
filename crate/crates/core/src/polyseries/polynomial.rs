use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

/// Dense univariate polynomial, coefficients indexed by degree, trailing
/// zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T: Scalar> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(T::one())
    }

    pub fn constant(c: T) -> Self {
        Self::new(vec![c])
    }

    /// `x`
    pub fn x() -> Self {
        Self::new(vec![T::zero(), T::one()])
    }

    /// `x^k`
    pub fn monomial(k: usize, c: T) -> Self {
        let mut coeffs = vec![T::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    /// `a + b x`
    pub fn linear(a: T, b: T) -> Self {
        Self::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.clone() * T::from_usize(k))
                .collect(),
        )
    }

    pub fn scale(&self, c: &T) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// `self(inner(x))` by Horner's scheme.
    pub fn compose(&self, inner: &Self) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Self::zero(), |acc, c| &(&acc * inner) + &Self::constant(c.clone()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Polynomial<U> {
        Polynomial::new(self.coeffs.iter().map(f).collect())
    }
}

impl<T: Scalar> Add for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn add(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Sub for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn sub(self, rhs: Self) -> Polynomial<T> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl<T: Scalar> Mul for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn mul(self, rhs: Self) -> Polynomial<T> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![T::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<T: Scalar> Neg for &Polynomial<T> {
    type Output = Polynomial<T>;

    fn neg(self) -> Polynomial<T> {
        Polynomial::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<T: Scalar> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(c: &[(i64, i64)]) -> Polynomial<BigRational> {
        Polynomial::new(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn trims_and_reports_degree() {
        let p = poly(&[(1, 1), (0, 1), (0, 1)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Polynomial::<BigRational>::zero().degree(), None);
    }

    #[test]
    fn arithmetic() {
        let a = poly(&[(1, 1), (1, 1)]);
        let b = poly(&[(1, 1), (-1, 1)]);
        assert_eq!(&a * &b, poly(&[(1, 1), (0, 1), (-1, 1)]));
        assert_eq!(&a + &b, poly(&[(2, 1)]));
        assert_eq!(&a - &a, Polynomial::zero());
        assert_eq!(a.pow(3), poly(&[(1, 1), (3, 1), (3, 1), (1, 1)]));
    }

    #[test]
    fn derivative_and_eval() {
        let p = Polynomial::monomial(3, q(1, 1));
        assert_eq!(p.derivative(), Polynomial::monomial(2, q(3, 1)));
        assert_eq!(p.eval(&q(1, 2)), q(1, 8));
    }

    #[test]
    fn compose_affine() {
        // (2x - 1)^2 = 4x^2 - 4x + 1
        let sq = Polynomial::monomial(2, q(1, 1));
        let inner = poly(&[(-1, 1), (2, 1)]);
        assert_eq!(sq.compose(&inner), poly(&[(1, 1), (-4, 1), (4, 1)]));
    }
}
