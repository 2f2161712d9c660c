use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{check_beta, int, is_minus_one, SobolevError};
use crate::combinatorics::{binomial, binomial_rational, factorial, rising_factorial_rational};
use crate::polyseries::Polynomial;
use crate::scalar::rational_to_f64;

type QPoly = Polynomial<BigRational>;

/// `base + pow2 * 2^beta`, exact for rational `beta`.
///
/// Sobolev inner products with weight `(x + 1)^{beta + 1}` produce this
/// shape; for non-integer `beta` both parts must vanish for the value to be
/// zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SobolevValue {
    pub base: BigRational,
    pub pow2: BigRational,
}

impl SobolevValue {
    pub fn rational(v: BigRational) -> Self {
        SobolevValue { base: v, pow2: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero() && self.pow2.is_zero()
    }

    /// Collapses to a single rational when `2^beta` is rational.
    pub fn to_rational(&self, beta: &BigRational) -> Option<BigRational> {
        if self.pow2.is_zero() {
            return Some(self.base.clone());
        }
        if !beta.is_integer() {
            return None;
        }
        let e = beta.to_integer().to_i64()?;
        let two = int(2);
        let p = if e >= 0 { num_traits::pow(two, e as usize) } else { num_traits::pow(two, (-e) as usize).recip() };
        Some(&self.base + &self.pow2 * p)
    }

    pub fn to_f64(&self, beta: &BigRational) -> f64 {
        rational_to_f64(&self.base) + rational_to_f64(&self.pow2) * 2f64.powf(rational_to_f64(beta))
    }
}

impl fmt::Display for SobolevValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pow2.is_zero() {
            write!(f, "{}", self.base)
        } else {
            write!(f, "{} + {} * 2^beta", self.base, self.pow2)
        }
    }
}

fn pow_linear(c: i64, k: usize) -> QPoly {
    Polynomial::linear(int(c), int(1)).pow(k)
}

/// Monic Sobolev-Jacobi polynomial `P~_n^{(-1, beta)}`; for `beta = -1` the
/// degree-one member is `x` (the symmetric choice of boundary weights).
pub fn sj_polynomial(beta: &BigRational, n: usize) -> Result<QPoly, SobolevError> {
    check_beta(beta)?;
    let minus_one = is_minus_one(beta);
    match n {
        0 => return Ok(Polynomial::one()),
        1 => return Ok(if minus_one { Polynomial::x() } else { pow_linear(-1, 1) }),
        _ => {}
    }
    // Expand sum_k c_k (x-1)^{n-k} (x+1)^k in u = x - 1 first, using
    // (x+1)^k = (u+2)^k, on integer numerators over a common denominator.
    let nn = n as u64;
    let (lo, weights, norm): (usize, Vec<BigRational>, BigRational) = if minus_one {
        let w = (0..n)
            .map(|k| {
                if k == 0 {
                    BigRational::zero()
                } else {
                    BigRational::from_integer(binomial(nn - 1, k as u64) * binomial(nn - 1, (n - k) as u64))
                }
            })
            .collect();
        (1, w, BigRational::from_integer(binomial(2 * nn - 2, nn)))
    } else {
        let n_beta = int(n as i64) + beta;
        let w = (0..n)
            .map(|k| BigRational::from_integer(binomial(nn - 1, k as u64)) * binomial_rational(&n_beta, n - k))
            .collect();
        (0, w, binomial_rational(&(int(2 * n as i64 - 1) + beta), n))
    };
    let den = weights.iter().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
    let mut in_u = vec![BigInt::zero(); n + 1];
    for (k, c) in weights.iter().enumerate().skip(lo) {
        let ck = c.numer() * (&den / c.denom());
        // binom(k, i) 2^{k-i}, built along the row
        let mut b = BigInt::one();
        for i in 0..=k {
            in_u[n - k + i] += &ck * (&b << (k - i));
            b = b * (k - i) / (i + 1);
        }
    }
    let shifted = compose_affine_int(&in_u, &BigInt::from(-1), &BigInt::one(), &BigInt::one());
    let scale = (norm * BigRational::from_integer(den)).recip();
    Ok(Polynomial::new(shifted.into_iter().map(|c| BigRational::from_integer(c) * &scale).collect()))
}

/// Integer coefficients of `L^d p((a + b x) / L)` for integer `p` of degree `d`.
fn compose_affine_int(p: &[BigInt], a: &BigInt, b: &BigInt, l: &BigInt) -> Vec<BigInt> {
    let Some(d) = p.len().checked_sub(1) else {
        return Vec::new();
    };
    let mut acc = vec![p[d].clone()];
    let mut lpow = BigInt::one();
    for j in (0..d).rev() {
        lpow *= l;
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            next[i] += c * a;
            next[i + 1] += c * b;
        }
        next[0] += &p[j] * &lpow;
        acc = next;
    }
    acc
}

/// `p(a + b x)` for rational `p`, `a`, `b`, without per-step normalization.
pub(super) fn compose_affine(p: &QPoly, a: &BigRational, b: &BigRational) -> QPoly {
    let coeffs = p.coeffs();
    if coeffs.is_empty() {
        return Polynomial::zero();
    }
    let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
    let l = a.denom().lcm(b.denom());
    let ai = a.numer() * (&l / a.denom());
    let bi = b.numer() * (&l / b.denom());
    let out = compose_affine_int(&ints, &ai, &bi, &l);
    let scale = BigRational::from_integer(den * num_traits::pow(l, coeffs.len() - 1)).recip();
    Polynomial::new(out.into_iter().map(|c| BigRational::from_integer(c) * &scale).collect())
}

/// `Phi(p, q)`: `p(1)q(1) + p(-1)q(-1) + int p'q'` for `beta = -1`, and
/// `p(1)q(1) + int (x+1)^{beta+1} p'q'` otherwise (unit boundary weights).
pub fn phi(beta: &BigRational, p: &QPoly, q: &QPoly) -> Result<SobolevValue, SobolevError> {
    check_beta(beta)?;
    let one = int(1);
    let boundary = p.eval(&one) * q.eval(&one);
    let dd = &p.derivative() * &q.derivative();
    if is_minus_one(beta) {
        let m1 = -one;
        let integral: BigRational = dd
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, c)| c * int(2) / int(k as i64 + 1))
            .sum();
        return Ok(SobolevValue::rational(boundary + p.eval(&m1) * q.eval(&m1) + integral));
    }
    // Expand p'q' in powers of (x - 1) and integrate each against (x+1)^{beta+1}:
    // int (x-1)^a (x+1)^b = (-1)^a a! 2^{a+b+1} / prod_{j=1}^{a+1} (b + j).
    let shifted = dd.compose(&pow_linear(1, 1));
    let b = beta + int(1);
    let mut pow2 = BigRational::zero();
    for (a, c) in shifted.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let sign = if a % 2 == 0 { int(1) } else { int(-1) };
        let denom = rising_factorial_rational(&(&b + int(1)), a + 1);
        // 2^{a+b+1} = 2^{a+2} * 2^beta
        let two_pow = BigRational::from_integer(BigInt::one() << (a + 2));
        pow2 += c * sign * BigRational::from_integer(factorial(a as u64)) * two_pow / denom;
    }
    Ok(SobolevValue { base: boundary, pow2 })
}

/// Closed-form `Phi(P~_n, P~_n)`.
///
/// For `beta = -1`: 2, 4, and `n^2 K_{n-1}` with
/// `K_{n-1} = 2^{2n-1} ((n-1)!)^4 / ((2n-2)! (2n-1)!)`.
/// For `beta > -1`: 1 and `n^2 kappa_{n-1}` with
/// `kappa_{n-1} = 2^{2n+beta} ((n-1)! Gamma(n+beta+1))^2 / (Gamma(2n+beta) Gamma(2n+beta+1))`.
pub fn sj_norm(beta: &BigRational, n: usize) -> Result<SobolevValue, SobolevError> {
    check_beta(beta)?;
    let n64 = n as u64;
    if is_minus_one(beta) {
        let v = match n {
            0 => int(2),
            1 => int(4),
            _ => {
                let f = BigRational::from_integer(factorial(n64 - 1));
                let k = BigRational::from_integer(BigInt::one() << (2 * n - 1)) * num_traits::pow(f, 4)
                    / BigRational::from_integer(factorial(2 * n64 - 2) * factorial(2 * n64 - 1));
                int((n * n) as i64) * k
            }
        };
        return Ok(SobolevValue::rational(v));
    }
    if n == 0 {
        return Ok(SobolevValue::rational(int(1)));
    }
    // Gamma(n+beta+1)/Gamma(2n+beta) = 1/(n+beta+1)_{n-1};
    // Gamma(n+beta+1)/Gamma(2n+beta+1) = 1/(n+beta+1)_n.
    let start = int(n as i64 + 1) + beta;
    let r1 = rising_factorial_rational(&start, n - 1);
    let r2 = rising_factorial_rational(&start, n);
    let f = BigRational::from_integer(factorial(n64 - 1));
    let pow2 = int((n * n) as i64) * BigRational::from_integer(BigInt::one() << (2 * n)) * &f * &f / (r1 * r2);
    debug_assert!(pow2.is_positive());
    Ok(SobolevValue { base: BigRational::zero(), pow2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn poly(c: &[(i64, i64)]) -> QPoly {
        Polynomial::new(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn low_degree_members() {
        let m1 = q(-1, 1);
        assert_eq!(sj_polynomial(&m1, 0).unwrap(), poly(&[(1, 1)]));
        assert_eq!(sj_polynomial(&m1, 1).unwrap(), poly(&[(0, 1), (1, 1)]));
        assert_eq!(sj_polynomial(&m1, 2).unwrap(), poly(&[(-1, 1), (0, 1), (1, 1)]));
        assert_eq!(sj_polynomial(&m1, 3).unwrap(), poly(&[(0, 1), (-1, 1), (0, 1), (1, 1)]));
        let zero = q(0, 1);
        assert_eq!(sj_polynomial(&zero, 1).unwrap(), poly(&[(-1, 1), (1, 1)]));
        assert_eq!(sj_polynomial(&zero, 2).unwrap(), poly(&[(-1, 3), (-2, 3), (1, 1)]));
        assert!(sj_polynomial(&q(-3, 2), 2).is_err());
    }

    #[test]
    fn monic_with_exact_degree() {
        for beta in [q(-1, 1), q(0, 1), q(1, 2), q(3, 1), q(7, 3)] {
            for n in 0..=12 {
                let p = sj_polynomial(&beta, n).unwrap();
                assert_eq!(p.degree(), Some(n));
                assert_eq!(p.coeff(n), q(1, 1));
            }
        }
    }

    #[test]
    fn affine_composition_matches_horner() {
        let p = poly(&[(3, 7), (-1, 2), (0, 1), (5, 3), (2, 9)]);
        for (a, b) in [(q(-1, 1), q(1, 1)), (q(-1, 3), q(4, 3)), (q(0, 1), q(2, 5)), (q(7, 2), q(-1, 6))] {
            let inner = Polynomial::linear(a.clone(), b.clone());
            assert_eq!(compose_affine(&p, &a, &b), p.compose(&inner));
        }
        assert!(compose_affine(&Polynomial::zero(), &q(1, 1), &q(1, 1)).is_zero());
    }

    #[test]
    fn norm_examples() {
        let m1 = q(-1, 1);
        assert_eq!(sj_norm(&m1, 0).unwrap(), SobolevValue::rational(q(2, 1)));
        assert_eq!(sj_norm(&m1, 1).unwrap(), SobolevValue::rational(q(4, 1)));
        assert_eq!(sj_norm(&m1, 2).unwrap(), SobolevValue::rational(q(8, 3)));
        let zero = q(0, 1);
        assert_eq!(sj_norm(&zero, 0).unwrap().to_rational(&zero), Some(q(1, 1)));
        assert_eq!(sj_norm(&zero, 2).unwrap().to_rational(&zero), Some(q(16, 9)));
    }

    /// Midpoint-free check of the integral reduction: for integer beta the
    /// weight is a polynomial and the integral can be done term by term.
    fn phi_direct_integer_beta(beta: i64, p: &QPoly, qq: &QPoly) -> BigRational {
        let weight = pow_linear(1, (beta + 1) as usize);
        let integrand = &(&weight * &p.derivative()) * &qq.derivative();
        let antideriv: Vec<BigRational> =
            std::iter::once(q(0, 1)).chain(integrand.coeffs().iter().enumerate().map(|(k, c)| c / int(k as i64 + 1))).collect();
        let anti = Polynomial::new(antideriv);
        let one = int(1);
        p.eval(&one) * qq.eval(&one) + anti.eval(&one) - anti.eval(&-one)
    }

    #[test]
    fn reduction_matches_direct_integration() {
        for beta in [0i64, 1, 3] {
            let b = q(beta, 1);
            for m in 0..=6 {
                for n in 0..=6 {
                    let pm = Polynomial::monomial(m, q(1, 1));
                    let pn = sj_polynomial(&b, n).unwrap();
                    let via = phi(&b, &pm, &pn).unwrap().to_rational(&b).unwrap();
                    assert_eq!(via, phi_direct_integer_beta(beta, &pm, &pn), "beta {beta} m {m} n {n}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_and_norms() {
        for beta in [q(-1, 1), q(0, 1), q(1, 2), q(3, 1)] {
            let polys: Vec<QPoly> = (0..=10).map(|n| sj_polynomial(&beta, n).unwrap()).collect();
            for m in 0..=10 {
                for n in m + 1..=10 {
                    assert!(phi(&beta, &polys[m], &polys[n]).unwrap().is_zero(), "beta {beta} ({m},{n})");
                }
                assert_eq!(phi(&beta, &polys[m], &polys[m]).unwrap(), sj_norm(&beta, m).unwrap(), "beta {beta} n {m}");
            }
        }
    }
}
