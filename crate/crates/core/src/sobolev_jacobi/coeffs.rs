use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{check_beta, int, is_minus_one, SobolevError};
use crate::combinatorics::{binomial, factorial, rising_factorial_rational};

/// Terminating `2F1(-m, b; c; z) = sum_{j=0}^{m} (-m)_j (b)_j / ((c)_j j!) z^j`.
pub fn hyp2f1_terminating(m: usize, b: &BigRational, c: &BigRational, z: &BigRational) -> Result<BigRational, SobolevError> {
    let mut total = BigRational::one();
    let mut term = BigRational::one();
    for j in 0..m {
        let cj = c + int(j as i64);
        if cj.is_zero() {
            return Err(SobolevError::Pole(j));
        }
        term = term * (int(j as i64) - int(m as i64)) * (b + int(j as i64)) * z / (cj * int(j as i64 + 1));
        total += &term;
    }
    Ok(total)
}

/// `B^{M,n}_{-1} = binom(2n, n) M! ((M+n)/2)! / ((M+n)! ((M-n)/2)!)` for even `M + n`.
fn coeff_b_minus_one(m: usize, n: usize) -> BigRational {
    if n > m || (m + n) % 2 == 1 {
        return BigRational::zero();
    }
    let (m64, n64) = (m as u64, n as u64);
    BigRational::new(
        binomial(2 * n64, n64) * factorial(m64) * factorial((m64 + n64) / 2),
        factorial(m64 + n64) * factorial((m64 - n64) / 2),
    )
}

/// `M (2n+beta)! / (2^{n-1} n! (n+beta+1)!)`, the prefactor of `b^{M,n}_beta`.
fn b_prefactor(m: usize, n: usize, beta: &BigRational) -> BigRational {
    // (2n+beta)!/(n+beta+1)! = (n+beta+2)_{n-1}
    let ratio = rising_factorial_rational(&(int(n as i64 + 2) + beta), n - 1);
    int(m as i64) * ratio / (BigRational::from_integer(BigInt::one() << (n - 1)) * BigRational::from_integer(factorial(n as u64)))
}

/// Coefficient of `P~_n^{(-1,beta)}` in the expansion of `x^M`.
pub fn coeff_b(m: usize, n: usize, beta: &BigRational) -> Result<BigRational, SobolevError> {
    check_beta(beta)?;
    if is_minus_one(beta) {
        return Ok(coeff_b_minus_one(m, n));
    }
    if n > m {
        return Ok(BigRational::zero());
    }
    if n == 0 {
        return Ok(BigRational::one());
    }
    let c = int(n as i64 + 2) + beta;
    let two = int(2);
    let mut sum = BigRational::zero();
    for k in 0..n {
        let f = hyp2f1_terminating(m - 1, &int((n - k) as i64), &c, &two)?;
        let w = BigRational::from_integer(binomial(n as u64 - 1, k as u64));
        if (n - 1 - k) % 2 == 0 {
            sum += w * f;
        } else {
            sum -= w * f;
        }
    }
    Ok(b_prefactor(m, n, beta) * sum)
}

/// All `B^{P,n}` for `0 <= n <= P <= m_max`, indexed `[P][n]`.
///
/// Same values as [`coeff_b`], with the hypergeometric sums reorganized so
/// that the `k`-sum is shared between all `P`:
/// `sum_k binom(n-1,k)(-1)^{n-1-k} (n-k)_j` depends only on `(n, j)`.
pub fn coeff_b_table(m_max: usize, beta: &BigRational) -> Result<Vec<Vec<BigRational>>, SobolevError> {
    check_beta(beta)?;
    if is_minus_one(beta) {
        return Ok((0..=m_max).map(|p| (0..=p).map(|n| coeff_b_minus_one(p, n)).collect()).collect());
    }
    let mut table: Vec<Vec<BigRational>> = (0..=m_max).map(|p| vec![BigRational::zero(); p + 1]).collect();
    for row in table.iter_mut() {
        row[0] = BigRational::one();
    }
    let two = int(2);
    for n in 1..=m_max {
        let c = int(n as i64 + 2) + beta;
        // s[j] = sum_k binom(n-1,k) (-1)^{n-1-k} (n-k)_j (rising), as integers
        let s: Vec<BigInt> = (0..m_max)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let rising = ((n - k) as u64..(n - k + j) as u64).fold(BigInt::one(), |acc, v| acc * v);
                        let v = binomial(n as u64 - 1, k as u64) * rising;
                        if (n - 1 - k) % 2 == 0 {
                            v
                        } else {
                            -v
                        }
                    })
                    .sum()
            })
            .collect();
        // u[j] = 2^j / ((c)_j j!) for j < m_max
        let mut u = Vec::with_capacity(m_max);
        let mut acc = BigRational::one();
        for j in 0..m_max {
            u.push(acc.clone());
            let cj = &c + int(j as i64);
            if cj.is_zero() {
                return Err(SobolevError::Pole(j));
            }
            acc = acc * &two / (cj * int(j as i64 + 1));
        }
        for (p, row) in table.iter_mut().enumerate().skip(n) {
            // (1-P)_j = (-1)^j (P-1)!/(P-1-j)!
            let mut sum = BigRational::zero();
            let mut falling = BigInt::one();
            for j in 0..p {
                let term = BigRational::from_integer(&falling * &s[j]) * &u[j];
                if j % 2 == 0 {
                    sum += term;
                } else {
                    sum -= term;
                }
                falling *= (p - 1 - j) as u64;
            }
            row[n] = b_prefactor(p, n, beta) * sum;
        }
    }
    Ok(table)
}

/// `A^{M,n} = sum_{P=n}^{M} binom(M,P) (rl/2)^{M-P} (1 - rl/2)^P B^{P,n}` with
/// `beta = rbar_d - 1`.
pub fn coeff_a(m: usize, n: usize, rbar_d: &BigRational, rbar_l: &BigRational) -> Result<BigRational, SobolevError> {
    let beta = rbar_d - int(1);
    let table = coeff_b_table(m, &beta)?;
    Ok(coeff_a_from_table(m, n, rbar_l, &table))
}

pub(super) fn coeff_a_from_table(m: usize, n: usize, rbar_l: &BigRational, table: &[Vec<BigRational>]) -> BigRational {
    if n > m {
        return BigRational::zero();
    }
    let h = rbar_l / int(2);
    let g = int(1) - &h;
    (n..=m)
        .map(|p| {
            BigRational::from_integer(binomial(m as u64, p as u64))
                * num_traits::pow(h.clone(), m - p)
                * num_traits::pow(g.clone(), p)
                * &table[p][n]
        })
        .sum()
}
