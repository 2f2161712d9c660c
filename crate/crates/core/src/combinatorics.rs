//! Exact integer combinatorics: Stirling numbers of both kinds, falling and
//! rising factorials, binomials and the Stirling transform pair.
//!
//! Stirling numbers are served from memoized triangle tables that grow on
//! demand and are shared across threads behind a `RwLock`.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

struct Triangle {
    rows: Vec<Vec<BigInt>>,
    next_row: fn(&[BigInt], usize) -> Vec<BigInt>,
}

impl Triangle {
    fn new(next_row: fn(&[BigInt], usize) -> Vec<BigInt>) -> Self {
        Triangle { rows: vec![vec![BigInt::one()]], next_row }
    }

    fn ensure(&mut self, n: usize) {
        while self.rows.len() <= n {
            let k = self.rows.len();
            let row = (self.next_row)(&self.rows[k - 1], k);
            self.rows.push(row);
        }
    }
}

// s1(n, k) = s1(n-1, k-1) - (n-1) s1(n-1, k)
fn stirling1_row(prev: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); n + 1];
    let m = BigInt::from(n - 1);
    for k in 0..=n {
        let mut v = BigInt::zero();
        if k >= 1 && k - 1 < prev.len() {
            v += &prev[k - 1];
        }
        if k < prev.len() {
            v -= &m * &prev[k];
        }
        row[k] = v;
    }
    row
}

// S2(n, k) = S2(n-1, k-1) + k S2(n-1, k)
fn stirling2_row(prev: &[BigInt], n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::zero(); n + 1];
    for k in 0..=n {
        let mut v = BigInt::zero();
        if k >= 1 && k - 1 < prev.len() {
            v += &prev[k - 1];
        }
        if k < prev.len() {
            v += BigInt::from(k) * &prev[k];
        }
        row[k] = v;
    }
    row
}

fn lookup(cell: &'static OnceLock<RwLock<Triangle>>, init: fn() -> Triangle, n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let lock = cell.get_or_init(|| RwLock::new(init()));
    {
        let table = lock.read().expect("stirling table poisoned");
        if let Some(row) = table.rows.get(n) {
            return row[k].clone();
        }
    }
    let mut table = lock.write().expect("stirling table poisoned");
    table.ensure(n);
    table.rows[n][k].clone()
}

static STIRLING1: OnceLock<RwLock<Triangle>> = OnceLock::new();
static STIRLING2: OnceLock<RwLock<Triangle>> = OnceLock::new();

/// Signed Stirling number of the first kind `s1(k, l)`; zero for `l > k`.
pub fn stirling1(k: usize, l: usize) -> BigInt {
    lookup(&STIRLING1, || Triangle::new(stirling1_row), k, l)
}

/// Stirling number of the second kind `S2(l, k)`; zero for `k > l`.
pub fn stirling2(l: usize, k: usize) -> BigInt {
    lookup(&STIRLING2, || Triangle::new(stirling2_row), l, k)
}

/// `(n)_i = n (n-1) ... (n-i+1)`, which vanishes for `n < i`.
pub fn falling_factorial(n: u64, i: u64) -> BigInt {
    if i > n {
        return BigInt::zero();
    }
    (n - i + 1..=n).fold(BigInt::one(), |acc, f| acc * f)
}

/// Same as [`falling_factorial`] but in `f64`, for propensities and
/// generator entries.
pub fn falling_factorial_f64(n: u64, i: u64) -> f64 {
    if i > n {
        return 0.0;
    }
    (n - i + 1..=n).fold(1.0, |acc, f| acc * f as f64)
}

pub fn factorial(n: u64) -> BigInt {
    falling_factorial(n, n)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    falling_factorial(n, k) / factorial(k)
}

/// Generalized binomial `a (a-1) ... (a-k+1) / k!` for a rational upper entry.
pub fn binomial_rational(a: &BigRational, k: usize) -> BigRational {
    let mut acc = BigRational::one();
    for j in 0..k {
        acc *= a - BigRational::from_integer(j.into());
        acc /= BigRational::from_integer((j + 1).into());
    }
    acc
}

/// Rising factorial (Pochhammer symbol) `a (a+1) ... (a+k-1)`.
pub fn rising_factorial_rational(a: &BigRational, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, j| acc * (a + BigRational::from_integer(j.into())))
}

/// `b_n = sum_k S2(n, k) a_k`.
pub fn stirling_transform<T: Scalar>(a: &[T]) -> Vec<T> {
    (0..a.len())
        .map(|n| {
            (0..=n).fold(T::zero(), |acc, k| acc + T::from_bigint(&stirling2(n, k)) * a[k].clone())
        })
        .collect()
}

/// `a_k = sum_n s1(k, n) b_n`; inverse of [`stirling_transform`].
pub fn inverse_stirling_transform<T: Scalar>(b: &[T]) -> Vec<T> {
    (0..b.len())
        .map(|k| {
            (0..=k).fold(T::zero(), |acc, n| acc + T::from_bigint(&stirling1(k, n)) * b[n].clone())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    /// Alternating-sum definition of S2, independent of the recurrence.
    fn stirling2_explicit(l: u64, k: u64) -> BigInt {
        let mut acc = BigInt::zero();
        for j in 0..=k {
            let term = binomial(k, j) * num_traits::pow(BigInt::from(j), l as usize);
            if (k - j) % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc / factorial(k)
    }

    /// Elementary-symmetric-sum definition of the unsigned s1, via subsets.
    fn stirling1_explicit(k: usize, l: usize) -> BigInt {
        if k == 0 {
            return if l == 0 { BigInt::one() } else { BigInt::zero() };
        }
        if l == 0 || l > k {
            return BigInt::zero();
        }
        // [k, l] = sum over (l-1)-subsets {i_1 < ... } of {1..k-1} of (k-1)! / prod i
        let pool: Vec<usize> = (1..k).collect();
        let mut total = BigRational::zero();
        let size = l - 1;
        let mut stack = vec![(0usize, 0usize, BigRational::one())];
        while let Some((start, taken, prod)) = stack.pop() {
            if taken == size {
                total += prod;
                continue;
            }
            for idx in start..pool.len() {
                let next = &prod / BigRational::from_integer(pool[idx].into());
                stack.push((idx + 1, taken + 1, next));
            }
        }
        let unsigned = (total * BigRational::from_integer(factorial(k as u64 - 1))).to_integer();
        if (k - l) % 2 == 0 {
            unsigned
        } else {
            -unsigned
        }
    }

    /// Counts set partitions of {0..n} into exactly k blocks by restricted growth strings.
    fn count_set_partitions(n: usize, k: usize) -> u64 {
        fn go(pos: usize, n: usize, blocks: usize, k: usize) -> u64 {
            if pos == n {
                return u64::from(blocks == k);
            }
            let mut total = 0;
            for b in 0..=blocks {
                let nb = if b == blocks { blocks + 1 } else { blocks };
                if nb <= k {
                    total += go(pos + 1, n, nb, k);
                }
            }
            total
        }
        go(0, n, 0, k)
    }

    #[test]
    fn stirling1_examples() {
        assert_eq!(stirling1(3, 1), big(2));
        assert_eq!(stirling1(0, 0), big(1));
        assert_eq!(stirling1(4, 3), big(-6));
        assert_eq!(stirling1(3, 5), big(0));
        assert_eq!(stirling1(5, 0), big(0));
    }

    #[test]
    fn stirling2_examples() {
        assert_eq!(stirling2(3, 3), big(1));
        assert_eq!(stirling2(0, 1), big(0));
        assert_eq!(stirling2(4, 2), big(count_set_partitions(4, 2) as i64));
        assert_eq!(stirling2(4, 2), big(7));
    }

    #[test]
    fn identities_from_definitions() {
        for n in 1..15u64 {
            let nu = n as usize;
            let sign = if n % 2 == 1 { 1 } else { -1 };
            assert_eq!(stirling1(nu, 1), factorial(n - 1) * sign);
            assert_eq!(stirling1(nu, nu), big(1));
            assert_eq!(stirling1(nu, nu - 1), -binomial(n, 2));
            assert_eq!(stirling1(nu, 0), big(0));
            assert_eq!(stirling2(nu, 1), big(1));
            assert_eq!(stirling2(nu, nu), big(1));
        }
    }

    #[test]
    fn recurrence_matches_explicit_formulas() {
        for l in 0..=20u64 {
            for k in 0..=l {
                assert_eq!(stirling2(l as usize, k as usize), stirling2_explicit(l, k), "S2({l},{k})");
            }
        }
        for k in 0..=10 {
            for l in 0..=k {
                assert_eq!(stirling1(k, l), stirling1_explicit(k, l), "s1({k},{l})");
            }
        }
        for n in 0..8 {
            for k in 0..=n {
                assert_eq!(stirling2(n, k), big(count_set_partitions(n, k) as i64));
            }
        }
    }

    #[test]
    fn orthogonality_up_to_twelve() {
        for k in 0..=12 {
            for l in 0..=12 {
                let a: BigInt = (0..=12).map(|n| stirling1(k, n) * stirling2(n, l)).sum();
                let b: BigInt = (0..=12).map(|n| stirling2(l, n) * stirling1(n, k)).sum();
                let delta = big(i64::from(k == l));
                assert_eq!(a, delta);
                assert_eq!(b, delta);
            }
        }
    }

    #[test]
    fn falling_factorial_examples() {
        assert_eq!(falling_factorial(5, 2), big(20));
        assert_eq!(falling_factorial(2, 3), big(0));
        assert_eq!(falling_factorial(7, 0), big(1));
        assert_eq!(falling_factorial_f64(100, 2), 9900.0);
        for n in 0..=30 {
            for i in 0..=30 {
                assert_eq!(falling_factorial(n, i), factorial(i) * binomial(n, i));
            }
        }
    }

    #[test]
    fn generalized_binomial_and_pochhammer() {
        assert_eq!(binomial_rational(&q(5, 1), 2), q(10, 1));
        assert_eq!(binomial_rational(&q(1, 2), 2), q(-1, 8));
        assert_eq!(binomial_rational(&q(-1, 1), 3), q(-1, 1));
        assert_eq!(rising_factorial_rational(&q(1, 2), 3), q(15, 8));
        assert_eq!(rising_factorial_rational(&q(-2, 1), 3), q(0, 1));
    }

    #[test]
    fn stirling_transform_examples() {
        let ones = vec![q(1, 1); 4];
        assert_eq!(stirling_transform(&ones), vec![q(1, 1), q(1, 1), q(2, 1), q(5, 1)]);
        let zeros = vec![q(0, 1); 5];
        assert_eq!(stirling_transform(&zeros), zeros);
        let a = vec![q(3, 1), q(-1, 1), q(2, 1)];
        assert_eq!(inverse_stirling_transform(&stirling_transform(&a)), a);
    }

    proptest! {
        #[test]
        fn transform_roundtrip(v in proptest::collection::vec(-1000i64..1000, 0..14)) {
            let a: Vec<BigRational> = v.iter().map(|&x| q(x, 7)).collect();
            prop_assert_eq!(inverse_stirling_transform(&stirling_transform(&a)), a.clone());
            prop_assert_eq!(stirling_transform(&inverse_stirling_transform(&a)), a);
        }
    }
}
