//! Fixed-point arithmetic on `BigInt` scaled by `2^bits`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::scalar::rational_to_f64;

/// `round(v * 2^bits)`.
pub(super) fn to_fixed(v: &BigRational, bits: u64) -> BigInt {
    let num = v.numer() << bits;
    let den = v.denom();
    let (q, r) = num.div_mod_floor(den);
    if (r << 1u32) >= *den {
        q + 1
    } else {
        q
    }
}

/// `log2 |v|` rounded up, or 0 for zero.
pub(super) fn magnitude_bits(v: &BigRational) -> i64 {
    if v.is_zero() {
        return 0;
    }
    v.numer().abs().bits() as i64 - v.denom().bits() as i64 + 1
}

/// `e^{-x} * 2^bits` for `x >= 0`, with absolute error of a few units.
///
/// Halves the argument until it is below 1/2, sums the Taylor series and
/// squares back up, carrying enough guard bits to absorb the error doubling
/// of each squaring.
pub(super) fn exp_neg_fixed(x: &BigRational, bits: u64) -> BigInt {
    debug_assert!(!x.is_negative());
    let approx = rational_to_f64(x);
    if approx > bits as f64 {
        // e^{-x} < 2^{-bits}
        return BigInt::zero();
    }
    let halvings = if approx <= 0.5 { 0 } else { (approx / 0.5).log2().ceil() as u64 + 1 };
    let work = bits + halvings + 32;
    let y = to_fixed(x, work) >> halvings;
    let one = BigInt::from(1) << work;
    let mut sum = one.clone();
    let mut term = one;
    let mut k = 1u64;
    loop {
        term = -(term * &y >> work) / k;
        if term.is_zero() {
            break;
        }
        sum += &term;
        k += 1;
    }
    for _ in 0..halvings {
        sum = (&sum * &sum) >> work;
    }
    sum >> (work - bits)
}
