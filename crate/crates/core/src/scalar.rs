//! Scalar abstraction shared by the series, polynomial and moment code.
//!
//! Every algebraic routine in this crate is written against [`Scalar`], so the
//! same code runs in `f64`, `f32` or exact [`BigRational`] arithmetic.
//! Routines that need transcendental functions (`exp`, `ln`, real powers) are
//! bounded on [`Real`] instead, which only the floating-point types implement.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, Num, ToPrimitive, Zero};

/// A field element usable as a series or polynomial coefficient.
pub trait Scalar: Num + Neg<Output = Self> + Clone + Debug + Display + Send + Sync + 'static {
    fn from_i64(v: i64) -> Self;

    fn from_bigint(v: &BigInt) -> Self;

    fn from_rational(v: &BigRational) -> Self;

    /// Lossy view used at reporting and tolerance boundaries.
    fn to_f64(&self) -> f64;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn from_usize(v: usize) -> Self {
        Self::from_i64(i64::try_from(v).expect("index exceeds i64"))
    }

    /// `true` for exact arithmetic, where equality tests are meaningful.
    fn is_exact() -> bool {
        false
    }
}

/// Floating-point scalars (f32 / f64).
pub trait Real: Scalar + Float + FromPrimitive + Copy {
    fn from_f64_lossy(v: f64) -> Self {
        <Self as FromPrimitive>::from_f64(v).expect("finite conversion")
    }
}

macro_rules! impl_float_scalar {
    ($f:ty) => {
        impl Scalar for $f {
            fn from_i64(v: i64) -> Self {
                v as $f
            }

            fn from_bigint(v: &BigInt) -> Self {
                v.to_f64().map(|x| x as $f).unwrap_or(<$f>::NAN)
            }

            fn from_rational(v: &BigRational) -> Self {
                rational_to_f64(v) as $f
            }

            fn to_f64(&self) -> f64 {
                f64::from(*self)
            }
        }

        impl Real for $f {}
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_bigint(v: &BigInt) -> Self {
        BigRational::from_integer(v.clone())
    }

    fn from_rational(v: &BigRational) -> Self {
        v.clone()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn is_exact() -> bool {
        true
    }
}

/// Correctly scaled conversion that survives numerators and denominators far
/// outside the `f64` range (as long as their ratio is representable).
pub fn rational_to_f64(v: &BigRational) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (v.numer().to_f64(), v.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    // Shift both sides down to 64 significant bits before dividing.
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let ns = (nb - 64).max(0);
    let ds = (db - 64).max(0);
    let n = (v.numer() >> ns as usize).to_f64().unwrap_or(0.0);
    let d = (v.denom() >> ds as usize).to_f64().unwrap_or(1.0);
    let exp = ns - ds;
    (n / d) * 2f64.powi(exp.clamp(-2000, 2000) as i32)
}

/// Exact rational view of a finite float (every finite f64 is a dyadic rational).
pub fn f64_to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

/// Parses a decimal literal (`12`, `0.025`, `-3.5e-2`) or a ratio (`1/40`)
/// into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, (-scale) as usize);
    }
    Some(if negative { -value } else { value })
}

/// Recovers the shortest decimal literal of a float and reads it exactly, so
/// `0.025_f64` becomes `1/40` rather than the nearby dyadic rational.
pub fn f64_to_rational_decimal(v: f64) -> BigRational {
    parse_rational(&format!("{v}")).unwrap_or_else(|| f64_to_rational(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_decimals_and_ratios() {
        assert_eq!(parse_rational("0.025"), Some(q(1, 40)));
        assert_eq!(parse_rational("1/40"), Some(q(1, 40)));
        assert_eq!(parse_rational("50"), Some(q(50, 1)));
        assert_eq!(parse_rational("-2.5e-1"), Some(q(-1, 4)));
        assert_eq!(parse_rational("1e2"), Some(q(100, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn float_roundtrip_through_decimal() {
        assert_eq!(f64_to_rational_decimal(0.025), q(1, 40));
        assert_eq!(f64_to_rational_decimal(0.1), q(1, 10));
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = num_traits::pow(BigInt::from(10), 400);
        let v = BigRational::new(big.clone() * 3, big);
        assert!((rational_to_f64(&v) - 3.0).abs() < 1e-15);
    }
}
