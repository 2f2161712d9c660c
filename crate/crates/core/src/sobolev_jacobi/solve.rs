use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::coeffs::{coeff_a_from_table, coeff_b_table};
use super::fixed::{exp_neg_fixed, magnitude_bits, to_fixed};
use super::basis::compose_affine;
use super::{int, sj_polynomial, SobolevError};
use crate::polyseries::Polynomial;
use crate::reaction_model::{ReactionSystem, SystemClass};
use crate::scalar::{f64_to_rational, rational_to_f64};

type QPoly = Polynomial<BigRational>;

/// Decay rate `n (n + rbar_d - 1) sigma` of the `n`-th mode.
pub fn eigenrate(n: usize, rbar_d: &BigRational, sigma: &BigRational) -> BigRational {
    int(n as i64) * (int(n as i64 - 1) + rbar_d) * sigma
}

struct Rates {
    sigma: BigRational,
    rbar_d: BigRational,
    rbar_l: BigRational,
}

impl Rates {
    fn new(r_d: &BigRational, r_k: &BigRational, r_l: &BigRational) -> Result<Self, SobolevError> {
        if r_d.is_negative() || r_k.is_negative() || r_l.is_negative() {
            return Err(SobolevError::NegativeRate);
        }
        let sigma = r_k + r_l;
        if sigma.is_zero() {
            return Err(SobolevError::NoBinaryReaction);
        }
        Ok(Rates { rbar_d: r_d / &sigma, rbar_l: r_l / &sigma, sigma })
    }

    /// `y(x) = (x - rl/2) / (1 - rl/2)`.
    fn argument(&self) -> (BigRational, BigRational) {
        let h = &self.rbar_l / int(2);
        let g = int(1) - &h;
        (-&h / &g, g.recip())
    }
}

/// Residual `(H + lambda_n) P~_n(y(x))`, identically zero when the basis
/// function is an eigenfunction of the generator
/// `H = r_d (1-x) d + r_k (1-x^2) d^2 + r_l (x-x^2) d^2`.
pub fn eigencheck(r_d: &BigRational, r_k: &BigRational, r_l: &BigRational, n: usize) -> Result<QPoly, SobolevError> {
    let rates = Rates::new(r_d, r_k, r_l)?;
    let beta = &rates.rbar_d - int(1);
    let (a, b) = rates.argument();
    let f = compose_affine(&sj_polynomial(&beta, n)?, &a, &b);
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let one_minus_x = Polynomial::linear(int(1), int(-1));
    let one_minus_x2 = Polynomial::new(vec![int(1), int(0), int(-1)]);
    let x_minus_x2 = Polynomial::new(vec![int(0), int(1), int(-1)]);
    let h = &(&(&one_minus_x * &d1).scale(r_d) + &(&one_minus_x2 * &d2).scale(r_k)) + &(&x_minus_x2 * &d2).scale(r_l);
    Ok(&h + &f.scale(&eigenrate(n, &rates.rbar_d, &rates.sigma)))
}

enum Kind {
    /// Only `A -> 0`: the generating function is `Bern(e^{-r_d t})^M`.
    PureDecay(f64),
    Spectral {
        rates: Vec<BigRational>,
        /// `A^{M,n}` times the coefficients of `P~_n(y(x))`, in fixed point.
        terms: Vec<Vec<BigInt>>,
        coeff_bits: u64,
        weight_bits: u64,
    },
}

/// Time-independent part of the spectral solution from the pure state `M`.
pub struct BinarySolution {
    m: usize,
    kind: Kind,
}

impl BinarySolution {
    pub fn new(r_d: &BigRational, r_k: &BigRational, r_l: &BigRational, m: usize) -> Result<Self, SobolevError> {
        if (r_k + r_l).is_zero() {
            if r_d.is_negative() {
                return Err(SobolevError::NegativeRate);
            }
            return Ok(BinarySolution { m, kind: Kind::PureDecay(rational_to_f64(r_d)) });
        }
        let rates = Rates::new(r_d, r_k, r_l)?;
        let beta = &rates.rbar_d - int(1);
        let table = coeff_b_table(m, &beta)?;
        let (arg_a, arg_b) = rates.argument();
        let exact: Vec<Vec<BigRational>> = (0..=m)
            .map(|n| {
                let a = coeff_a_from_table(m, n, &rates.rbar_l, &table);
                if a.is_zero() {
                    return Ok(Vec::new());
                }
                let q = compose_affine(&sj_polynomial(&beta, n)?, &arg_a, &arg_b);
                Ok(q.coeffs().iter().map(|c| c * &a).collect())
            })
            .collect::<Result<_, SobolevError>>()?;
        // Absolute error budget: each term carries at most 2^-coeff_bits from
        // rounding its coefficient and |C| 2^-weight_bits from its weight.
        let guard = 64 + (m as u64 + 1).ilog2() as u64 + 1;
        let amp = exact.iter().flatten().map(magnitude_bits).max().unwrap_or(0).max(0) as u64;
        let coeff_bits = guard;
        let weight_bits = guard + amp;
        let terms = exact.iter().map(|row| row.iter().map(|c| to_fixed(c, coeff_bits)).collect()).collect();
        let rates_n = (0..=m).map(|n| eigenrate(n, &rates.rbar_d, &rates.sigma)).collect();
        Ok(BinarySolution { m, kind: Kind::Spectral { rates: rates_n, terms, coeff_bits, weight_bits } })
    }

    pub fn initial_count(&self) -> usize {
        self.m
    }

    /// Coefficients of the generating function at time `t`, lowest power first.
    pub fn pgf(&self, t: f64) -> Result<Polynomial<f64>, SobolevError> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(SobolevError::InvalidTime);
        }
        match &self.kind {
            Kind::PureDecay(r_d) => {
                let p = (-r_d * t).exp();
                Ok(Polynomial::linear(1.0 - p, p).pow(self.m))
            }
            Kind::Spectral { rates, terms, coeff_bits, weight_bits } => {
                let tq = f64_to_rational(t);
                let mut acc = vec![BigInt::zero(); self.m + 1];
                for (rate, row) in rates.iter().zip(terms) {
                    if row.is_empty() {
                        continue;
                    }
                    let w = exp_neg_fixed(&(rate * &tq), *weight_bits);
                    if w.is_zero() {
                        continue;
                    }
                    for (slot, c) in acc.iter_mut().zip(row) {
                        *slot += c * &w;
                    }
                }
                let scale = BigInt::one() << (coeff_bits + weight_bits);
                let coeffs = acc.into_iter().map(|v| rational_to_f64(&BigRational::new(v, scale.clone()))).collect();
                Ok(Polynomial::new(coeffs))
            }
        }
    }
}

/// Generating function at time `t` from `M` particles.
pub fn solve_binary(r_d: &BigRational, r_k: &BigRational, r_l: &BigRational, m: usize, t: f64) -> Result<Polynomial<f64>, SobolevError> {
    BinarySolution::new(r_d, r_k, r_l, m)?.pgf(t)
}

/// Rates `(r_d, r_k, r_l)` of a single-species system in the binary family,
/// summing duplicate channels.
pub fn binary_rates(system: &ReactionSystem) -> Result<(BigRational, BigRational, BigRational), SobolevError> {
    if system.classify() != SystemClass::BinarySJ {
        return Err(SobolevError::NotBinaryFamily);
    }
    let (mut r_d, mut r_k, mut r_l) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    for r in system.reactions() {
        match (r.inputs[0], r.outputs[0]) {
            (1, 0) => r_d += &r.rate,
            (2, 0) => r_k += &r.rate,
            (2, 1) => r_l += &r.rate,
            _ => return Err(SobolevError::NotBinaryFamily),
        }
    }
    Ok((r_d, r_k, r_l))
}

/// Generating functions at each of `times`, mixed over the initial distribution.
pub fn solve_binary_system(system: &ReactionSystem, times: &[f64]) -> Result<Vec<Polynomial<f64>>, SobolevError> {
    let (r_d, r_k, r_l) = binary_rates(system)?;
    let mut out = vec![Polynomial::zero(); times.len()];
    for (state, weight) in system.initial() {
        let sol = BinarySolution::new(&r_d, &r_k, &r_l, state[0] as usize)?;
        for (slot, &t) in out.iter_mut().zip(times) {
            *slot = &*slot + &sol.pgf(t)?.scale(weight);
        }
    }
    Ok(out)
}
