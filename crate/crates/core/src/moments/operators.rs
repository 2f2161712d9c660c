use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::combinatorics::{binomial, stirling1};
use crate::reaction_model::ReactionSystem;

/// Sparse multivariate polynomial, keyed by exponent vector.
pub type MultiPoly = BTreeMap<Vec<u32>, BigRational>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prefactor {
    /// `e^{lambda . c} - 1`
    ExpMinusOne(Vec<i64>),
    /// Polynomial in `nu`.
    Poly(MultiPoly),
}

/// `scalar * prefactor * d^derivative`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorTerm {
    pub prefactor: Prefactor,
    pub derivative: Vec<u32>,
    pub scalar: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorRep {
    pub species: usize,
    pub terms: Vec<OperatorTerm>,
}

/// `sum_r rate (e^{lambda.(o-i)} - 1) prod_j sum_l s1(i_j, l_j) d_{lambda_j}^{l_j}`.
pub fn build_egf_operator(system: &ReactionSystem) -> OperatorRep {
    let s = system.num_species();
    let mut terms = Vec::new();
    for r in system.reactions() {
        let shift: Vec<i64> = r.delta();
        if shift.iter().all(|&c| c == 0) {
            continue;
        }
        let mut combos: Vec<(Vec<u32>, BigInt)> = vec![(Vec::new(), BigInt::one())];
        for &i in &r.inputs {
            combos = combos
                .into_iter()
                .flat_map(|(ls, c)| {
                    (0..=i).filter_map(move |l| {
                        let s1 = stirling1(i as usize, l as usize);
                        if s1.is_zero() {
                            return None;
                        }
                        let mut next = ls.clone();
                        next.push(l);
                        Some((next, &c * s1))
                    })
                })
                .collect();
        }
        for (ls, c) in combos {
            terms.push(OperatorTerm {
                prefactor: Prefactor::ExpMinusOne(shift.clone()),
                derivative: ls,
                scalar: &r.rate * BigRational::from_integer(c),
            });
        }
    }
    OperatorRep { species: s, terms }
}

fn shifted_power(e: &[u32]) -> MultiPoly {
    // prod_j (nu_j + 1)^{e_j}
    let mut out: MultiPoly = BTreeMap::from([(Vec::new(), BigRational::one())]);
    for &ej in e {
        let mut next = MultiPoly::new();
        for (k, c) in &out {
            for p in 0..=ej {
                let mut key = k.clone();
                key.push(p);
                *next.entry(key).or_insert_with(BigRational::zero) += c * BigRational::from_integer(binomial(ej as u64, p as u64));
            }
        }
        out = next;
    }
    out
}

/// `sum_r rate ((nu+1)^o - (nu+1)^i) d_nu^i`.
pub fn build_fmgf_operator(system: &ReactionSystem) -> OperatorRep {
    let mut terms = Vec::new();
    for r in system.reactions() {
        let mut poly = shifted_power(&r.outputs);
        for (k, c) in shifted_power(&r.inputs) {
            *poly.entry(k).or_insert_with(BigRational::zero) -= c;
        }
        poly.retain(|_, c| !c.is_zero());
        if poly.is_empty() {
            continue;
        }
        terms.push(OperatorTerm { prefactor: Prefactor::Poly(poly), derivative: r.inputs.clone(), scalar: r.rate.clone() });
    }
    OperatorRep { species: system.num_species(), terms }
}

type UOperator = BTreeMap<(Vec<i64>, Vec<u32>), BigRational>;
type NuOperator = BTreeMap<(Vec<u32>, Vec<u32>), BigRational>;

fn add_to<K: Ord>(map: &mut BTreeMap<K, BigRational>, key: K, v: BigRational) {
    let slot = map.entry(key).or_insert_with(BigRational::zero);
    *slot += v;
}

/// `u_j d_{u_j}` applied from the left: `u^a d^b -> a_j u^a d^b + u^{a+e_j} d^{b+e_j}`.
fn apply_theta(op: &UOperator, j: usize) -> UOperator {
    let mut out = UOperator::new();
    for ((a, b), c) in op {
        if a[j] != 0 {
            add_to(&mut out, (a.clone(), b.clone()), c * BigRational::from_integer(a[j].into()));
        }
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2[j] += 1;
        b2[j] += 1;
        add_to(&mut out, (a2, b2), c.clone());
    }
    out
}

/// Rewrites an operator in `u = e^lambda = nu + 1` and expands it in `nu`.
/// Returns `None` if a negative power of `u` survives.
fn egf_in_nu(rep: &OperatorRep) -> Option<NuOperator> {
    let s = rep.species;
    let mut total = UOperator::new();
    for term in &rep.terms {
        let Prefactor::ExpMinusOne(shift) = &term.prefactor else {
            return None;
        };
        let mut op: UOperator = BTreeMap::from([((vec![0i64; s], vec![0u32; s]), term.scalar.clone())]);
        for (j, &l) in term.derivative.iter().enumerate() {
            for _ in 0..l {
                op = apply_theta(&op, j);
            }
        }
        for ((a, b), c) in op {
            let lifted: Vec<i64> = a.iter().zip(shift).map(|(x, y)| x + y).collect();
            add_to(&mut total, (lifted, b.clone()), c.clone());
            add_to(&mut total, (a, b), -c);
        }
    }
    let mut out = NuOperator::new();
    for ((a, b), c) in total {
        if c.is_zero() {
            continue;
        }
        if a.iter().any(|&x| x < 0) {
            return None;
        }
        let e: Vec<u32> = a.iter().map(|&x| x as u32).collect();
        for (k, bc) in shifted_power(&e) {
            add_to(&mut out, (k, b.clone()), &c * bc);
        }
    }
    out.retain(|_, c| !c.is_zero());
    Some(out)
}

fn fmgf_in_nu(rep: &OperatorRep) -> Option<NuOperator> {
    let mut out = NuOperator::new();
    for term in &rep.terms {
        let Prefactor::Poly(poly) = &term.prefactor else {
            return None;
        };
        for (k, c) in poly {
            add_to(&mut out, (k.clone(), term.derivative.clone()), c * &term.scalar);
        }
    }
    out.retain(|_, c| !c.is_zero());
    Some(out)
}

/// Checks symbolically that substituting `nu = e^lambda - 1` into the
/// exponential-moment operator yields the factorial-moment operator.
///
/// The Stirling sums are expanded by composing `u d_u` directly, so the
/// check does not rely on the Stirling tables of the second kind.
pub fn stirling_consistent(system: &ReactionSystem) -> bool {
    match (egf_in_nu(&build_egf_operator(system)), fmgf_in_nu(&build_fmgf_operator(system))) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

fn fmt_rational(f: &mut fmt::Formatter<'_>, c: &BigRational, first: bool) -> fmt::Result {
    if c.is_negative() {
        write!(f, "{}", if first { "-" } else { " - " })?;
    } else if !first {
        write!(f, " + ")?;
    }
    let a = c.abs();
    if !a.is_one() {
        write!(f, "{a}")?;
    }
    Ok(())
}

fn fmt_monomial(f: &mut fmt::Formatter<'_>, sym: &str, e: &[u32]) -> fmt::Result {
    for (j, &p) in e.iter().enumerate() {
        match p {
            0 => {}
            1 => write!(f, "{sym}{j}")?,
            _ => write!(f, "{sym}{j}^{p}")?,
        }
    }
    Ok(())
}

impl fmt::Display for OperatorRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, t) in self.terms.iter().enumerate() {
            fmt_rational(f, &t.scalar, idx == 0)?;
            match &t.prefactor {
                Prefactor::ExpMinusOne(c) => {
                    write!(f, "(e^(")?;
                    let parts: Vec<String> = c.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, v)| format!("{v}l{j}")).collect();
                    write!(f, "{})-1)", parts.join("+"))?;
                }
                Prefactor::Poly(p) => {
                    write!(f, "(")?;
                    for (k, (e, c)) in p.iter().enumerate() {
                        fmt_rational(f, c, k == 0)?;
                        if e.iter().all(|&v| v == 0) && c.abs().is_one() {
                            write!(f, "1")?;
                        }
                        fmt_monomial(f, "n", e)?;
                    }
                    write!(f, ")")?;
                }
            }
            if t.derivative.iter().any(|&d| d > 0) {
                write!(f, "d[")?;
                fmt_monomial(f, "", &t.derivative)?;
                write!(f, "]")?;
            }
        }
        Ok(())
    }
}
