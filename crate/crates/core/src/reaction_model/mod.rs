//! Reaction systems: stoichiometry, rates, initial distributions, and the
//! text and JSON formats used to describe them.

mod dsl;
mod json;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use dsl::{parse_dsl, serialize_dsl};
pub use json::{parse_initial_json, parse_json, to_json};

use crate::scalar::{f64_to_rational, rational_to_f64, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: negative rate {rate}")]
    NegativeRate { line: usize, col: usize, rate: String },
    #[error("line {line}: reaction has neither inputs nor outputs")]
    EmptyReaction { line: usize },
    #[error("invalid initial distribution: {0}")]
    InvalidInitial(String),
    #[error("invalid system: {0}")]
    Invalid(String),
    #[error("invalid JSON system: {0}")]
    Json(String),
}

/// `i -> o` at rate `r`, stoichiometry indexed by species.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Reaction {
    pub inputs: Vec<u32>,
    pub outputs: Vec<u32>,
    pub rate: BigRational,
}

impl Reaction {
    pub fn new(inputs: Vec<u32>, outputs: Vec<u32>, rate: BigRational) -> Self {
        assert_eq!(inputs.len(), outputs.len(), "stoichiometry vectors differ in length");
        Reaction { inputs, outputs, rate }
    }

    /// Single-species shorthand `i A -> o A`.
    pub fn single(i: u32, o: u32, rate: BigRational) -> Self {
        Self::new(vec![i], vec![o], rate)
    }

    pub fn rate_f64(&self) -> f64 {
        rational_to_f64(&self.rate)
    }

    /// Total number of particles consumed.
    pub fn order(&self) -> u32 {
        self.inputs.iter().sum()
    }

    /// Net change `o - i` per species.
    pub fn delta(&self) -> Vec<i64> {
        self.inputs.iter().zip(&self.outputs).map(|(&i, &o)| i64::from(o) - i64::from(i)).collect()
    }

    /// `true` if some species count can grow.
    pub fn creates(&self) -> bool {
        self.inputs.iter().zip(&self.outputs).any(|(i, o)| o > i)
    }

    /// `r (n)_i`, the firing propensity in state `n`.
    pub fn propensity(&self, n: &[u32]) -> f64 {
        self.rate_f64()
            * n.iter()
                .zip(&self.inputs)
                .map(|(&c, &i)| crate::combinatorics::falling_factorial_f64(u64::from(c), u64::from(i)))
                .product::<f64>()
    }
}

/// Structural families with dedicated solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemClass {
    /// Single species, every reaction consumes at most one particle.
    NonBinary,
    /// Single species, reactions drawn from `{1->0, 2->0, 2->1}` with at least one binary.
    BinarySJ,
    /// Several species, every reaction consumes at most one particle.
    SemiLinearMulti,
    Generic,
}

impl fmt::Display for SystemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SystemClass::NonBinary => "non-binary",
            SystemClass::BinarySJ => "binary (Sobolev-Jacobi)",
            SystemClass::SemiLinearMulti => "semi-linear multi-species",
            SystemClass::Generic => "generic",
        };
        f.write_str(name)
    }
}

/// Initial distribution: count vector to probability.
pub type Initial = BTreeMap<Vec<u32>, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSystem {
    species: Vec<String>,
    reactions: Vec<Reaction>,
    initial: Initial,
}

impl ReactionSystem {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>, initial: Initial) -> Result<Self, ModelError> {
        if species.is_empty() {
            return Err(ModelError::Invalid("no species".into()));
        }
        for (k, name) in species.iter().enumerate() {
            if species[..k].contains(name) {
                return Err(ModelError::Invalid(format!("duplicate species {name}")));
            }
        }
        for r in &reactions {
            if r.inputs.len() != species.len() || r.outputs.len() != species.len() {
                return Err(ModelError::Invalid("stoichiometry length differs from species count".into()));
            }
            if r.rate.is_negative() {
                return Err(ModelError::Invalid(format!("negative rate {}", r.rate)));
            }
            if r.inputs.iter().chain(&r.outputs).all(|&c| c == 0) {
                return Err(ModelError::Invalid("empty reaction".into()));
            }
        }
        validate_initial(&initial, species.len())?;
        Ok(ReactionSystem { species, reactions, initial })
    }

    /// One species `A` with `(i, o, rate)` reactions, started from `|m>`.
    pub fn single_species(reactions: &[(u32, u32, BigRational)], m: u32) -> Self {
        let rs = reactions.iter().map(|(i, o, r)| Reaction::single(*i, *o, r.clone())).collect();
        Self::new(vec!["A".into()], rs, Initial::from([(vec![m], 1.0)])).expect("valid single-species system")
    }

    pub fn with_initial(mut self, initial: Initial) -> Result<Self, ModelError> {
        validate_initial(&initial, self.species.len())?;
        self.initial = initial;
        Ok(self)
    }

    /// Deterministic start in state `n`.
    pub fn with_initial_state(self, n: Vec<u32>) -> Result<Self, ModelError> {
        self.with_initial(Initial::from([(n, 1.0)]))
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn num_species(&self) -> usize {
        self.species.len()
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn initial(&self) -> &Initial {
        &self.initial
    }

    /// Largest single-species count in the initial support.
    pub fn initial_max_count(&self) -> u32 {
        self.initial.keys().flat_map(|n| n.iter().copied()).max().unwrap_or(0)
    }

    /// Largest total count in the initial support.
    pub fn initial_max_total(&self) -> u32 {
        self.initial.keys().map(|n| n.iter().sum()).max().unwrap_or(0)
    }

    /// Initial PGF as `(exponents, probability)` terms.
    pub fn initial_terms<T: Scalar>(&self) -> Vec<(Vec<u32>, T)> {
        self.initial.iter().map(|(n, &p)| (n.clone(), T::from_rational(&f64_to_rational(p)))).collect()
    }

    pub fn creates_particles(&self) -> bool {
        self.reactions.iter().any(|r| r.creates() && !r.rate.is_zero())
    }

    pub fn classify(&self) -> SystemClass {
        classify(self)
    }
}

fn validate_initial(initial: &Initial, species: usize) -> Result<(), ModelError> {
    if initial.is_empty() {
        return Err(ModelError::InvalidInitial("empty support".into()));
    }
    let mut total = 0.0;
    for (n, &p) in initial {
        if n.len() != species {
            return Err(ModelError::InvalidInitial(format!("state {n:?} does not have {species} entries")));
        }
        if !(p.is_finite() && p >= 0.0) {
            return Err(ModelError::InvalidInitial(format!("probability {p} for {n:?}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(ModelError::InvalidInitial(format!("probabilities sum to {total}")));
    }
    Ok(())
}

pub fn classify(system: &ReactionSystem) -> SystemClass {
    let semilinear = system.reactions.iter().all(|r| r.order() <= 1);
    if system.num_species() > 1 {
        return if semilinear { SystemClass::SemiLinearMulti } else { SystemClass::Generic };
    }
    if semilinear {
        return SystemClass::NonBinary;
    }
    let in_family = system
        .reactions
        .iter()
        .all(|r| matches!((r.inputs[0], r.outputs[0]), (1, 0) | (2, 0) | (2, 1)));
    if in_family {
        SystemClass::BinarySJ
    } else {
        SystemClass::Generic
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn single(rs: &[(u32, u32)]) -> ReactionSystem {
        let rs: Vec<_> = rs.iter().map(|&(i, o)| (i, o, q(1, 1))).collect();
        ReactionSystem::single_species(&rs, 0)
    }

    #[test]
    fn classification_examples() {
        assert_eq!(single(&[(1, 0), (0, 2), (1, 2)]).classify(), SystemClass::NonBinary);
        assert_eq!(single(&[(1, 0), (2, 0), (2, 1)]).classify(), SystemClass::BinarySJ);
        assert_eq!(single(&[(2, 0), (0, 1)]).classify(), SystemClass::Generic);
        assert_eq!(single(&[(1, 0)]).classify(), SystemClass::NonBinary);
        assert_eq!(single(&[(3, 0)]).classify(), SystemClass::Generic);
        let multi = parse_dsl("A -> B @ 1\nB -> 0 @ 2").unwrap();
        assert_eq!(multi.classify(), SystemClass::SemiLinearMulti);
        let bin = parse_dsl("A + B -> C @ 1").unwrap();
        assert_eq!(bin.classify(), SystemClass::Generic);
    }

    #[test]
    fn classification_ignores_order_and_names() {
        let a = parse_dsl("2 X -> 0 @ 1\n1 X -> 0 @ 2\n2 X -> X @ 3").unwrap();
        let b = parse_dsl("2 Y -> Y @ 3\n2 Y -> 0 @ 1\nY -> 0 @ 2").unwrap();
        assert_eq!(a.classify(), b.classify());
    }

    #[test]
    fn rejects_bad_initial() {
        let s = single(&[(1, 0)]);
        assert!(s.clone().with_initial(Initial::from([(vec![1], 0.5)])).is_err());
        assert!(s.clone().with_initial(Initial::from([(vec![1, 2], 1.0)])).is_err());
        assert!(s.clone().with_initial(Initial::from([(vec![1], -0.5), (vec![2], 1.5)])).is_err());
        assert!(s.with_initial(Initial::from([(vec![1], 0.25), (vec![3], 0.75)])).is_ok());
    }

    #[test]
    fn propensity_uses_falling_factorials() {
        let r = Reaction::single(2, 0, q(1, 40));
        assert_eq!(r.propensity(&[100]), 9900.0 / 40.0);
        assert_eq!(r.propensity(&[1]), 0.0);
        let r = Reaction::new(vec![1, 1], vec![0, 0], q(2, 1));
        assert_eq!(r.propensity(&[3, 4]), 24.0);
    }
}
