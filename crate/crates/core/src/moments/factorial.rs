use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::combinatorics::{binomial, falling_factorial};
use crate::reaction_model::ReactionSystem;
use crate::scalar::rational_to_f64;

/// Linear ODE rows for factorial moments `f_n`, `1 <= |n| <= max_order`.
///
/// Each row maps referenced multi-indices to coefficients. The all-zero
/// index stands for the constant `f_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentOde {
    pub species: usize,
    pub max_order: u32,
    pub indices: Vec<Vec<u32>>,
    pub rows: Vec<BTreeMap<Vec<u32>, BigRational>>,
    /// Referenced moments above `max_order`.
    pub open: BTreeSet<Vec<u32>>,
}

impl MomentOde {
    pub fn is_closed(&self) -> bool {
        self.open.is_empty()
    }

    pub fn row(&self, n: &[u32]) -> Option<&BTreeMap<Vec<u32>, BigRational>> {
        self.indices.iter().position(|m| m == n).map(|i| &self.rows[i])
    }
}

fn indices_up_to(species: usize, max_order: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..species {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                let used: u32 = prefix.iter().sum();
                (0..=max_order - used).map(move |v| {
                    let mut next = prefix.clone();
                    next.push(v);
                    next
                })
            })
            .collect();
    }
    out.retain(|n| n.iter().sum::<u32>() >= 1);
    out.sort_by_key(|n| (n.iter().sum::<u32>(), std::cmp::Reverse(n.clone())));
    out
}

fn sub_indices(n: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for &nj in n {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=nj).map(move |k| {
                    let mut next = prefix.clone();
                    next.push(k);
                    next
                })
            })
            .collect();
    }
    out
}

fn multi_falling(v: &[u32], k: &[u32]) -> BigInt {
    v.iter().zip(k).map(|(&a, &b)| falling_factorial(a as u64, b as u64)).product()
}

/// `df_n/dt = sum_r rate sum_k phi_k f_{n+i-k}` with
/// `phi_k = [(o)_k - (i)_k] binom(n, k)` in multi-index notation.
pub fn factorial_moment_system(system: &ReactionSystem, max_order: u32) -> MomentOde {
    let s = system.num_species();
    let max_order = max_order.max(1);
    let indices = indices_up_to(s, max_order);
    let mut rows = Vec::with_capacity(indices.len());
    let mut open = BTreeSet::new();
    for n in &indices {
        let mut row: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for r in system.reactions() {
            for k in sub_indices(n) {
                let phi = multi_falling(&r.outputs, &k) - multi_falling(&r.inputs, &k);
                if phi.is_zero() {
                    continue;
                }
                let b: BigInt = n.iter().zip(&k).map(|(&a, &c)| binomial(a as u64, c as u64)).product();
                let target: Vec<u32> = (0..s).map(|j| n[j] + r.inputs[j] - k[j]).collect();
                let c = &r.rate * BigRational::from_integer(phi * b);
                *row.entry(target).or_insert_with(BigRational::zero) += c;
            }
        }
        row.retain(|_, c| !c.is_zero());
        for key in row.keys() {
            if key.iter().sum::<u32>() > max_order {
                open.insert(key.clone());
            }
        }
        rows.push(row);
    }
    MomentOde { species: s, max_order, indices, rows, open }
}

/// Affine first-moment dynamics `dm/dt = matrix m + source`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderClosure {
    pub matrix: Vec<Vec<BigRational>>,
    pub source: Vec<BigRational>,
}

/// First moments close iff no reaction consumes more than one particle.
pub fn first_order_closure(system: &ReactionSystem) -> Option<FirstOrderClosure> {
    if system.reactions().iter().any(|r| r.order() > 1) {
        return None;
    }
    let s = system.num_species();
    let ode = factorial_moment_system(system, 1);
    let mut matrix = vec![vec![BigRational::zero(); s]; s];
    let mut source = vec![BigRational::zero(); s];
    for j in 0..s {
        let mut unit = vec![0u32; s];
        unit[j] = 1;
        let row = ode.row(&unit).expect("first-order row");
        for (key, c) in row {
            match key.iter().position(|&v| v == 1) {
                Some(l) => matrix[j][l] = c.clone(),
                None => source[j] = c.clone(),
            }
        }
    }
    Some(FirstOrderClosure { matrix, source })
}

impl FirstOrderClosure {
    /// Means at time `t` from `m0`, by classical RK4 with step
    /// `min(t, 0.01 / max(1, ||matrix||_inf))`.
    pub fn mean_at(&self, m0: &[f64], t: f64) -> Vec<f64> {
        let a: Vec<Vec<f64>> = self.matrix.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
        let b: Vec<f64> = self.source.iter().map(rational_to_f64).collect();
        let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(1.0, f64::max);
        let steps = ((t * norm / 0.01).ceil() as usize).max(1);
        let h = t / steps as f64;
        let f = |m: &[f64]| -> Vec<f64> {
            a.iter().zip(&b).map(|(row, s)| row.iter().zip(m).map(|(x, y)| x * y).sum::<f64>() + s).collect()
        };
        let axpy = |m: &[f64], k: &[f64], c: f64| -> Vec<f64> { m.iter().zip(k).map(|(x, y)| x + c * y).collect() };
        let mut m = m0.to_vec();
        for _ in 0..steps {
            let k1 = f(&m);
            let k2 = f(&axpy(&m, &k1, h / 2.0));
            let k3 = f(&axpy(&m, &k2, h / 2.0));
            let k4 = f(&axpy(&m, &k3, h));
            for i in 0..m.len() {
                m[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::factorial;
    use crate::polyseries::Polynomial;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn examples() {
        let decay = ReactionSystem::single_species(&[(1, 0, q(4))], 0);
        let ode = factorial_moment_system(&decay, 1);
        assert_eq!(ode.row(&[1]).unwrap(), &BTreeMap::from([(vec![1], q(-4))]));
        let birth = ReactionSystem::single_species(&[(0, 1, q(50))], 0);
        let ode = factorial_moment_system(&birth, 1);
        assert_eq!(ode.row(&[1]).unwrap(), &BTreeMap::from([(vec![0], q(50))]));
        let ann = ReactionSystem::single_species(&[(2, 0, q(3))], 0);
        let ode = factorial_moment_system(&ann, 1);
        assert_eq!(ode.row(&[1]).unwrap(), &BTreeMap::from([(vec![2], q(-6))]));
        assert!(!ode.is_closed());
        assert_eq!(ode.open, BTreeSet::from([vec![2]]));
    }

    #[test]
    fn closure_examples() {
        let decay = ReactionSystem::single_species(&[(1, 0, q(4))], 0);
        let c = first_order_closure(&decay).unwrap();
        assert_eq!((c.matrix, c.source), (vec![vec![q(-4)]], vec![q(0)]));
        let birth = ReactionSystem::single_species(&[(0, 1, q(50))], 0);
        let c = first_order_closure(&birth).unwrap();
        assert_eq!((c.matrix, c.source), (vec![vec![q(0)]], vec![q(50)]));
        assert!(first_order_closure(&ReactionSystem::single_species(&[(2, 0, q(1))], 0)).is_none());
    }

    /// Applies ((nu+1)^o - (nu+1)^i) d^i to sum_m f_m nu^m / m! as plain
    /// polynomials and reads off n! [nu^n].
    fn direct(i: u32, o: u32, f: &[BigRational], n: usize) -> BigRational {
        let mut g = Polynomial::new(
            f.iter().enumerate().map(|(m, v)| v / BigRational::from_integer(factorial(m as u64))).collect(),
        );
        for _ in 0..i {
            g = g.derivative();
        }
        let shift = Polynomial::linear(q(1), q(1));
        let pre = &shift.pow(o as usize) - &shift.pow(i as usize);
        (&pre * &g).coeff(n) * BigRational::from_integer(factorial(n as u64))
    }

    #[test]
    fn phi_table_matches_direct_expansion() {
        let f: Vec<BigRational> = (0..12).map(|m| BigRational::new((m * m + 3).into(), (m + 2).into())).collect();
        for i in 0..=2 {
            for o in 0..=2 {
                if i == o {
                    continue;
                }
                let sys = ReactionSystem::single_species(&[(i, o, q(1))], 0);
                let ode = factorial_moment_system(&sys, 6);
                for n in 1..=6usize {
                    let row = ode.row(&[n as u32]).unwrap();
                    let via: BigRational = row.iter().map(|(k, c)| c * &f[k[0] as usize]).sum();
                    assert_eq!(via, direct(i, o, &f, n), "({i},{o}) n {n}");
                }
            }
        }
    }

    #[test]
    fn multi_species_indices() {
        let idx = indices_up_to(2, 2);
        assert_eq!(idx, vec![vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn conversion_closure_is_linear() {
        use crate::reaction_model::Reaction;
        let reactions = vec![Reaction::new(vec![1, 0], vec![0, 1], q(2)), Reaction::new(vec![0, 1], vec![0, 0], q(1))];
        let sys = ReactionSystem::new(vec!["A".into(), "B".into()], reactions, [(vec![0, 0], 1.0)].into()).unwrap();
        let c = first_order_closure(&sys).unwrap();
        assert_eq!(c.matrix, vec![vec![q(-2), q(0)], vec![q(2), q(-1)]]);
        // A(t) = 10 e^{-2t}, B(t) = 20 (e^{-t} - e^{-2t})
        let m = c.mean_at(&[10.0, 0.0], 1.0);
        assert!((m[0] - 10.0 * (-2.0f64).exp()).abs() < 1e-9);
        assert!((m[1] - 20.0 * ((-1.0f64).exp() - (-2.0f64).exp())).abs() < 1e-9);
    }
}
