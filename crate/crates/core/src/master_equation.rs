//! Brute-force reference: the master equation on a truncated state box,
//! integrated with fixed-step RK4.
//!
//! Columns of the generator are states; probability that would leave the box
//! `{0..=n_max}^S` is dropped and shows up as the `leak` of a snapshot.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::combinatorics::falling_factorial_f64;
use crate::reaction_model::ReactionSystem;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MasterError {
    #[error("initial state {state:?} lies outside the truncation box 0..={n_max}")]
    InitialOutsideTruncation { state: Vec<u32>, n_max: u32 },
    #[error("RK4 step {dt} too large: dt * max|diag| = {product} exceeds 0.1 (use a smaller dt or n_max)")]
    StabilityGuard { dt: f64, product: f64 },
    #[error("state space of {0} states is too large")]
    TooLarge(u128),
    #[error("sample times must be finite, nonnegative and ascending")]
    InvalidTimes,
    #[error("time step must be positive")]
    InvalidStep,
}

/// Largest stability product `dt * max|diag|` accepted by [`integrate`].
pub const STABILITY_LIMIT: f64 = 0.1;

/// Mixed-radix indexing of the box `{0..=n_max}^S` (first species fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateBox {
    pub species: usize,
    pub n_max: u32,
}

impl StateBox {
    pub fn len(&self) -> usize {
        (self.n_max as usize + 1).pow(self.species as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, n: &[u32]) -> Option<usize> {
        let base = self.n_max as usize + 1;
        let mut idx = 0;
        for &c in n.iter().rev() {
            if c > self.n_max {
                return None;
            }
            idx = idx * base + c as usize;
        }
        Some(idx)
    }

    pub fn state(&self, mut idx: usize) -> Vec<u32> {
        let base = self.n_max as usize + 1;
        (0..self.species)
            .map(|_| {
                let c = (idx % base) as u32;
                idx /= base;
                c
            })
            .collect()
    }
}

/// Truncated generator `L` with `dpsi/dt = L psi`, stored row-compressed.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub states: StateBox,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl GeneratorMatrix {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn n_max(&self) -> u32 {
        self.states.n_max
    }

    /// Entry `L[row, col]`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let mut v = if row == col { self.diag[row] } else { 0.0 };
        for k in self.row_ptr[row]..self.row_ptr[row + 1] {
            if self.cols[k] == col {
                v += self.vals[k];
            }
        }
        v
    }

    /// All nonzero entries as `(row, col, value)`, diagonal included.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for row in 0..self.dim() {
            if self.diag[row] != 0.0 {
                out.push((row, row, self.diag[row]));
            }
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                out.push((row, self.cols[k], self.vals[k]));
            }
        }
        out
    }

    pub fn max_abs_diag(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Column sums; zero for columns whose outflow stays inside the box.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = self.diag.clone();
        for row in 0..self.dim() {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                sums[self.cols[k]] += self.vals[k];
            }
        }
        sums
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let row = |(r, out): (usize, &mut f64)| {
            let mut acc = self.diag[r] * x[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        };
        if self.dim() >= 1 << 15 {
            y.par_iter_mut().enumerate().for_each(|(r, out)| row((r, out)));
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }
}

pub fn build_generator(system: &ReactionSystem, n_max: u32) -> Result<GeneratorMatrix, MasterError> {
    let states = StateBox { species: system.num_species(), n_max };
    let size = (u128::from(n_max) + 1).pow(states.species as u32);
    if size > 50_000_000 {
        return Err(MasterError::TooLarge(size));
    }
    for state in system.initial().keys() {
        if states.index(state).is_none() {
            return Err(MasterError::InitialOutsideTruncation { state: state.clone(), n_max });
        }
    }
    let dim = states.len();
    let mut diag = vec![0.0; dim];
    let mut off: Vec<(usize, usize, f64)> = Vec::new();
    let deltas: Vec<Vec<i64>> = system.reactions().iter().map(|r| r.delta()).collect();
    for col in 0..dim {
        let n = states.state(col);
        for (r, delta) in system.reactions().iter().zip(&deltas) {
            let a = r.rate_f64()
                * n.iter()
                    .zip(&r.inputs)
                    .map(|(&c, &i)| falling_factorial_f64(u64::from(c), u64::from(i)))
                    .product::<f64>();
            if a == 0.0 {
                continue;
            }
            diag[col] -= a;
            let target: Option<Vec<u32>> =
                n.iter().zip(delta).map(|(&c, &d)| u32::try_from(i64::from(c) + d).ok()).collect();
            if let Some(row) = target.as_deref().and_then(|m| states.index(m)) {
                if row == col {
                    diag[col] += a;
                } else {
                    off.push((row, col, a));
                }
            }
        }
    }
    off.sort_by_key(|&(r, c, _)| (r, c));
    let mut row_ptr = vec![0; dim + 1];
    let mut cols = Vec::with_capacity(off.len());
    let mut vals: Vec<f64> = Vec::with_capacity(off.len());
    for &(r, c, v) in &off {
        if cols.len() > row_ptr[r] && *cols.last().expect("nonempty") == c {
            *vals.last_mut().expect("nonempty") += v;
        } else {
            cols.push(c);
            vals.push(v);
        }
        row_ptr[r + 1] = cols.len();
    }
    for r in 0..dim {
        row_ptr[r + 1] = row_ptr[r + 1].max(row_ptr[r]);
    }
    Ok(GeneratorMatrix { states, row_ptr, cols, vals, diag })
}

/// Probabilities on the truncation box at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionSnapshot {
    pub time: f64,
    pub states: StateBox,
    pub probs: Vec<f64>,
    /// `1 - sum(probs)`: mass that left the box.
    pub leak: f64,
}

impl DistributionSnapshot {
    pub fn prob(&self, n: &[u32]) -> f64 {
        self.states.index(n).map_or(0.0, |i| self.probs[i])
    }

    /// Nonzero entries keyed by count vector.
    pub fn to_map(&self) -> BTreeMap<Vec<u32>, f64> {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0.0)
            .map(|(i, &p)| (self.states.state(i), p))
            .collect()
    }

    pub fn min_prob(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `dt` at a comfortable fraction of the stability limit.
pub fn default_dt(generator: &GeneratorMatrix) -> f64 {
    let d = generator.max_abs_diag();
    if d == 0.0 {
        0.01
    } else {
        0.01 / d
    }
}

/// Integrates from the initial distribution and samples at `times`.
pub fn integrate(system: &ReactionSystem, times: &[f64], n_max: u32, dt: f64) -> Result<Vec<DistributionSnapshot>, MasterError> {
    let generator = build_generator(system, n_max)?;
    integrate_with(&generator, system, times, dt)
}

pub fn integrate_with(
    generator: &GeneratorMatrix,
    system: &ReactionSystem,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DistributionSnapshot>, MasterError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(MasterError::InvalidStep);
    }
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(MasterError::InvalidTimes);
    }
    let product = dt * generator.max_abs_diag();
    if product > STABILITY_LIMIT {
        return Err(MasterError::StabilityGuard { dt, product });
    }
    let states = generator.states;
    let dim = generator.dim();
    let mut psi = vec![0.0; dim];
    for (n, &p) in system.initial() {
        let i = states.index(n).ok_or_else(|| MasterError::InitialOutsideTruncation { state: n.clone(), n_max: states.n_max })?;
        psi[i] += p;
    }
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / dt).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                generator.apply(&psi, &mut k1);
                axpy(&psi, &k1, 0.5 * h, &mut tmp);
                generator.apply(&tmp, &mut k2);
                axpy(&psi, &k2, 0.5 * h, &mut tmp);
                generator.apply(&tmp, &mut k3);
                axpy(&psi, &k3, h, &mut tmp);
                generator.apply(&tmp, &mut k4);
                for i in 0..dim {
                    psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            now = t;
        }
        let total: f64 = psi.iter().sum();
        out.push(DistributionSnapshot { time: t, states, probs: psi.clone(), leak: 1.0 - total });
    }
    Ok(out)
}

fn axpy(x: &[f64], k: &[f64], a: f64, out: &mut [f64]) {
    for ((o, xi), ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + a * ki;
    }
}

/// Truncation size from a linear-noise estimate of how far the distribution
/// spreads by the last sample time: the largest `mean + 8 sd` over any
/// species and time, plus a margin of 10.
pub fn suggest_n_max(system: &ReactionSystem, times: &[f64]) -> u32 {
    let s = system.num_species();
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let mut mean = vec![0.0; s];
    for (n, &p) in system.initial() {
        for j in 0..s {
            mean[j] += p * f64::from(n[j]);
        }
    }
    let mut cov = vec![vec![0.0; s]; s];
    for (n, &p) in system.initial() {
        for a in 0..s {
            for b in 0..s {
                cov[a][b] += p * (f64::from(n[a]) - mean[a]) * (f64::from(n[b]) - mean[b]);
            }
        }
    }
    let reactions: Vec<(Vec<f64>, Vec<u32>, f64)> = system
        .reactions()
        .iter()
        .map(|r| (r.delta().iter().map(|&d| d as f64).collect(), r.inputs.clone(), r.rate_f64()))
        .collect();
    let pack = |m: &[f64], c: &[Vec<f64>]| {
        let mut v = m.to_vec();
        c.iter().for_each(|row| v.extend_from_slice(row));
        v
    };
    let rhs = |y: &[f64]| -> Vec<f64> {
        let m: Vec<f64> = y[..s].iter().map(|v| v.max(0.0)).collect();
        let c = |a: usize, b: usize| y[s + a * s + b];
        let mut dm = vec![0.0; s];
        let mut jac = vec![vec![0.0; s]; s];
        let mut diff = vec![vec![0.0; s]; s];
        for (delta, inputs, rate) in &reactions {
            let factors: Vec<f64> = m.iter().zip(inputs).map(|(&x, &i)| falling_real(x, i)).collect();
            let a = rate * factors.iter().product::<f64>();
            let grad: Vec<f64> = (0..s)
                .map(|k| {
                    rate * falling_real_deriv(m[k], inputs[k])
                        * (0..s).filter(|&l| l != k).map(|l| factors[l]).product::<f64>()
                })
                .collect();
            for p in 0..s {
                dm[p] += delta[p] * a;
                for q in 0..s {
                    jac[p][q] += delta[p] * grad[q];
                    diff[p][q] += delta[p] * delta[q] * a;
                }
            }
        }
        let mut dc = vec![0.0; s * s];
        for p in 0..s {
            for q in 0..s {
                let mut v = diff[p][q];
                for k in 0..s {
                    v += jac[p][k] * c(k, q) + c(p, k) * jac[q][k];
                }
                dc[p * s + q] = v;
            }
        }
        dm.extend(dc);
        dm
    };
    let reach = |y: &[f64]| (0..s).map(|j| y[j] + 8.0 * y[s + j * s + j].max(0.0).sqrt()).fold(0.0, f64::max);
    let mut y = pack(&mean, &cov);
    let mut best = reach(&y);
    if t_end > 0.0 {
        let steps = 2000;
        let h = t_end / steps as f64;
        for _ in 0..steps {
            let k1 = rhs(&y);
            let k2 = rhs(&add(&y, &k1, 0.5 * h));
            let k3 = rhs(&add(&y, &k2, 0.5 * h));
            let k4 = rhs(&add(&y, &k3, h));
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if !y.iter().all(|v| v.is_finite()) {
                break;
            }
            best = best.max(reach(&y));
        }
    }
    let best = if best.is_finite() { best.min(1e7) } else { 1e7 };
    (best.ceil() as u32).max(system.initial_max_count()) + 10
}

fn add(y: &[f64], k: &[f64], a: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(y, k)| y + a * k).collect()
}

/// `x (x - 1) ... (x - i + 1)` for real `x`.
fn falling_real(x: f64, i: u32) -> f64 {
    (0..i).map(|k| x - f64::from(k)).product()
}

fn falling_real_deriv(x: f64, i: u32) -> f64 {
    (0..i)
        .map(|skip| (0..i).filter(|&k| k != skip).map(|k| x - f64::from(k)).product::<f64>())
        .sum()
}
