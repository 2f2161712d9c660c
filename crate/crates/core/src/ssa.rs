//! Gillespie direct-method simulation, used as a second oracle.
//!
//! Trajectory `k` draws from ChaCha stream `k` of the ensemble seed, so the
//! result does not depend on how trajectories are scheduled across threads.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::reaction_model::ReactionSystem;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SsaError {
    #[error("at least one trajectory is required")]
    NoTrajectories,
    #[error("sample times must be finite, ascending and within [0, t_final]")]
    InvalidTimes,
}

pub type Histogram = BTreeMap<Vec<u32>, u64>;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble {
    pub n_traj: u64,
    pub seed: u64,
    pub sample_times: Vec<f64>,
    pub samples: Vec<Histogram>,
}

impl TrajectoryEnsemble {
    /// Empirical probability of state `n` at sample `idx`.
    pub fn prob(&self, idx: usize, n: &[u32]) -> f64 {
        self.samples[idx].get(n).copied().unwrap_or(0) as f64 / self.n_traj as f64
    }

    /// Binomial standard error of [`prob`](Self::prob).
    pub fn prob_se(&self, idx: usize, n: &[u32]) -> f64 {
        let p = self.prob(idx, n);
        (p * (1.0 - p) / self.n_traj as f64).sqrt()
    }

    pub fn mean(&self, idx: usize, species: usize) -> f64 {
        let total: f64 = self.samples[idx].iter().map(|(n, c)| n[species] as f64 * *c as f64).sum();
        total / self.n_traj as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self, idx: usize, species: usize) -> f64 {
        let m = self.mean(idx, species);
        let ss: f64 = self.samples[idx].iter().map(|(n, c)| (n[species] as f64 - m).powi(2) * *c as f64).sum();
        if self.n_traj > 1 {
            ss / (self.n_traj - 1) as f64
        } else {
            0.0
        }
    }

    pub fn mean_se(&self, idx: usize, species: usize) -> f64 {
        (self.variance(idx, species) / self.n_traj as f64).sqrt()
    }

    /// Standard error of the sample variance, from the fourth central moment.
    pub fn variance_se(&self, idx: usize, species: usize) -> f64 {
        let m = self.mean(idx, species);
        let n = self.n_traj as f64;
        let m4: f64 = self.samples[idx].iter().map(|(s, c)| (s[species] as f64 - m).powi(4) * *c as f64).sum::<f64>() / n;
        let v = self.variance(idx, species);
        ((m4 - v * v * (n - 3.0) / (n - 1.0)) / n).max(0.0).sqrt()
    }
}

fn sample_initial(system: &ReactionSystem, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let initial = system.initial();
    if initial.len() == 1 {
        return initial.keys().next().cloned().unwrap_or_default();
    }
    let total: f64 = initial.values().sum();
    let mut u = rng.random::<f64>() * total;
    for (state, w) in initial {
        if u < *w {
            return state.clone();
        }
        u -= w;
    }
    initial.keys().next_back().cloned().unwrap_or_default()
}

fn trajectory(system: &ReactionSystem, times: &[f64], seed: u64, k: u64) -> Vec<Vec<u32>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    let reactions = system.reactions();
    let deltas: Vec<Vec<i64>> = reactions.iter().map(|r| r.delta()).collect();
    let mut state = sample_initial(system, &mut rng);
    let mut props = vec![0.0; reactions.len()];
    let mut out = Vec::with_capacity(times.len());
    let mut t = 0.0;
    let mut next_sample = 0;
    loop {
        for (p, r) in props.iter_mut().zip(reactions) {
            *p = r.propensity(&state);
        }
        let total: f64 = props.iter().sum();
        let wait = if total > 0.0 { -(1.0 - rng.random::<f64>()).ln() / total } else { f64::INFINITY };
        let t_next = t + wait;
        while next_sample < times.len() && times[next_sample] < t_next {
            out.push(state.clone());
            next_sample += 1;
        }
        if next_sample == times.len() {
            return out;
        }
        let mut u = rng.random::<f64>() * total;
        let mut chosen = props.len() - 1;
        for (j, p) in props.iter().enumerate() {
            if u < *p {
                chosen = j;
                break;
            }
            u -= p;
        }
        for (s, d) in state.iter_mut().zip(&deltas[chosen]) {
            *s = (*s as i64 + d) as u32;
        }
        t = t_next;
    }
}

/// Simulates `n_traj` trajectories up to `t_final`, recording the state at
/// each of `sample_times`.
pub fn simulate(
    system: &ReactionSystem,
    t_final: f64,
    sample_times: &[f64],
    n_traj: u64,
    seed: u64,
) -> Result<TrajectoryEnsemble, SsaError> {
    if n_traj == 0 {
        return Err(SsaError::NoTrajectories);
    }
    let bad = sample_times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > t_final)
        || sample_times.windows(2).any(|w| w[1] < w[0]);
    if bad || !t_final.is_finite() {
        return Err(SsaError::InvalidTimes);
    }
    let empty = || vec![Histogram::new(); sample_times.len()];
    let samples = (0..n_traj)
        .into_par_iter()
        .fold(empty, |mut acc, k| {
            for (h, s) in acc.iter_mut().zip(trajectory(system, sample_times, seed, k)) {
                *h.entry(s).or_insert(0) += 1;
            }
            acc
        })
        .reduce(empty, |mut a, b| {
            for (ha, hb) in a.iter_mut().zip(b) {
                for (s, c) in hb {
                    *ha.entry(s).or_insert(0) += c;
                }
            }
            a
        });
    Ok(TrajectoryEnsemble { n_traj, seed, sample_times: sample_times.to_vec(), samples })
}
