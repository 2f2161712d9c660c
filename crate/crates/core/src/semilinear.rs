//! Closed-form generating functions for semi-linear reactions (at most one
//! particle consumed): single elementary reactions in up to three species,
//! and the four-parameter birth / pair-creation / death / autocatalysis
//! family in one species.
//!
//! Every solution has the shape `P(t; x) = g(t; x) P(0; T(t; x))`.

use num_traits::Zero;

use crate::polyseries::{Exps, Polynomial, SeriesError, TruncatedSeries, MAX_VARS};
use crate::reaction_model::{Reaction, ReactionSystem, SystemClass};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SemilinearError {
    #[error("reaction consumes more than one particle")]
    Binary,
    #[error("no closed form for this reaction: {0}")]
    Unsupported(String),
    #[error("time must be finite and nonnegative, got {0}")]
    InvalidTime(f64),
    #[error("rates must be finite and nonnegative")]
    InvalidRate,
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Standard generating functions, each evaluated at a series argument `s`
/// (pass the coordinate `x` for the plain PGF).
pub mod pgf {
    use super::*;

    /// `exp(mu (s - 1))`
    pub fn pois<T: Real>(mu: T, s: &TruncatedSeries<T>) -> TruncatedSeries<T> {
        s.add_constant(&-T::one()).scale(&mu).exp()
    }

    /// `(1 - p) + p s`
    pub fn bern<T: Real>(p: T, s: &TruncatedSeries<T>) -> TruncatedSeries<T> {
        s.scale(&p).add_constant(&(T::one() - p))
    }

    /// `p s / (1 - (1 - p) s)`
    pub fn geom<T: Real>(p: T, s: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, SeriesError> {
        Ok(s.scale(&p).mul(&geom_denominator_recip(p, s)?)?)
    }

    /// `p / (1 - (1 - p) s)`
    pub fn geom2<T: Real>(p: T, s: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, SeriesError> {
        Ok(geom_denominator_recip(p, s)?.scale(&p))
    }

    fn geom_denominator_recip<T: Real>(p: T, s: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, SeriesError> {
        s.scale(&(p - T::one())).add_constant(&T::one()).recip()
    }

    /// `exp(p (s^2 - 1))`
    pub fn a2pois<T: Real>(p: T, s: &TruncatedSeries<T>) -> Result<TruncatedSeries<T>, SeriesError> {
        Ok(s.mul(s)?.add_constant(&-T::one()).scale(&p).exp())
    }
}

/// `P(t; x) = g(t; x) P(0; T(t; x))` for one reaction at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementarySolution<T: Real> {
    pub g: TruncatedSeries<T>,
    pub t: Vec<TruncatedSeries<T>>,
}

impl<T: Real> ElementarySolution<T> {
    pub fn identity(vars: usize, max_deg: usize) -> Self {
        ElementarySolution {
            g: TruncatedSeries::one(vars, max_deg),
            t: (0..vars).map(|i| TruncatedSeries::var(vars, max_deg, i)).collect(),
        }
    }
}

fn monomial_exps(v: &[u32]) -> Exps {
    let mut e = [0; MAX_VARS];
    e[..v.len()].copy_from_slice(v);
    e
}

fn check_time<T: Real>(t: T) -> Result<(), SemilinearError> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(SemilinearError::InvalidTime(Scalar::to_f64(&t)))
    }
}

/// Closed form for a single reaction consuming at most one particle.
///
/// * `0 -> o`: `g = exp(r t (x^o - 1))`, `T = x`.
/// * `S_i -> o` with `o_i = 0`: `T_i = (1 - e^{-rt}) x^o + e^{-rt} x_i`.
/// * `S_i -> S_i + o'`: `T_i = x_i exp(r t (x^{o'} - 1))`.
/// * `S_i -> 2 S_i`: `T_i = Geom(e^{-rt}; x_i)`.
pub fn elementary_solution<T: Real>(reaction: &Reaction, t: T, max_deg: usize) -> Result<ElementarySolution<T>, SemilinearError> {
    check_time(t)?;
    let vars = reaction.inputs.len();
    if vars == 0 || vars > MAX_VARS {
        return Err(SemilinearError::Unsupported(format!("{vars} species")));
    }
    if reaction.order() > 1 {
        return Err(SemilinearError::Binary);
    }
    let rate = T::from_f64_lossy(reaction.rate_f64());
    let rt = rate * t;
    let mut sol = ElementarySolution::identity(vars, max_deg);
    let x_o = TruncatedSeries::monomial(vars, max_deg, &monomial_exps(&reaction.outputs), T::one());
    let Some(i) = reaction.inputs.iter().position(|&c| c == 1) else {
        sol.g = x_o.add_constant(&-T::one()).scale(&rt).exp();
        return Ok(sol);
    };
    let decay = (-rt).exp();
    let x_i = TruncatedSeries::var(vars, max_deg, i);
    let o_i = reaction.outputs[i];
    let mut rest = reaction.outputs.clone();
    rest[i] = 0;
    let others_produced = rest.iter().any(|&c| c > 0);
    sol.t[i] = match o_i {
        0 => x_o.scale(&(T::one() - decay)).add(&x_i.scale(&decay))?,
        1 => {
            let x_rest = TruncatedSeries::monomial(vars, max_deg, &monomial_exps(&rest), T::one());
            x_i.mul(&x_rest.add_constant(&-T::one()).scale(&rt).exp())?
        }
        2 if !others_produced => pgf::geom(decay, &x_i)?,
        _ => {
            return Err(SemilinearError::Unsupported(format!(
                "{} -> {:?} has no tabulated solution",
                i, reaction.outputs
            )))
        }
    };
    Ok(sol)
}

/// `g(x) P0(T(x))` for an initial PGF given as `(exponents, probability)` terms.
pub fn apply_solution<T: Real>(sol: &ElementarySolution<T>, p0: &[(Vec<u32>, T)]) -> Result<TruncatedSeries<T>, SemilinearError> {
    let composed = TruncatedSeries::compose_terms(p0, &sol.t)?;
    Ok(sol.g.mul(&composed)?)
}

/// `outer(inners)` for a multivariate outer series; allowed when every inner
/// constant term vanishes or the outer series has no top-degree part.
fn compose_multi<T: Real>(
    outer: &TruncatedSeries<T>,
    inners: &[TruncatedSeries<T>],
) -> Result<TruncatedSeries<T>, SeriesError> {
    let all_nil = inners.iter().all(|s| s.constant_term().is_zero());
    let terms: Vec<(Vec<u32>, T)> = outer
        .terms()
        .filter(|(_, c)| !c.is_zero())
        .map(|(e, c)| (e[..outer.vars()].to_vec(), *c))
        .collect();
    let top = terms.iter().any(|(e, _)| e.iter().sum::<u32>() as usize == outer.max_deg());
    if !all_nil && top {
        return Err(SeriesError::NotPolynomial);
    }
    if terms.is_empty() {
        return Ok(TruncatedSeries::zero(outer.vars(), outer.max_deg()));
    }
    TruncatedSeries::compose_terms(&terms, inners)
}

/// Largest coefficient residual of the one-parameter group laws
/// `T(l + m; x) = T(m; T(l; x))` and `g(l + m; x) = g(l; x) g(m; T(l; x))`.
pub fn semigroup_check(reaction: &Reaction, lambda: f64, mu: f64, max_deg: usize) -> Result<f64, SemilinearError> {
    let a = elementary_solution::<f64>(reaction, lambda, max_deg)?;
    let b = elementary_solution::<f64>(reaction, mu, max_deg)?;
    let ab = elementary_solution::<f64>(reaction, lambda + mu, max_deg)?;
    let mut worst: f64 = 0.0;
    for (i, t_ab) in ab.t.iter().enumerate() {
        let composed = compose_multi(&b.t[i], &a.t)?;
        worst = worst.max(t_ab.sup_distance(&composed)?);
    }
    let g = a.g.mul(&compose_multi(&b.g, &a.t)?)?;
    worst = worst.max(ab.g.sup_distance(&g)?);
    Ok(worst)
}

/// Rates of the one-species family: birth `0 -> A` (beta), pair creation
/// `0 -> 2A` (gamma), death `A -> 0` (tau), autocatalysis `A -> 2A` (alpha).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbRates {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl NbRates {
    pub fn new(alpha: f64, beta: f64, gamma: f64, tau: f64) -> Self {
        NbRates { alpha, beta, gamma, tau }
    }

    /// Collects the family rates from a one-species system, summing
    /// duplicates; `A -> A` is ignored.
    pub fn from_system(system: &ReactionSystem) -> Result<Self, SemilinearError> {
        if system.num_species() != 1 {
            return Err(SemilinearError::Unsupported("composite solution needs one species".into()));
        }
        let mut r = NbRates::new(0.0, 0.0, 0.0, 0.0);
        for reaction in system.reactions() {
            let k = reaction.rate_f64();
            match (reaction.inputs[0], reaction.outputs[0]) {
                (0, 1) => r.beta += k,
                (0, 2) => r.gamma += k,
                (1, 0) => r.tau += k,
                (1, 2) => r.alpha += k,
                (1, 1) => {}
                (i, o) if i > 1 => return Err(SemilinearError::Unsupported(format!("{i}A -> {o}A is binary"))),
                (i, o) => return Err(SemilinearError::Unsupported(format!("{i}A -> {o}A is outside the family"))),
            }
        }
        Ok(r)
    }

    fn valid(&self) -> bool {
        [self.alpha, self.beta, self.gamma, self.tau].iter().all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// `T_DA`, `g_BDA` and `g_CDA` at time `t`, each as a univariate series.
pub fn composite_factors<T: Real>(
    rates: NbRates,
    t: T,
    max_deg: usize,
) -> Result<(TruncatedSeries<T>, TruncatedSeries<T>, TruncatedSeries<T>), SemilinearError> {
    check_time(t)?;
    if !rates.valid() {
        return Err(SemilinearError::InvalidRate);
    }
    let f = |v: f64| T::from_f64_lossy(v);
    let (alpha, beta, gamma, tau) = (f(rates.alpha), f(rates.beta), f(rates.gamma), f(rates.tau));
    let x = TruncatedSeries::<T>::var(1, max_deg, 0);
    let one = T::one();
    let two = one + one;

    if alpha.is_zero() && tau.is_zero() {
        return Ok((x.clone(), pgf::pois(beta * t, &x), pgf::a2pois(gamma * t, &x)?));
    }
    if alpha.is_zero() {
        let e = (-tau * t).exp();
        let t_da = pgf::bern(e, &x);
        let g_bda = pgf::pois(beta / tau * (one - e), &x);
        let g_cda = pgf::pois(gamma / tau * (one - e) * (one - e), &x)
            .mul(&pgf::a2pois(gamma / (two * tau) * (one - (-two * tau * t).exp()), &x)?)?;
        return Ok((t_da, g_bda, g_cda));
    }
    if alpha == tau {
        let p = one / (one + alpha * t);
        let t_da = pgf::bern(p, &pgf::geom(p, &x)?);
        let geom2 = pgf::geom2(p, &x)?;
        let g_bda = geom2.pow_real(beta / alpha)?;
        // (x - 1)^2 = 1 - 2x + x^2
        let sq = Polynomial::new(vec![one, -two, one]);
        let expo = TruncatedSeries::from_polynomial(&sq, max_deg).mul(&geom2)?.scale(&(gamma * t));
        let g_cda = geom2.pow_real(two * gamma / alpha)?.mul(&expo.exp())?;
        return Ok((t_da, g_bda, g_cda));
    }
    let rel = ((alpha - tau) / alpha.max(tau)).abs();
    if rel < f(1e-9) {
        log::warn!("alpha and tau differ by a relative {:e}; the alpha != tau formulas lose precision here", Scalar::to_f64(&rel));
    }
    let diff = alpha - tau;
    let p_a = diff / (alpha * (diff * t).exp() - tau);
    let q_d = diff / (alpha - tau * (-diff * t).exp());
    let t_da = pgf::bern(q_d, &pgf::geom(p_a, &x)?);
    let geom2 = pgf::geom2(p_a, &x)?;
    let g_bda = geom2.pow_real(beta / alpha)?;
    // f_CDA = gamma (E - 1) ((x - 1)^2 / (alpha - tau) + (x - 1) / alpha), E = e^{(alpha - tau) t}
    let em1 = (diff * t).exp_m1();
    let quad = Polynomial::new(vec![one, -two, one]).scale(&(gamma * em1 / diff));
    let lin = Polynomial::new(vec![-one, one]).scale(&(gamma * em1 / alpha));
    let f_cda = TruncatedSeries::from_polynomial(&(&quad + &lin), max_deg);
    let g_cda = geom2.pow_real(gamma * (alpha + tau) / (alpha * alpha))?.mul(&f_cda.mul(&geom2)?.exp())?;
    Ok((t_da, g_bda, g_cda))
}

/// `P(t; x) = g_BDA g_CDA P0(T_DA)` for the one-species family.
pub fn composite_one_species<T: Real>(
    rates: NbRates,
    t: T,
    p0: &[(Vec<u32>, T)],
    max_deg: usize,
) -> Result<TruncatedSeries<T>, SemilinearError> {
    let (t_da, g_bda, g_cda) = composite_factors(rates, t, max_deg)?;
    let composed = TruncatedSeries::compose_terms(p0, std::slice::from_ref(&t_da))?;
    Ok(g_bda.mul(&g_cda)?.mul(&composed)?)
}

/// Closed-form PGF of a semi-linear system at time `t`: the composite
/// formula for one species, the tabulated solution for a single reaction in
/// several species.
pub fn solve_semilinear(system: &ReactionSystem, t: f64, max_deg: usize) -> Result<TruncatedSeries<f64>, SemilinearError> {
    let p0 = system.initial_terms::<f64>();
    match system.classify() {
        SystemClass::NonBinary => composite_one_species(NbRates::from_system(system)?, t, &p0, max_deg),
        SystemClass::SemiLinearMulti => {
            let active: Vec<&Reaction> = system.reactions().iter().filter(|r| !r.rate.is_zero()).collect();
            match active.as_slice() {
                [] => Ok(TruncatedSeries::compose_terms(
                    &p0,
                    &ElementarySolution::<f64>::identity(system.num_species(), max_deg).t,
                )?),
                [r] => apply_solution(&elementary_solution(r, t, max_deg)?, &p0),
                _ => Err(SemilinearError::Unsupported(
                    "several reactions in several species have no closed form here".into(),
                )),
            }
        }
        _ => Err(SemilinearError::Binary),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::master_equation;
    use crate::reaction_model::parse_dsl;
    use num_rational::BigRational;

    type S = TruncatedSeries<f64>;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn x(max_deg: usize) -> S {
        S::var(1, max_deg, 0)
    }

    fn mono(m: u32) -> Vec<(Vec<u32>, f64)> {
        vec![(vec![m], 1.0)]
    }

    #[test]
    fn table_rows() {
        let t = 0.3;
        let birth = elementary_solution::<f64>(&Reaction::single(0, 1, q(2, 1)), t, 10).unwrap();
        assert!(birth.g.sup_distance(&pgf::pois(0.6, &x(10))).unwrap() < 1e-15);
        assert_eq!(birth.t[0], x(10));
        let death = elementary_solution::<f64>(&Reaction::single(1, 0, q(2, 1)), t, 10).unwrap();
        assert_eq!(death.g, S::one(1, 10));
        assert!(death.t[0].sup_distance(&pgf::bern((-0.6f64).exp(), &x(10))).unwrap() < 1e-15);
        let auto = elementary_solution::<f64>(&Reaction::single(1, 2, q(2, 1)), t, 10).unwrap();
        assert!(auto.t[0].sup_distance(&pgf::geom((-0.6f64).exp(), &x(10)).unwrap()).unwrap() < 1e-15);
        assert!(matches!(
            elementary_solution::<f64>(&Reaction::single(2, 0, q(1, 1)), t, 10),
            Err(SemilinearError::Binary)
        ));
        assert!(matches!(
            elementary_solution::<f64>(&Reaction::single(1, 3, q(1, 1)), t, 10),
            Err(SemilinearError::Unsupported(_))
        ));
    }

    #[test]
    fn zero_time_is_identity() {
        for (i, o) in [(0, 1), (0, 2), (1, 0), (1, 2)] {
            let sol = elementary_solution::<f64>(&Reaction::single(i, o, q(3, 1)), 0.0, 8).unwrap();
            assert_eq!(sol, ElementarySolution::identity(1, 8));
        }
        let p = apply_solution(&elementary_solution::<f64>(&Reaction::single(1, 0, q(3, 1)), 0.0, 8).unwrap(), &mono(5))
            .unwrap();
        assert_eq!(p, S::monomial(1, 8, &[5, 0, 0], 1.0));
    }

    #[test]
    fn decay_from_one_matches_oracle() {
        let system = ReactionSystem::single_species(&[(1, 0, q(4, 1))], 1);
        let snaps = master_equation::integrate(&system, &[0.1, 0.5], 1, 1e-3).unwrap();
        for snap in snaps {
            let sol = elementary_solution::<f64>(&system.reactions()[0], snap.time, 3).unwrap();
            let p = apply_solution(&sol, &mono(1)).unwrap();
            let e = (-4.0 * snap.time).exp();
            assert!((p.coeff(0) - (1.0 - e)).abs() < 1e-15);
            assert!((p.coeff(1) - e).abs() < 1e-15);
            assert!((p.coeff(1) - snap.prob(&[1])).abs() < 1e-10);
        }
    }

    #[test]
    fn birth_from_empty_is_poisson() {
        let sol = elementary_solution::<f64>(&Reaction::single(0, 1, q(50, 1)), 0.1, 40).unwrap();
        let p = apply_solution(&sol, &mono(0)).unwrap();
        assert!(p.sup_distance(&pgf::pois(5.0, &x(40))).unwrap() < 1e-15);
        let rates = NbRates::new(0.0, 7.0, 0.0, 0.0);
        let comp = composite_one_species(rates, 0.5, &mono(0), 40).unwrap();
        assert!(comp.sup_distance(&pgf::pois(3.5, &x(40))).unwrap() < 1e-15);
    }

    #[test]
    fn pair_processes_keep_parity() {
        let create = elementary_solution::<f64>(&Reaction::single(0, 2, q(25, 1)), 0.5, 260).unwrap();
        let p = apply_solution(&create, &mono(100)).unwrap();
        for n in (1..=260).step_by(2) {
            assert_eq!(p.coeff(n), 0.0);
        }
    }

    #[test]
    fn multi_species_rows() {
        // A -> B: T_A = (1 - e) y + e x
        let r = Reaction::new(vec![1, 0], vec![0, 1], q(1, 1));
        let sol = elementary_solution::<f64>(&r, 0.7, 6).unwrap();
        let e = (-0.7f64).exp();
        assert!((sol.t[0].coefficient(&[1, 0]).unwrap() - e).abs() < 1e-15);
        assert!((sol.t[0].coefficient(&[0, 1]).unwrap() - (1.0 - e)).abs() < 1e-15);
        // A -> A + B from |2, 0>: B ~ Pois(2 r t) in distribution, A fixed
        let r = Reaction::new(vec![1, 0], vec![1, 1], q(1, 2));
        let p = apply_solution(&elementary_solution::<f64>(&r, 2.0, 12).unwrap(), &[(vec![2, 0], 1.0)]).unwrap();
        for k in 0..=10u32 {
            let fact: f64 = (1..=k).map(f64::from).product();
            let expect = (-2f64).exp() * 2f64.powi(k as i32) / fact;
            assert!((p.coefficient(&[2, k]).unwrap() - expect).abs() < 1e-14);
        }
        assert!((p.eval_at_one() - 1.0).abs() < 1e-4);
        // 0 -> A + B: g = exp(rt (xy - 1))
        let r = Reaction::new(vec![0, 0], vec![1, 1], q(1, 1));
        let p = apply_solution(&elementary_solution::<f64>(&r, 1.0, 8).unwrap(), &[(vec![0, 0], 1.0)]).unwrap();
        assert!((p.coefficient(&[1, 1]).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(p.coefficient(&[1, 0]).unwrap(), 0.0);
    }

    #[test]
    fn multi_species_against_oracle() {
        let system = parse_dsl("A -> B + C @ 0.8").unwrap().with_initial_state(vec![6, 0, 1]).unwrap();
        let g = master_equation::build_generator(&system, 7).unwrap();
        let snaps = master_equation::integrate_with(&g, &system, &[0.4, 1.5], master_equation::default_dt(&g)).unwrap();
        for snap in snaps {
            let p = solve_semilinear(&system, snap.time, 14).unwrap();
            for (n, prob) in snap.to_map() {
                assert!((p.coefficient(&n).unwrap() - prob).abs() < 1e-9, "{n:?} {} {prob}", p.coefficient(&n).unwrap());
            }
            assert!((p.eval_at_one() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_examples() {
        let decay = Reaction::single(1, 0, q(4, 1));
        assert!(semigroup_check(&decay, 0.3, 0.7, 40).unwrap() < 1e-12);
        assert_eq!(semigroup_check(&decay, 0.0, 0.7, 40).unwrap(), 0.0);
        let auto = Reaction::single(1, 2, q(1, 2));
        assert!(semigroup_check(&auto, 0.2, 0.2, 40).unwrap() < 1e-10);
        let birth = Reaction::single(0, 1, q(50, 1));
        assert!(semigroup_check(&birth, 0.3, 0.7, 40).unwrap() < 1e-10);
        let branch = Reaction::new(vec![1, 0], vec![1, 1], q(1, 1));
        assert!(semigroup_check(&branch, 0.3, 0.7, 12).unwrap() < 1e-12);
    }

    fn oracle(rates: NbRates, m: u32, times: &[f64]) -> Vec<master_equation::DistributionSnapshot> {
        let rs = [(1, 2, rates.alpha), (0, 1, rates.beta), (0, 2, rates.gamma), (1, 0, rates.tau)];
        let rs: Vec<(u32, u32, BigRational)> = rs
            .iter()
            .filter(|r| r.2 > 0.0)
            .map(|&(i, o, k)| (i, o, crate::scalar::f64_to_rational_decimal(k)))
            .collect();
        let system = ReactionSystem::single_species(&rs, m);
        let n_max = master_equation::suggest_n_max(&system, times);
        let g = master_equation::build_generator(&system, n_max).unwrap();
        master_equation::integrate_with(&g, &system, times, master_equation::default_dt(&g)).unwrap()
    }

    fn check_against_oracle(rates: NbRates, m: u32, times: &[f64], tol: f64) {
        for snap in oracle(rates, m, times) {
            let n_max = snap.states.n_max as usize;
            let p = composite_one_species(rates, snap.time, &mono(m), n_max).unwrap();
            let diff = (0..=n_max).map(|n| (p.coeff(n) - snap.probs[n]).abs()).fold(0.0, f64::max);
            assert!(diff < tol, "{rates:?} t={} diff {diff}", snap.time);
            assert!((p.eval_at_one() - 1.0).abs() < 1e-8);
            assert!((0..=n_max).all(|n| p.coeff(n) > -1e-10));
        }
    }

    #[test]
    fn composite_cases_against_oracle() {
        check_against_oracle(NbRates::new(0.0, 0.4, 0.2, 0.0), 10, &[0.5, 2.0], 1e-8);
        check_against_oracle(NbRates::new(0.5, 0.4, 0.3, 0.5), 10, &[0.5, 2.0], 1e-8);
        check_against_oracle(NbRates::new(0.1, 0.4, 0.2, 0.3), 10, &[0.5, 2.0], 1e-8);
        check_against_oracle(NbRates::new(0.6, 0.4, 0.2, 0.3), 10, &[0.5, 2.0], 1e-8);
        check_against_oracle(NbRates::new(0.0, 0.2, 0.6, 0.2), 10, &[0.5, 2.0], 1e-8);
        check_against_oracle(NbRates::new(0.4, 0.3, 0.2, 0.0), 10, &[0.5, 1.0], 1e-8);
    }

    #[test]
    fn autocatalysis_without_death_matches_elementary() {
        let rates = NbRates::new(0.5, 0.0, 0.0, 0.0);
        let comp = composite_one_species(rates, 1.0, &mono(3), 60).unwrap();
        let elem = apply_solution(&elementary_solution::<f64>(&Reaction::single(1, 2, q(1, 2)), 1.0, 60).unwrap(), &mono(3))
            .unwrap();
        assert!(comp.sup_distance(&elem).unwrap() < 1e-14);
    }

    #[test]
    fn continuity_across_equal_rates() {
        let tau = 1.0 / 3.0;
        let eq = composite_one_species(NbRates::new(tau, 0.1, 1.0 / 3.0, tau), 2.0, &mono(20), 120).unwrap();
        let near = composite_one_species(NbRates::new(tau + 1e-6, 0.1, 1.0 / 3.0, tau), 2.0, &mono(20), 120).unwrap();
        let d = eq.sup_distance(&near).unwrap();
        assert!(d < 1e-4, "{d}");
    }

    #[test]
    fn critical_mean_grows_by_pair_creation() {
        // With alpha = tau the lineages are critical, so only creation moves the mean.
        let (a, g) = (1.0 / 3.0, 1.0 / 3.0);
        for t in [0.5, 2.0] {
            let p = composite_one_species(NbRates::new(a, 0.0, g, a), t, &mono(20), 200).unwrap();
            let mean = p.derivative(0).unwrap().eval_at_one();
            assert!((mean - (20.0 + 2.0 * g * t)).abs() < 1e-9, "{mean}");
        }
    }

    #[test]
    fn rates_from_system() {
        let s = parse_dsl("A -> 2 A @ 1; 0 -> A @ 2; 0 -> 2 A @ 3; A -> 0 @ 4; A -> 0 @ 1").unwrap();
        assert_eq!(NbRates::from_system(&s).unwrap(), NbRates::new(1.0, 2.0, 3.0, 5.0));
        let bad = parse_dsl("A -> 3 A @ 1").unwrap();
        assert!(NbRates::from_system(&bad).is_err());
    }
}
