use std::fmt;

use super::{Polynomial, SeriesError};
use crate::scalar::{Real, Scalar};

pub const MAX_VARS: usize = 3;

/// Exponent vector, padded with zeros beyond `vars`.
pub type Exps = [u32; MAX_VARS];

/// Number of monomials in `vars` variables of total degree strictly below `d`.
fn offset(vars: usize, d: usize) -> usize {
    match vars {
        1 => d,
        2 => d * (d + 1) / 2,
        _ => d * (d + 1) * (d + 2) / 6,
    }
}

fn block_len(vars: usize, d: usize) -> usize {
    match vars {
        1 => 1,
        2 => d + 1,
        _ => (d + 1) * (d + 2) / 2,
    }
}

/// Position of a monomial inside its total-degree block.
fn in_block(vars: usize, e: &Exps) -> usize {
    match vars {
        1 => 0,
        2 => e[1] as usize,
        _ => {
            let r = (e[1] + e[2]) as usize;
            r * (r + 1) / 2 + e[2] as usize
        }
    }
}

fn block_exps(vars: usize, d: usize) -> Vec<Exps> {
    let d32 = d as u32;
    match vars {
        1 => vec![[d32, 0, 0]],
        2 => (0..=d32).map(|e1| [d32 - e1, e1, 0]).collect(),
        _ => (0..=d32)
            .flat_map(|r| (0..=r).map(move |e2| [d32 - r, r - e2, e2]))
            .collect(),
    }
}

/// Dense multivariate power series truncated at a total-degree cutoff.
///
/// Coefficients are stored graded by total degree, so each homogeneous
/// block is a contiguous slice; the Euler operator `sum x_i d/dx_i` acts on
/// block `d` as multiplication by `d`, which is what the `pow`, `exp` and
/// `recip` recurrences are built on.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<T: Scalar> {
    vars: usize,
    max_deg: usize,
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncatedSeries<T> {
    pub fn zero(vars: usize, max_deg: usize) -> Self {
        assert!((1..=MAX_VARS).contains(&vars), "1..=3 variables supported");
        TruncatedSeries { vars, max_deg, coeffs: vec![T::zero(); offset(vars, max_deg + 1)] }
    }

    pub fn constant(vars: usize, max_deg: usize, c: T) -> Self {
        let mut s = Self::zero(vars, max_deg);
        s.coeffs[0] = c;
        s
    }

    pub fn one(vars: usize, max_deg: usize) -> Self {
        Self::constant(vars, max_deg, T::one())
    }

    /// The coordinate `x_i`.
    pub fn var(vars: usize, max_deg: usize, i: usize) -> Self {
        assert!(i < vars);
        let mut e = [0; MAX_VARS];
        e[i] = 1;
        Self::monomial(vars, max_deg, &e, T::one())
    }

    /// `c * x^e`, or zero if the monomial lies beyond the cutoff.
    pub fn monomial(vars: usize, max_deg: usize, e: &Exps, c: T) -> Self {
        let mut s = Self::zero(vars, max_deg);
        if let Some(idx) = s.index(e) {
            s.coeffs[idx] = c;
        }
        s
    }

    /// Univariate series from a coefficient list (extra entries dropped).
    pub fn from_coeffs(max_deg: usize, coeffs: &[T]) -> Self {
        let mut s = Self::zero(1, max_deg);
        for (k, c) in coeffs.iter().take(max_deg + 1).enumerate() {
            s.coeffs[k] = c.clone();
        }
        s
    }

    pub fn from_polynomial(p: &Polynomial<T>, max_deg: usize) -> Self {
        Self::from_coeffs(max_deg, p.coeffs())
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn max_deg(&self) -> usize {
        self.max_deg
    }

    /// Flat coefficient storage, graded by total degree.
    pub fn raw(&self) -> &[T] {
        &self.coeffs
    }

    fn index(&self, e: &Exps) -> Option<usize> {
        if e[self.vars..].iter().any(|&x| x != 0) {
            return None;
        }
        let d: usize = e.iter().map(|&x| x as usize).sum();
        (d <= self.max_deg).then(|| offset(self.vars, d) + in_block(self.vars, e))
    }

    fn block(&self, d: usize) -> &[T] {
        &self.coeffs[offset(self.vars, d)..offset(self.vars, d + 1)]
    }

    fn check_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars || self.max_deg != other.max_deg {
            return Err(SeriesError::ShapeMismatch {
                left: (self.vars, self.max_deg),
                right: (other.vars, other.max_deg),
            });
        }
        Ok(())
    }

    pub fn coefficient(&self, e: &[u32]) -> Result<T, SeriesError> {
        if e.len() != self.vars {
            return Err(SeriesError::Arity { expected: self.vars, got: e.len() });
        }
        let mut full = [0; MAX_VARS];
        full[..e.len()].copy_from_slice(e);
        self.index(&full)
            .map(|i| self.coeffs[i].clone())
            .ok_or(SeriesError::BeyondCutoff { degree: e.iter().map(|&x| x as usize).sum(), max_deg: self.max_deg })
    }

    /// Univariate shorthand for [`coefficient`](Self::coefficient).
    pub fn coeff(&self, n: usize) -> T {
        debug_assert_eq!(self.vars, 1);
        self.coeffs.get(n).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeffs[0].clone()
    }

    /// Iterates `(exponents, coefficient)` in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (Exps, &T)> + '_ {
        (0..=self.max_deg)
            .flat_map(move |d| block_exps(self.vars, d))
            .zip(self.coeffs.iter())
    }

    pub fn eval_at_one(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.clone())
    }

    /// Evaluates the truncated polynomial at a point.
    pub fn eval(&self, point: &[T]) -> T {
        assert_eq!(point.len(), self.vars);
        if self.vars == 1 {
            return self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * point[0].clone() + c.clone());
        }
        let mut total = T::zero();
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (v, &k) in point.iter().zip(e.iter()) {
                for _ in 0..k {
                    term = term * v.clone();
                }
            }
            total = total + term;
        }
        total
    }

    pub fn derivative(&self, var: usize) -> Result<Self, SeriesError> {
        if var >= self.vars {
            return Err(SeriesError::Arity { expected: self.vars, got: var + 1 });
        }
        let mut out = Self::zero(self.vars, self.max_deg);
        for (e, c) in self.terms() {
            if e[var] == 0 || c.is_zero() {
                continue;
            }
            let mut lowered = e;
            lowered[var] -= 1;
            let idx = out.index(&lowered).expect("lower degree fits");
            out.coeffs[idx] = c.clone() * T::from_i64(i64::from(e[var]));
        }
        Ok(out)
    }

    /// Re-truncates to a different cutoff (padding with zeros when growing).
    pub fn with_max_deg(&self, max_deg: usize) -> Self {
        let mut out = Self::zero(self.vars, max_deg);
        let n = out.coeffs.len().min(self.coeffs.len());
        out.coeffs[..n].clone_from_slice(&self.coeffs[..n]);
        out
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> TruncatedSeries<U> {
        TruncatedSeries { vars: self.vars, max_deg: self.max_deg, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|a| a.clone() * c.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *a = a.clone() + b.clone();
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn add_constant(&self, c: &T) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = out.coeffs[0].clone() + c.clone();
        out
    }

    /// Accumulates `a * b` for homogeneous blocks of degrees `i` and `j` into
    /// the block of degree `i + j` of `out` (which must fit the cutoff).
    fn block_mul_acc(vars: usize, a: &[T], i: usize, b: &[T], j: usize, out: &mut [T]) {
        if vars == 1 {
            if !a[0].is_zero() && !b[0].is_zero() {
                out[0] = out[0].clone() + a[0].clone() * b[0].clone();
            }
            return;
        }
        let ea = block_exps(vars, i);
        let eb = block_exps(vars, j);
        for (x, ca) in ea.iter().zip(a) {
            if ca.is_zero() {
                continue;
            }
            for (y, cb) in eb.iter().zip(b) {
                if cb.is_zero() {
                    continue;
                }
                let e = [x[0] + y[0], x[1] + y[1], x[2] + y[2]];
                let k = in_block(vars, &e);
                out[k] = out[k].clone() + ca.clone() * cb.clone();
            }
        }
    }

    fn block_mut(&mut self, d: usize) -> &mut [T] {
        let (lo, hi) = (offset(self.vars, d), offset(self.vars, d + 1));
        &mut self.coeffs[lo..hi]
    }

    /// Cauchy product truncated at the common cutoff.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_shape(other)?;
        let mut out = Self::zero(self.vars, self.max_deg);
        if self.vars == 1 {
            for (i, a) in self.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (j, b) in other.coeffs[..=self.max_deg - i].iter().enumerate() {
                    if !b.is_zero() {
                        out.coeffs[i + j] = out.coeffs[i + j].clone() + a.clone() * b.clone();
                    }
                }
            }
            return Ok(out);
        }
        for d in 0..=self.max_deg {
            let mut acc = vec![T::zero(); block_len(self.vars, d)];
            for i in 0..=d {
                Self::block_mul_acc(self.vars, self.block(i), i, other.block(d - i), d - i, &mut acc);
            }
            out.block_mut(d).clone_from_slice(&acc);
        }
        Ok(out)
    }

    /// Integer power by repeated squaring.
    pub fn pow_int(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.vars, self.max_deg);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base).expect("same shape");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same shape");
            }
        }
        acc
    }

    /// `sum_{j=1}^{n} w(j) s_j y_{n-j}` assembled as a homogeneous block of degree `n`.
    fn recurrence_block(&self, y: &Self, n: usize, w: impl Fn(usize) -> T) -> Vec<T> {
        let mut acc = vec![T::zero(); block_len(self.vars, n)];
        for j in 1..=n {
            let wj = w(j);
            if wj.is_zero() {
                continue;
            }
            let mut part = vec![T::zero(); block_len(self.vars, n)];
            Self::block_mul_acc(self.vars, self.block(j), j, y.block(n - j), n - j, &mut part);
            for (a, p) in acc.iter_mut().zip(part) {
                *a = a.clone() + wj.clone() * p;
            }
        }
        acc
    }

    /// `s^mu` given `y0 = s_0^mu`, from `n s_0 y_n = sum_j (mu j - (n - j)) s_j y_{n-j}`.
    pub fn pow_with(&self, mu: &T, y0: T) -> Result<Self, SeriesError> {
        let s0 = self.constant_term();
        if s0.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let mut y = Self::constant(self.vars, self.max_deg, y0);
        for n in 1..=self.max_deg {
            let nn = T::from_usize(n);
            let block = self.recurrence_block(&y, n, |j| mu.clone() * T::from_usize(j) - T::from_usize(n - j));
            let denom = nn * s0.clone();
            for (dst, v) in y.block_mut(n).iter_mut().zip(block) {
                *dst = v / denom.clone();
            }
        }
        Ok(y)
    }

    /// `exp(s)` given `y0 = exp(s_0)`, from `n y_n = sum_j j s_j y_{n-j}`.
    pub fn exp_with(&self, y0: T) -> Self {
        let mut y = Self::constant(self.vars, self.max_deg, y0);
        for n in 1..=self.max_deg {
            let nn = T::from_usize(n);
            let block = self.recurrence_block(&y, n, |j| T::from_usize(j));
            for (dst, v) in y.block_mut(n).iter_mut().zip(block) {
                *dst = v / nn.clone();
            }
        }
        y
    }

    /// `exp(s)` for a series with zero constant term; exact in rational mode.
    pub fn exp_nilpotent(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonZeroConstantTerm);
        }
        Ok(self.exp_with(T::one()))
    }

    /// `1 / s`.
    pub fn recip(&self) -> Result<Self, SeriesError> {
        let s0 = self.constant_term();
        if s0.is_zero() {
            return Err(SeriesError::ZeroConstantTerm);
        }
        let inv0 = T::one() / s0;
        let mut y = Self::constant(self.vars, self.max_deg, inv0.clone());
        for n in 1..=self.max_deg {
            let block = self.recurrence_block(&y, n, |_| T::one());
            for (dst, v) in y.block_mut(n).iter_mut().zip(block) {
                *dst = -(v * inv0.clone());
            }
        }
        Ok(y)
    }

    /// `p(self)` for a univariate polynomial `p`, by Horner's scheme. The
    /// result is exact up to the cutoff for any constant term of `self`.
    pub fn compose_polynomial(&self, outer: &Polynomial<T>) -> Self {
        let mut acc = Self::zero(self.vars, self.max_deg);
        for c in outer.coeffs().iter().rev() {
            acc = acc.mul(self).expect("same shape").add_constant(c);
        }
        acc
    }

    /// `outer(inner)` for a univariate outer series. Permitted when the inner
    /// constant term vanishes (so truncation commutes with substitution) or
    /// when the outer series is a polynomial, i.e. its top coefficient is
    /// zero and the stored coefficients are the whole function.
    pub fn compose_series(outer: &Self, inner: &Self) -> Result<Self, SeriesError> {
        if outer.vars != 1 {
            return Err(SeriesError::Arity { expected: 1, got: outer.vars });
        }
        let poly = Polynomial::new(outer.coeffs.clone());
        let inner_const_zero = inner.constant_term().is_zero();
        let top_free = poly.degree().is_none_or(|d| d < outer.max_deg);
        if !inner_const_zero && !top_free {
            return Err(SeriesError::NotPolynomial);
        }
        Ok(inner.compose_polynomial(&poly))
    }

    /// Substitutes one series per variable into a polynomial given as
    /// `(exponents, coefficient)` terms; the building block of `P0(T(x))`.
    pub fn compose_terms(terms: &[(Vec<u32>, T)], inners: &[Self]) -> Result<Self, SeriesError> {
        let first = inners.first().ok_or(SeriesError::Arity { expected: 1, got: 0 })?;
        for s in inners {
            first.check_shape(s)?;
        }
        if inners.len() == 1 {
            let deg = terms.iter().map(|(e, _)| e[0] as usize).max().unwrap_or(0);
            let mut coeffs = vec![T::zero(); deg + 1];
            for (e, c) in terms {
                let k = e[0] as usize;
                coeffs[k] = coeffs[k].clone() + c.clone();
            }
            return Ok(first.compose_polynomial(&Polynomial::new(coeffs)));
        }
        let mut powers: Vec<Vec<Self>> = inners.iter().map(|s| vec![Self::one(s.vars, s.max_deg)]).collect();
        let mut out = Self::zero(first.vars, first.max_deg);
        for (e, c) in terms {
            if e.len() != inners.len() {
                return Err(SeriesError::Arity { expected: inners.len(), got: e.len() });
            }
            let mut term = Self::constant(first.vars, first.max_deg, c.clone());
            for (v, &k) in e.iter().enumerate() {
                while powers[v].len() <= k as usize {
                    let next = powers[v].last().expect("seeded").mul(&inners[v])?;
                    powers[v].push(next);
                }
                term = term.mul(&powers[v][k as usize])?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Largest absolute coefficient difference, in `f64`.
    pub fn sup_distance(&self, other: &Self) -> Result<f64, SeriesError> {
        self.check_shape(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a.clone() - b.clone()).to_f64().abs())
            .fold(0.0, f64::max))
    }
}

impl<T: Real> TruncatedSeries<T> {
    /// `s^mu` for real `mu >= 0`.
    pub fn pow_real(&self, mu: T) -> Result<Self, SeriesError> {
        if mu.is_zero() {
            return Ok(Self::one(self.vars, self.max_deg));
        }
        let s0 = self.constant_term();
        self.pow_with(&mu, s0.powf(mu))
    }

    pub fn exp(&self) -> Self {
        self.exp_with(self.constant_term().exp())
    }
}

impl<T: Scalar> fmt::Display for TruncatedSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "z"];
        let mut first = true;
        for (e, c) in self.terms() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (v, &k) in e.iter().enumerate().take(self.vars) {
                match k {
                    0 => {}
                    1 => write!(f, "{}", names[v])?,
                    _ => write!(f, "{}^{k}", names[v])?,
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(deg {})", self.max_deg + 1)
    }
}
