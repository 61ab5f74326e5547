//! Polynomials over `F_q`: the dense space `F_{r,d}` of `r`-variate
//! polynomials of total degree at most `d`, univariate polynomials, and the
//! specialization `F -> F(a, T)` onto a vertical strip.
//!
//! Coefficients of a [`MultiPoly`] are stored in graded-lex order: by total
//! degree, then by descending exponent of `X_1`, then of `X_2`, and so on.
//! For `r = 2, d = 2` the order is `1, X_1, X_2, X_1^2, X_1 X_2, X_2^2`.

mod text;
mod uni;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::Rng;
use thiserror::Error;

use crate::ff::{sample_uniform, Elem, FieldCtx, FieldError};

pub use text::{parse_inline, parse_poly, write_poly};
pub use uni::{
    uni_add, uni_divrem, uni_eval, uni_gcd, uni_mul, uni_mulmod, uni_powmod, uni_rem, uni_sub,
    UniPoly,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("dimension C(d+r, r) = {0} does not fit a machine word")]
    Overflow(BigUint),
    #[error("monomial index or exponent vector out of range")]
    OutOfRange,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("modulus is the zero polynomial")]
    ZeroModulus,
    #[error("duplicate term with exponents {0:?}")]
    DuplicateTerm(Vec<u32>),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Exact binomial coefficient.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    num_integer::binomial(BigUint::from(n), BigUint::from(k.min(n - k)))
}

/// `C(n, k)` as a machine word, `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `D = C(d+r, r)`, the number of coefficients of an element of `F_{r,d}`.
pub fn dim_f(r: usize, d: usize) -> Result<usize, PolyError> {
    let exact = binomial_big((d + r) as u64, r as u64);
    exact.to_usize().ok_or(PolyError::Overflow(exact))
}

// number of vectors of `m` non-negative integers summing to `n`
fn compositions(m: usize, n: u32) -> usize {
    if m == 0 {
        return usize::from(n == 0);
    }
    binomial(n as u64 + m as u64 - 1, m as u64 - 1).expect("small binomial") as usize
}

/// Graded-lex rank of an exponent vector with total degree `<= d`.
pub fn monomial_rank(exps: &[u32], d: usize) -> Result<usize, PolyError> {
    let r = exps.len();
    if r == 0 {
        return Err(PolyError::OutOfRange);
    }
    let g: u32 = exps.iter().sum();
    if g as usize > d {
        return Err(PolyError::OutOfRange);
    }
    // monomials of total degree < g
    let mut rank = if g == 0 { 0 } else { dim_f(r, g as usize - 1)? };
    let mut rem = g;
    for (i, &e) in exps.iter().enumerate().take(r - 1) {
        for v in e + 1..=rem {
            rank += compositions(r - i - 1, rem - v);
        }
        rem -= e;
    }
    Ok(rank)
}

/// Inverse of [`monomial_rank`].
pub fn monomial_unrank(idx: usize, r: usize, d: usize) -> Result<Vec<u32>, PolyError> {
    if r == 0 || idx >= dim_f(r, d)? {
        return Err(PolyError::OutOfRange);
    }
    let mut g = 0;
    while dim_f(r, g)? <= idx {
        g += 1;
    }
    let mut pos = idx - if g == 0 { 0 } else { dim_f(r, g - 1)? };
    let mut rem = g as u32;
    let mut exps = Vec::with_capacity(r);
    for i in 0..r - 1 {
        let mut v = rem;
        loop {
            let c = compositions(r - i - 1, rem - v);
            if pos < c {
                break;
            }
            pos -= c;
            v -= 1;
        }
        exps.push(v);
        rem -= v;
    }
    exps.push(rem);
    Ok(exps)
}

/// The exponent vectors of `F_{r,d}` in rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    r: usize,
    d: usize,
    exps: Vec<u32>,
}

impl MonomialBasis {
    pub fn new(r: usize, d: usize) -> Result<Self, PolyError> {
        let n = dim_f(r, d)?;
        let mut exps = Vec::with_capacity(n * r);
        let mut cur = vec![0u32; r];
        for g in 0..=d as u32 {
            push_grade(&mut exps, &mut cur, 0, g);
        }
        debug_assert_eq!(exps.len(), n * r);
        Ok(MonomialBasis { r, d, exps })
    }

    pub fn len(&self) -> usize {
        self.exps.len() / self.r
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exps(&self, idx: usize) -> &[u32] {
        &self.exps[idx * self.r..(idx + 1) * self.r]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.exps.chunks_exact(self.r)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }
}

// Emits the exponent vectors of total degree exactly `rem + sum(cur[..i])`
// in descending lex order.
fn push_grade(out: &mut Vec<u32>, cur: &mut [u32], i: usize, rem: u32) {
    if i == cur.len() - 1 {
        cur[i] = rem;
        out.extend_from_slice(cur);
        return;
    }
    for v in (0..=rem).rev() {
        cur[i] = v;
        push_grade(out, cur, i + 1, rem - v);
    }
}

/// An element of `F_{r,d}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    r: usize,
    d: usize,
    coeffs: Vec<Elem>,
}

impl MultiPoly {
    pub fn zero(r: usize, d: usize) -> Result<Self, PolyError> {
        Ok(MultiPoly { r, d, coeffs: vec![Elem::ZERO; dim_f(r, d)?] })
    }

    pub fn from_coeffs(r: usize, d: usize, coeffs: Vec<Elem>) -> Result<Self, PolyError> {
        let n = dim_f(r, d)?;
        if coeffs.len() != n {
            return Err(PolyError::DimensionMismatch { expected: n, got: coeffs.len() });
        }
        Ok(MultiPoly { r, d, coeffs })
    }

    /// Builds a polynomial from `(coefficient, exponents)` terms; repeated
    /// exponent vectors are rejected.
    pub fn from_terms<'a, I>(r: usize, d: usize, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Elem, &'a [u32])>,
    {
        let mut f = MultiPoly::zero(r, d)?;
        let mut seen = vec![false; f.coeffs.len()];
        for (c, exps) in terms {
            if exps.len() != r {
                return Err(PolyError::DimensionMismatch { expected: r, got: exps.len() });
            }
            let idx = monomial_rank(exps, d)?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(PolyError::DuplicateTerm(exps.to_vec()));
            }
            f.coeffs[idx] = c;
        }
        Ok(f)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Elem] {
        &mut self.coeffs
    }

    pub fn coeff(&self, exps: &[u32]) -> Result<Elem, PolyError> {
        Ok(self.coeffs[monomial_rank(exps, self.d)?])
    }

    pub fn set_coeff(&mut self, exps: &[u32], c: Elem) -> Result<(), PolyError> {
        let idx = monomial_rank(exps, self.d)?;
        self.coeffs[idx] = c;
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Nonzero terms in graded-lex order.
    pub fn terms(&self) -> Vec<(Elem, Vec<u32>)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, &c)| (c, monomial_unrank(i, self.r, self.d).expect("rank in range")))
            .collect()
    }
}

/// Uniform element of `F_{r,d}`: every coefficient i.i.d. uniform.
pub fn sample_poly<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    r: usize,
    d: usize,
    rng: &mut R,
) -> Result<MultiPoly, PolyError> {
    let n = dim_f(r, d)?;
    let coeffs = (0..n).map(|_| sample_uniform(ctx, rng)).collect();
    Ok(MultiPoly { r, d, coeffs })
}

/// Refills `f` in place with a fresh uniform sample.
pub fn resample_poly<R: Rng + ?Sized>(ctx: &FieldCtx, f: &mut MultiPoly, rng: &mut R) {
    for c in &mut f.coeffs {
        *c = sample_uniform(ctx, rng);
    }
}

// powers[v * (d + 1) + e] = x_v^e
fn power_table(ctx: &FieldCtx, x: &[Elem], d: usize) -> Vec<Elem> {
    let mut out = Vec::with_capacity(x.len() * (d + 1));
    for &xv in x {
        let mut acc = Elem::ONE;
        for _ in 0..=d {
            out.push(acc);
            acc = ctx.mul(acc, xv);
        }
    }
    out
}

/// `F(x)` for `x in F_q^r`.
pub fn eval(ctx: &FieldCtx, f: &MultiPoly, x: &[Elem]) -> Result<Elem, PolyError> {
    if x.len() != f.r {
        return Err(PolyError::DimensionMismatch { expected: f.r, got: x.len() });
    }
    let basis = MonomialBasis::new(f.r, f.d)?;
    Ok(eval_with_basis(ctx, f, &basis, x))
}

pub(crate) fn eval_with_basis(
    ctx: &FieldCtx,
    f: &MultiPoly,
    basis: &MonomialBasis,
    x: &[Elem],
) -> Elem {
    let stride = f.d + 1;
    let pw = power_table(ctx, x, f.d);
    let mut acc = Elem::ZERO;
    for (&c, exps) in f.coeffs.iter().zip(basis.iter()) {
        if c.is_zero() {
            continue;
        }
        let mono = exps
            .iter()
            .enumerate()
            .fold(c, |m, (v, &e)| ctx.mul(m, pw[v * stride + e as usize]));
        acc = ctx.add(acc, mono);
    }
    acc
}

/// A vertical strip `{a} x F_q`, identified by `a in F_q^{r-1}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strip(pub Vec<Elem>);

impl Strip {
    pub fn coords(&self) -> &[Elem] {
        &self.0
    }

    /// Strip with coordinates given by the base-`q` digits of `idx`
    /// (first coordinate least significant).
    pub fn from_index(idx: u64, dim: usize, q: u64) -> Self {
        let mut x = idx;
        Strip(
            (0..dim)
                .map(|_| {
                    let c = x % q;
                    x /= q;
                    Elem(c)
                })
                .collect(),
        )
    }

    pub fn index(&self, q: u64) -> u64 {
        self.0.iter().rev().fold(0, |acc, c| acc * q + c.0)
    }

    /// The point `(a, t)`.
    pub fn point(&self, t: Elem) -> Vec<Elem> {
        let mut x = self.0.clone();
        x.push(t);
        x
    }
}

/// Specialization plan for a fixed `(r, d)`: per monomial, the power of
/// `T = X_r` and the exponents of the strip coordinates.
#[derive(Debug, Clone)]
pub struct Specializer {
    basis: MonomialBasis,
}

/// The monomial values `a^w` (first `r-1` exponents) for one strip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripWeights {
    weights: Vec<Elem>,
}

impl Specializer {
    pub fn new(r: usize, d: usize) -> Result<Self, PolyError> {
        if r < 1 {
            return Err(PolyError::OutOfRange);
        }
        Ok(Specializer { basis: MonomialBasis::new(r, d)? })
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn weights(&self, ctx: &FieldCtx, a: &Strip) -> Result<StripWeights, PolyError> {
        let r = self.basis.r;
        let d = self.basis.d;
        if a.0.len() + 1 != r {
            return Err(PolyError::DimensionMismatch { expected: r - 1, got: a.0.len() });
        }
        let stride = d + 1;
        let pw = power_table(ctx, &a.0, d);
        let weights = self
            .basis
            .iter()
            .map(|exps| {
                let mut m = Elem::ONE;
                for (v, &e) in exps[..r - 1].iter().enumerate() {
                    if e > 0 {
                        m = ctx.mul(m, pw[v * stride + e as usize]);
                    }
                }
                m
            })
            .collect();
        Ok(StripWeights { weights })
    }

    /// `F(a, T)` from precomputed strip weights.
    pub fn apply(&self, ctx: &FieldCtx, f: &MultiPoly, w: &StripWeights) -> UniPoly {
        let r = self.basis.r;
        let mut out = vec![Elem::ZERO; self.basis.d + 1];
        for ((&c, &wt), exps) in f.coeffs.iter().zip(&w.weights).zip(self.basis.iter()) {
            let t = exps[r - 1] as usize;
            out[t] = ctx.add(out[t], ctx.mul(c, wt));
        }
        UniPoly::new(out)
    }

    pub fn specialize(
        &self,
        ctx: &FieldCtx,
        f: &MultiPoly,
        a: &Strip,
    ) -> Result<UniPoly, PolyError> {
        if f.r != self.basis.r || f.d != self.basis.d {
            return Err(PolyError::DimensionMismatch { expected: self.basis.r, got: f.r });
        }
        let w = self.weights(ctx, a)?;
        Ok(self.apply(ctx, f, &w))
    }
}

/// `F(a, T)` as a univariate polynomial of degree `<= d`.
pub fn specialize(ctx: &FieldCtx, f: &MultiPoly, a: &Strip) -> Result<UniPoly, PolyError> {
    Specializer::new(f.r, f.d)?.specialize(ctx, f, a)
}
