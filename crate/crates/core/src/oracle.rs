//! Brute-force ground truth for small instances.
//!
//! Everything here works by exhaustive scanning or enumeration and is meant
//! to check the fast paths and the closed forms, not to be fast itself.
//! Each enumeration checks its size against an [`EnumGuard`] first.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use thiserror::Error;

use crate::analytics::{d_j, kappa, ExactRational};
use crate::ff::{sample_uniform, Elem, FieldCtx};
use crate::poly::{
    dim_f, eval_with_basis, MonomialBasis, MultiPoly, PolyError, Specializer, Strip, UniPoly,
};
use crate::search::strip_count;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration of {needed} states exceeds the guard of {limit}")]
    GuardExceeded { needed: String, limit: u64 },
    #[error("leading coefficient of the prefix is zero")]
    ZeroLeading,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Result<T> = std::result::Result<T, OracleError>;

/// Cap on the number of states an enumeration may visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumGuard {
    pub max_states: u64,
}

impl Default for EnumGuard {
    fn default() -> Self {
        EnumGuard { max_states: 1 << 30 }
    }
}

impl EnumGuard {
    pub fn new(max_states: u64) -> Self {
        EnumGuard { max_states }
    }

    /// Checks `q^e` states.
    pub fn check_pow(&self, q: u64, e: usize) -> Result<u64> {
        let needed = BigInt::from(q).pow(e as u32);
        match u64::try_from(&needed) {
            Ok(n) if n <= self.max_states => Ok(n),
            _ => Err(OracleError::GuardExceeded { needed: needed.to_string(), limit: self.max_states }),
        }
    }
}

fn rat(n: u64, d: u64) -> ExactRational {
    BigRational::new(n.into(), d.into())
}

/// All points of `F_q^r` where `F` vanishes, in strip-major order.
pub fn zero_set(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<Vec<Vec<Elem>>> {
    let total = guard.check_pow(ctx.q(), f.r())?;
    let basis = MonomialBasis::new(f.r(), f.d())?;
    let mut out = Vec::new();
    for idx in 0..total {
        let x = Strip::from_index(idx, f.r(), ctx.q()).0;
        if eval_with_basis(ctx, f, &basis, &x).is_zero() {
            out.push(x);
        }
    }
    Ok(out)
}

/// `N(F)`, the number of zeros in `F_q^r`.
pub fn n_of(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<u64> {
    Ok(zero_set(f, ctx, guard)?.len() as u64)
}

/// `N_a(F)` for one strip.
pub fn n_strip(f: &MultiPoly, a: &Strip, ctx: &FieldCtx) -> Result<u64> {
    if a.0.len() + 1 != f.r() {
        return Err(PolyError::DimensionMismatch { expected: f.r() - 1, got: a.0.len() }.into());
    }
    let basis = MonomialBasis::new(f.r(), f.d())?;
    Ok(ctx
        .elements()
        .filter(|&t| eval_with_basis(ctx, f, &basis, &a.point(t)).is_zero())
        .count() as u64)
}

/// `N_a(F)` for every strip `a`, indexed by [`Strip::index`].
pub fn strip_root_counts(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<Vec<u64>> {
    guard.check_pow(ctx.q(), f.r())?;
    let strips = strip_count(ctx.q(), f.r()).expect("guarded");
    let basis = MonomialBasis::new(f.r(), f.d())?;
    Ok((0..strips)
        .map(|i| {
            let a = Strip::from_index(i, f.r() - 1, ctx.q());
            ctx.elements()
                .filter(|&t| eval_with_basis(ctx, f, &basis, &a.point(t)).is_zero())
                .count() as u64
        })
        .collect())
}

/// `VS(F)`: the strips carrying at least one zero.
pub fn vs_of(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<Vec<Strip>> {
    Ok(strip_root_counts(f, ctx, guard)?
        .iter()
        .enumerate()
        .filter(|(_, &n)| n > 0)
        .map(|(i, _)| Strip::from_index(i as u64, f.r() - 1, ctx.q()))
        .collect())
}

/// `NS(F) = |VS(F)|`.
pub fn ns_of(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<u64> {
    Ok(strip_root_counts(f, ctx, guard)?.iter().filter(|&&n| n > 0).count() as u64)
}

/// `|{f(c) : c in F_q}|`.
pub fn value_set_card(f: &UniPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<u64> {
    guard.check_pow(ctx.q(), 1)?;
    Ok(ctx.elements().map(|c| f.eval(ctx, c)).collect::<HashSet<_>>().len() as u64)
}

// Coefficient vector (low to high) of the family member with free part `b`.
fn family_member(d: usize, prefix: &[Elem], b: &[Elem]) -> UniPoly {
    let mut c = b.to_vec();
    c.extend(prefix.iter().rev());
    debug_assert_eq!(c.len(), d + 1);
    UniPoly::new(c)
}

fn check_prefix(d: usize, j: usize, prefix: &[Elem]) -> Result<()> {
    if j == 0 || j > d || prefix.len() != j {
        return Err(OracleError::Invalid(format!("need 1 <= j = {j} <= d = {d} prefix entries")));
    }
    if prefix[0].is_zero() {
        return Err(OracleError::ZeroLeading);
    }
    Ok(())
}

/// Exact average value-set size over the polynomials of degree `d` whose `j`
/// top coefficients are `prefix = (a_d, ..., a_{d-j+1})`.
pub fn avg_value_set(
    ctx: &FieldCtx,
    d: usize,
    j: usize,
    prefix: &[Elem],
    guard: &EnumGuard,
) -> Result<ExactRational> {
    check_prefix(d, j, prefix)?;
    let free = d + 1 - j;
    let members = guard.check_pow(ctx.q(), free + 1)? / ctx.q();
    let mut b = vec![Elem::ZERO; free];
    let mut total = 0u64;
    let mut seen = vec![false; ctx.q() as usize];
    for _ in 0..members {
        let f = family_member(d, prefix, &b);
        seen.iter_mut().for_each(|s| *s = false);
        for c in ctx.elements() {
            seen[f.eval(ctx, c).0 as usize] = true;
        }
        total += seen.iter().filter(|&&s| s).count() as u64;
        odometer(&mut b, ctx.q());
    }
    Ok(rat(total, members))
}

/// Sampled average value-set size with its standard error, for families too
/// large to enumerate.
pub fn avg_value_set_sampled<R: Rng + ?Sized>(
    ctx: &FieldCtx,
    d: usize,
    j: usize,
    prefix: &[Elem],
    samples: u64,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_prefix(d, j, prefix)?;
    if samples < 2 {
        return Err(OracleError::Invalid("need at least two samples".into()));
    }
    let free = d + 1 - j;
    let mut seen = vec![false; ctx.q() as usize];
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let b: Vec<Elem> = (0..free).map(|_| sample_uniform(ctx, rng)).collect();
        let f = family_member(d, prefix, &b);
        seen.iter_mut().for_each(|s| *s = false);
        for c in ctx.elements() {
            seen[f.eval(ctx, c).0 as usize] = true;
        }
        let v = seen.iter().filter(|&&s| s).count() as f64;
        sum += v;
        sum_sq += v * v;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq - n * mean * mean) / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

// base-q increment, least significant digit first
fn odometer(digits: &mut [Elem], q: u64) {
    for c in digits {
        c.0 += 1;
        if c.0 < q {
            return;
        }
        c.0 = 0;
    }
}

/// Calls `visit` on every element of `F_{r,d}`.
pub fn for_each_poly<V>(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard, mut visit: V) -> Result<u64>
where
    V: FnMut(&MultiPoly),
{
    let n = dim_f(r, d)?;
    let total = guard.check_pow(ctx.q(), n)?;
    let mut f = MultiPoly::zero(r, d)?;
    for _ in 0..total {
        visit(&f);
        odometer(f.coeffs_mut(), ctx.q());
    }
    Ok(total)
}

// Whether F(a, T) has a root, for every strip, via precomputed weights.
struct StripTable {
    spec: Specializer,
    weights: Vec<crate::poly::StripWeights>,
}

impl StripTable {
    fn new(ctx: &FieldCtx, r: usize, d: usize, strips: &[Strip]) -> Result<Self> {
        let spec = Specializer::new(r, d)?;
        let weights = strips.iter().map(|a| spec.weights(ctx, a)).collect::<std::result::Result<_, _>>()?;
        Ok(StripTable { spec, weights })
    }

    fn all(ctx: &FieldCtx, r: usize, d: usize) -> Result<Self> {
        let n = strip_count(ctx.q(), r).ok_or_else(|| OracleError::Invalid("too many strips".into()))?;
        let strips: Vec<Strip> = (0..n).map(|i| Strip::from_index(i, r - 1, ctx.q())).collect();
        Self::new(ctx, r, d, &strips)
    }

    fn root_count(&self, ctx: &FieldCtx, f: &MultiPoly, i: usize) -> u64 {
        let g = self.spec.apply(ctx, f, &self.weights[i]);
        if g.is_zero() {
            return ctx.q();
        }
        ctx.elements().filter(|&t| g.eval(ctx, t).is_zero()).count() as u64
    }
}

/// `P[F has a zero on a fixed strip]`, averaging over all strips and all of
/// `F_{r,d}`.
pub fn enumerate_prob_c1(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<ExactRational> {
    let table = StripTable::all(ctx, r, d)?;
    let strips = table.weights.len() as u64;
    let mut hits = 0u64;
    let total = for_each_poly(ctx, r, d, guard, |f| {
        hits += (0..strips as usize).filter(|&i| table.root_count(ctx, f, i) > 0).count() as u64;
    })?;
    Ok(rat(hits, total * strips))
}

/// Exact distribution of the index of the first strip with a zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsDistribution {
    /// `by_s[s - 1] = p[C_a = s]`.
    pub by_s: Vec<ExactRational>,
    /// `p[no strip of the sequence has a zero]`.
    pub beyond: ExactRational,
}

pub fn enumerate_prob_cs(
    ctx: &FieldCtx,
    r: usize,
    d: usize,
    strips: &crate::search::StripSequence,
    guard: &EnumGuard,
) -> Result<CsDistribution> {
    let table = StripTable::new(ctx, r, d, strips.strips())?;
    let mut counts = vec![0u64; strips.len() + 1];
    let total = for_each_poly(ctx, r, d, guard, |f| {
        let s = (0..strips.len()).find(|&i| table.root_count(ctx, f, i) > 0).unwrap_or(strips.len());
        counts[s] += 1;
    })?;
    let beyond = rat(counts.pop().expect("nonempty"), total);
    Ok(CsDistribution { by_s: counts.into_iter().map(|c| rat(c, total)).collect(), beyond })
}

/// Rank of a matrix over `F_q` by Gaussian elimination.
pub fn rank(ctx: &FieldCtx, mut rows: Vec<Vec<Elem>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = ctx.inv(rows[rank][c]).expect("pivot is nonzero");
        let pivot: Vec<Elem> = rows[rank].iter().map(|&x| ctx.mul(x, inv)).collect();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let factor = row[c];
            for (x, &p) in row.iter_mut().zip(&pivot).skip(c) {
                *x = ctx.sub(*x, ctx.mul(factor, p));
            }
        }
        rows[rank] = pivot;
        rank += 1;
    }
    rank
}

fn check_strips(strips: &[Strip], r: usize) -> Result<()> {
    if strips.is_empty() || strips.iter().any(|a| a.0.len() + 1 != r) {
        return Err(OracleError::Invalid(format!("need a nonempty list of strips of length {}", r - 1)));
    }
    Ok(())
}

/// Whether every Vandermonde matrix `M_j`, `1 <= j <= kappa_s`, built from
/// the strips has full rank `min(D_j, s)`.
pub fn vandermonde_generic(strips: &[Strip], r: usize, d: usize, ctx: &FieldCtx) -> Result<bool> {
    check_strips(strips, r)?;
    let s = strips.len() as u64;
    if s > d_j(d as i64, r) {
        return Err(OracleError::Invalid(format!("s = {s} exceeds D_d")));
    }
    let k = kappa(s, r).map_err(|e| OracleError::Invalid(e.to_string()))?;
    for j in 1..=k as usize {
        // monomials in the r-1 strip coordinates of degree <= j
        let omega = MonomialBasis::new(r - 1, j)?;
        let rows: Vec<Vec<Elem>> = strips
            .iter()
            .map(|a| omega.iter().map(|w| monomial(ctx, &a.0, w)).collect())
            .collect();
        if rank(ctx, rows) != (omega.len() as u64).min(s) as usize {
            return Ok(false);
        }
    }
    Ok(true)
}

fn monomial(ctx: &FieldCtx, a: &[Elem], w: &[u32]) -> Elem {
    a.iter().zip(w).fold(Elem::ONE, |m, (&x, &e)| ctx.mul(m, ctx.pow(x, e as u64)))
}

/// Rank of the `s(d+1) x D` matrix of `F -> (F(a_1, T), ..., F(a_s, T))`.
pub fn phi_matrix_rank(strips: &[Strip], r: usize, d: usize, ctx: &FieldCtx) -> Result<usize> {
    check_strips(strips, r)?;
    let basis = MonomialBasis::new(r, d)?;
    let mut rows = Vec::with_capacity(strips.len() * (d + 1));
    for a in strips {
        for e in 0..=d as u32 {
            rows.push(
                basis
                    .iter()
                    .map(|m| if m[r - 1] == e { monomial(ctx, &a.0, &m[..r - 1]) } else { Elem::ZERO })
                    .collect(),
            );
        }
    }
    Ok(rank(ctx, rows))
}

/// `P_{x,F} = 1 / (NS(F) N_a(F))` for every zero `x = (a, t)`; empty when
/// `NS(F) = 0`.
pub fn output_probs(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<Vec<(Vec<Elem>, ExactRational)>> {
    let counts = strip_root_counts(f, ctx, guard)?;
    let ns = counts.iter().filter(|&&n| n > 0).count() as u64;
    let mut out = Vec::new();
    for x in zero_set(f, ctx, guard)? {
        let a = Strip(x[..f.r() - 1].to_vec());
        out.push((x, rat(1, ns * counts[a.index(ctx.q()) as usize])));
    }
    Ok(out)
}

fn entropy_from_counts(counts: &[u64]) -> f64 {
    let ns = counts.iter().filter(|&&n| n > 0).count() as f64;
    if ns == 0.0 {
        return 0.0;
    }
    // each of the N_a zeros on strip a has probability 1/(NS N_a)
    counts.iter().filter(|&&n| n > 0).map(|&n| (ns * n as f64).ln()).sum::<f64>() / ns
}

/// Shannon entropy (natural log) of the search's output on `F`.
pub fn exact_entropy(f: &MultiPoly, ctx: &FieldCtx, guard: &EnumGuard) -> Result<f64> {
    Ok(entropy_from_counts(&strip_root_counts(f, ctx, guard)?))
}

/// Mean of [`exact_entropy`] over all of `F_{r,d}`.
pub fn exact_avg_entropy(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<f64> {
    let table = StripTable::all(ctx, r, d)?;
    let mut counts = vec![0u64; table.weights.len()];
    let mut sum = 0.0;
    let total = for_each_poly(ctx, r, d, guard, |f| {
        for (i, c) in counts.iter_mut().enumerate() {
            *c = table.root_count(ctx, f, i);
        }
        sum += entropy_from_counts(&counts);
    })?;
    Ok(sum / total as f64)
}

fn ns_moments(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<(u64, u64, u64)> {
    let table = StripTable::all(ctx, r, d)?;
    let strips = table.weights.len();
    let (mut s1, mut s2) = (0u64, 0u64);
    let total = for_each_poly(ctx, r, d, guard, |f| {
        let ns = (0..strips).filter(|&i| table.root_count(ctx, f, i) > 0).count() as u64;
        s1 += ns;
        s2 += ns * ns;
    })?;
    Ok((total, s1, s2))
}

/// Exact mean of `NS(F)` over `F_{r,d}`.
pub fn mean_ns(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<ExactRational> {
    let (n, s1, _) = ns_moments(ctx, r, d, guard)?;
    Ok(rat(s1, n))
}

/// Exact variance of `NS(F)` over `F_{r,d}`.
pub fn var_ns(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<ExactRational> {
    let (n, s1, s2) = ns_moments(ctx, r, d, guard)?;
    let m = rat(s1, n);
    Ok(rat(s2, n) - &m * &m)
}

/// Exact mean of `N(F)` over `F_{r,d}`.
pub fn mean_n(ctx: &FieldCtx, r: usize, d: usize, guard: &EnumGuard) -> Result<ExactRational> {
    let table = StripTable::all(ctx, r, d)?;
    let strips = table.weights.len();
    let mut zeros = 0u64;
    let total = for_each_poly(ctx, r, d, guard, |f| {
        zeros += (0..strips).map(|i| table.root_count(ctx, f, i)).sum::<u64>();
    })?;
    Ok(rat(zeros, total))
}

/// `sum_x P_{x,F}`; one whenever `F` has a zero.
pub fn total_output_prob(probs: &[(Vec<Elem>, ExactRational)]) -> ExactRational {
    probs.iter().fold(ExactRational::zero(), |acc, (_, p)| acc + p)
}

pub fn is_one(x: &ExactRational) -> bool {
    x.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics;
    use crate::poly::{parse_inline, sample_poly};
    use crate::search::StripSequence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g() -> EnumGuard {
        EnumGuard::default()
    }

    fn s1(v: &[u64]) -> Vec<Strip> {
        v.iter().map(|&a| Strip(vec![Elem(a)])).collect()
    }

    #[test]
    fn zero_set_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        assert_eq!(zero_set(&MultiPoly::zero(2, 2).unwrap(), &f3, &g()).unwrap().len(), 9);
        let f = parse_inline(&f3, 2, 2, "1:1,1 2:0,0").unwrap();
        assert_eq!(
            zero_set(&f, &f3, &g()).unwrap(),
            vec![vec![Elem(1), Elem(1)], vec![Elem(2), Elem(2)]]
        );
        assert_eq!(mean_n(&f3, 2, 2, &g()).unwrap(), rat(3, 1));
        assert!(matches!(
            zero_set(&f, &f3, &EnumGuard::new(8)),
            Err(OracleError::GuardExceeded { .. })
        ));
    }

    #[test]
    fn strip_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let f = parse_inline(&f3, 2, 2, "1:0,2 2:0,1").unwrap();
        assert_eq!(ns_of(&f, &f3, &g()).unwrap(), 3);
        for a in f3.elements() {
            assert_eq!(n_strip(&f, &Strip(vec![a]), &f3).unwrap(), 2);
        }
        let h = parse_inline(&f3, 2, 2, "1:1,1 2:0,0").unwrap();
        assert_eq!(ns_of(&h, &f3, &g()).unwrap(), 2);
        assert_eq!(vs_of(&h, &f3, &g()).unwrap(), s1(&[1, 2]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let f = sample_poly(&f3, 3, 2, &mut rng).unwrap();
            assert_eq!(vs_of(&f, &f3, &g()).unwrap().len() as u64, ns_of(&f, &f3, &g()).unwrap());
        }
    }

    #[test]
    fn value_sets() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(value_set_card(&UniPoly::constant(Elem(3)), &f5, &g()).unwrap(), 1);
        assert_eq!(value_set_card(&UniPoly::t(), &f5, &g()).unwrap(), 5);
        let sq = UniPoly::new(vec![Elem(0), Elem(0), Elem(1)]);
        assert_eq!(value_set_card(&sq, &f5, &g()).unwrap(), 3);
        assert_eq!(avg_value_set(&f5, 2, 1, &[Elem(1)], &g()).unwrap(), rat(3, 1));
        assert_eq!(avg_value_set(&f5, 2, 1, &[Elem(0)], &g()), Err(OracleError::ZeroLeading));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (m, se) = avg_value_set_sampled(&f5, 2, 1, &[Elem(2)], 200, &mut rng).unwrap();
        assert_eq!((m, se), (3.0, 0.0));
    }

    #[test]
    fn prob_c1_matches_closed_form() {
        let f3 = FieldCtx::prime(3).unwrap();
        assert_eq!(enumerate_prob_c1(&f3, 2, 2, &g()).unwrap(), rat(19, 27));
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(
            enumerate_prob_c1(&f5, 2, 2, &g()).unwrap(),
            analytics::prob_c1_exact(5, 2).unwrap()
        );
        let f4 = FieldCtx::new(2, 2, None).unwrap();
        assert_eq!(
            enumerate_prob_c1(&f4, 2, 2, &g()).unwrap(),
            analytics::prob_c1_exact(4, 2).unwrap()
        );
    }

    #[test]
    fn prob_cs_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let seq = StripSequence::new(s1(&[0, 1])).unwrap();
        let dist = enumerate_prob_cs(&f3, 2, 2, &seq, &g()).unwrap();
        assert_eq!(dist.by_s, vec![rat(19, 27), rat(50, 243)]);
        let sum = dist.by_s.iter().fold(dist.beyond.clone(), |a, b| a + b);
        assert!(sum.is_one());
        for a in 0..3 {
            let one = StripSequence::new(s1(&[a])).unwrap();
            assert_eq!(enumerate_prob_cs(&f3, 2, 2, &one, &g()).unwrap().by_s[0], rat(19, 27));
        }
    }

    #[test]
    fn vandermonde_examples() {
        let f5 = FieldCtx::prime(5).unwrap();
        assert!(vandermonde_generic(&s1(&[0, 3, 1, 4]), 2, 4, &f5).unwrap());
        let pts = |v: &[(u64, u64)]| v.iter().map(|&(x, y)| Strip(vec![Elem(x), Elem(y)])).collect::<Vec<_>>();
        assert!(!vandermonde_generic(&pts(&[(0, 0), (1, 0), (2, 0)]), 3, 2, &f5).unwrap());
        assert!(vandermonde_generic(&pts(&[(0, 0), (1, 0), (0, 1)]), 3, 2, &f5).unwrap());
    }

    #[test]
    fn phi_rank_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        assert_eq!(phi_matrix_rank(&s1(&[0, 1]), 2, 2, &f3).unwrap(), 5);
        for d in 1..5 {
            assert_eq!(phi_matrix_rank(&s1(&[2]), 2, d, &f3).unwrap(), d + 1);
        }
        let f11 = FieldCtx::prime(11).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut checked = 0;
        while checked < 50 {
            let s = rng.random_range(1..=10usize);
            let mut sampler = crate::search::StripSampler::new(&f11, 3).unwrap();
            let strips: Vec<Strip> = (0..s).map(|_| sampler.next_strip(&mut rng).unwrap()).collect();
            if !vandermonde_generic(&strips, 3, 4, &f11).unwrap() {
                continue;
            }
            let expect = analytics::dim_im_phi(s as u64, 3, 4).unwrap() as usize;
            assert_eq!(phi_matrix_rank(&strips, 3, 4, &f11).unwrap(), expect);
            checked += 1;
        }
    }

    #[test]
    fn rank_small_matrices() {
        let f5 = FieldCtx::prime(5).unwrap();
        let m = |v: &[&[u64]]| v.iter().map(|r| r.iter().map(|&x| Elem(x)).collect()).collect();
        assert_eq!(rank(&f5, m(&[&[1, 0, 0], &[1, 1, 0], &[1, 2, 0]])), 2);
        assert_eq!(rank(&f5, m(&[&[1, 0, 0], &[1, 1, 0], &[1, 0, 1]])), 3);
        assert_eq!(rank(&f5, m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(rank(&f5, m(&[&[1, 2], &[2, 4], &[3, 1]])), 1);
    }

    #[test]
    fn entropy_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let unique = parse_inline(&f3, 2, 2, "1:2,0 1:0,2").unwrap();
        assert_eq!(n_of(&unique, &f3, &g()).unwrap(), 1);
        assert_eq!(exact_entropy(&unique, &f3, &g()).unwrap(), 0.0);
        let zero = MultiPoly::zero(2, 2).unwrap();
        assert!((exact_entropy(&zero, &f3, &g()).unwrap() - 9f64.ln()).abs() < 1e-12);
        let f = parse_inline(&f3, 2, 2, "1:0,2 2:0,1").unwrap();
        assert!((exact_entropy(&f, &f3, &g()).unwrap() - 6f64.ln()).abs() < 1e-12);
        let probs = output_probs(&f, &f3, &g()).unwrap();
        assert!(probs.iter().all(|(_, p)| *p == rat(1, 6)));
    }

    #[test]
    fn output_probs_sum_to_one() {
        let f3 = FieldCtx::prime(3).unwrap();
        let mut all_bounded = true;
        for_each_poly(&f3, 2, 2, &g(), |f| {
            let probs = output_probs(f, &f3, &g()).unwrap();
            let n = probs.len();
            if n > 0 {
                assert!(is_one(&total_output_prob(&probs)));
                let h = exact_entropy(f, &f3, &g()).unwrap();
                all_bounded &= h <= (n as f64).ln() + 1e-12;
                let uniform = probs.iter().all(|(_, p)| *p == probs[0].1);
                assert_eq!(uniform, (h - (n as f64).ln()).abs() < 1e-12);
            }
        })
        .unwrap();
        assert!(all_bounded);
        let avg = exact_avg_entropy(&f3, 2, 2, &g()).unwrap();
        assert!(avg > 0.0 && avg <= 3f64.ln());
    }

    #[test]
    fn ns_statistics() {
        let f3 = FieldCtx::prime(3).unwrap();
        assert_eq!(mean_ns(&f3, 2, 2, &g()).unwrap(), rat(19, 9));
        assert_eq!(mean_ns(&f3, 2, 2, &g()).unwrap(), analytics::ns_mean(3, 2, 2).unwrap());
        let f5 = FieldCtx::prime(5).unwrap();
        assert_eq!(mean_ns(&f5, 2, 2, &g()).unwrap(), analytics::ns_mean(5, 2, 2).unwrap());
        let v = analytics::to_f64(&var_ns(&f5, 2, 2, &g()).unwrap());
        assert!((v - analytics::ns_variance_leading(5, 2, 2).unwrap()).abs() <= 5.0);
    }
}
