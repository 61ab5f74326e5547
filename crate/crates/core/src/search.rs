//! Search on vertical strips.
//!
//! Strips `{a} x F_q` are visited in a uniformly random order without
//! repetition. On each strip the specialization `F(a, T)` is solved over
//! `F_q`; the first strip with a root (or with `F(a, T) = 0`) yields the
//! output `(a, t)` with `t` uniform among that strip's roots.

use std::collections::{HashMap, HashSet};

use rand::Rng;
use thiserror::Error;

use crate::ff::{Elem, FieldCtx, OpCounts};
use crate::poly::{MultiPoly, PolyError, Specializer, Strip, StripWeights};
use crate::roots::{all_roots, pick, RootError, RootSet};

/// Strip spaces up to this size are shuffled through an index table; larger
/// ones use rejection against the set of strips already drawn.
pub const DENSE_STRIP_LIMIT: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SvsError {
    #[error("strip sequence contains a repeated strip")]
    DuplicateStrips,
    #[error("strip has {got} coordinates, expected {expected}")]
    StripLength { expected: usize, got: usize },
    #[error("all {0} strips have been drawn")]
    Exhausted(u64),
    #[error("strip space q^(r-1) does not fit a machine word")]
    TooManyStrips,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Pairwise distinct strips, all of the same length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StripSequence {
    strips: Vec<Strip>,
}

impl StripSequence {
    pub fn new(strips: Vec<Strip>) -> Result<Self, SvsError> {
        let mut seen = HashSet::with_capacity(strips.len());
        let len = strips.first().map_or(0, |s| s.0.len());
        for s in &strips {
            if s.0.len() != len {
                return Err(SvsError::StripLength { expected: len, got: s.0.len() });
            }
            if !seen.insert(s) {
                return Err(SvsError::DuplicateStrips);
            }
        }
        Ok(StripSequence { strips })
    }

    pub fn strips(&self) -> &[Strip] {
        &self.strips
    }

    pub fn len(&self) -> usize {
        self.strips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strips.is_empty()
    }
}

/// `q^(r-1)`, or `None` if it overflows.
pub fn strip_count(q: u64, r: usize) -> Option<u64> {
    q.checked_pow(u32::try_from(r.checked_sub(1)?).ok()?)
}

#[derive(Debug, Clone)]
enum Pool {
    // lazily initialized Fisher-Yates table of strip indices
    Dense(Vec<u64>),
    Sparse(HashSet<u64>),
}

/// Draws strips of `F_q^{r-1}` uniformly without replacement.
#[derive(Debug, Clone)]
pub struct StripSampler {
    q: u64,
    dim: usize,
    total: u64,
    drawn: u64,
    pool: Pool,
}

impl StripSampler {
    pub fn new(ctx: &FieldCtx, r: usize) -> Result<Self, SvsError> {
        let total = strip_count(ctx.q(), r).ok_or(SvsError::TooManyStrips)?;
        let pool = if total <= DENSE_STRIP_LIMIT {
            Pool::Dense(Vec::new())
        } else {
            Pool::Sparse(HashSet::new())
        };
        Ok(StripSampler { q: ctx.q(), dim: r - 1, total, drawn: 0, pool })
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn remaining(&self) -> u64 {
        self.total - self.drawn
    }

    /// Index (base-`q` encoding, see [`Strip::from_index`]) of the next strip.
    pub fn next_index<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<u64, SvsError> {
        if self.drawn == self.total {
            return Err(SvsError::Exhausted(self.total));
        }
        let idx = match &mut self.pool {
            Pool::Dense(table) => {
                if table.is_empty() {
                    table.extend(0..self.total);
                }
                let i = self.drawn as usize;
                let j = rng.random_range(i..table.len());
                table.swap(i, j);
                table[i]
            }
            Pool::Sparse(used) => loop {
                let c = rng.random_range(0..self.total);
                if used.insert(c) {
                    break c;
                }
            },
        };
        self.drawn += 1;
        Ok(idx)
    }

    pub fn next_strip<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Strip, SvsError> {
        Ok(Strip::from_index(self.next_index(rng)?, self.dim, self.q))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Found { zero: Vec<Elem>, searches: usize },
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub strip: Strip,
    /// Number of roots of `F(a, T)`; `q` when it vanishes identically.
    pub roots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SvsResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceEntry>,
    /// Field operations spent, when the context counts them.
    pub ops_used: Option<OpCounts>,
}

impl SvsResult {
    pub fn searches(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Found { searches, .. } => Some(searches),
            Outcome::Failure => None,
        }
    }

    pub fn zero(&self) -> Option<&[Elem]> {
        match &self.outcome {
            Outcome::Found { zero, .. } => Some(zero),
            Outcome::Failure => None,
        }
    }
}

/// Reusable solver for one `(ctx, r, d)`.
#[derive(Debug, Clone)]
pub struct Svs {
    ctx: FieldCtx,
    spec: Specializer,
    record_trace: bool,
}

impl Svs {
    pub fn new(ctx: &FieldCtx, r: usize, d: usize) -> Result<Self, SvsError> {
        Ok(Svs { ctx: ctx.clone(), spec: Specializer::new(r, d)?, record_trace: true })
    }

    pub fn record_trace(mut self, on: bool) -> Self {
        self.record_trace = on;
        self
    }

    pub fn ctx(&self) -> &FieldCtx {
        &self.ctx
    }

    pub fn specializer(&self) -> &Specializer {
        &self.spec
    }

    fn check(&self, f: &MultiPoly) -> Result<(), SvsError> {
        let b = self.spec.basis();
        if f.r() != b.r() || f.d() != b.d() {
            return Err(PolyError::DimensionMismatch { expected: b.len(), got: f.coeffs().len() }
                .into());
        }
        Ok(())
    }

    /// Roots of `F(a, T)` for a strip given by its precomputed weights.
    pub fn search_strip(&self, f: &MultiPoly, w: &StripWeights) -> Result<RootSet, SvsError> {
        let g = self.spec.apply(&self.ctx, f, w);
        Ok(all_roots(&g, &self.ctx)?)
    }

    /// Runs the search over strips produced by `next`, stopping after `cap`
    /// strips or when `next` returns `None`.
    pub fn run_from<R, N>(
        &self,
        f: &MultiPoly,
        rng: &mut R,
        cap: u64,
        mut next: N,
    ) -> Result<SvsResult, SvsError>
    where
        R: Rng + ?Sized,
        N: FnMut(&mut R) -> Option<Result<Strip, SvsError>>,
    {
        self.check(f)?;
        let before = self.ctx.op_counts();
        let mut trace = Vec::new();
        let mut searches = 0usize;
        let mut outcome = Outcome::Failure;
        while (searches as u64) < cap {
            let Some(strip) = next(rng) else { break };
            let strip = strip?;
            let w = self.spec.weights(&self.ctx, &strip)?;
            let set = self.search_strip(f, &w)?;
            searches += 1;
            if self.record_trace {
                trace.push(TraceEntry { strip: strip.clone(), roots: set.count(self.ctx.q()) });
            }
            if let Some(t) = pick(&set, &self.ctx, rng) {
                outcome = Outcome::Found { zero: strip.point(t), searches };
                break;
            }
        }
        let ops_used = match (before, self.ctx.op_counts()) {
            (Some(b), Some(a)) => Some(OpCounts {
                adds: a.adds - b.adds,
                muls: a.muls - b.muls,
                invs: a.invs - b.invs,
            }),
            _ => None,
        };
        let result = SvsResult { outcome, trace, ops_used };
        #[cfg(debug_assertions)]
        if let Some(x) = result.zero() {
            debug_assert!(crate::poly::eval(&self.ctx, f, x)?.is_zero());
        }
        Ok(result)
    }

    /// Random strip order; at most `max_strips` strips (all by default).
    pub fn run<R: Rng + ?Sized>(
        &self,
        f: &MultiPoly,
        rng: &mut R,
        max_strips: Option<u64>,
    ) -> Result<SvsResult, SvsError> {
        let mut sampler = StripSampler::new(&self.ctx, self.spec.basis().r())?;
        let cap = max_strips.unwrap_or(u64::MAX).min(sampler.total());
        self.run_from(f, rng, cap, |rng| Some(sampler.next_strip(rng)))
    }

    /// Fixed strip order.
    pub fn run_with_strips<R: Rng + ?Sized>(
        &self,
        f: &MultiPoly,
        strips: &StripSequence,
        rng: &mut R,
    ) -> Result<SvsResult, SvsError> {
        let dim = self.spec.basis().r() - 1;
        let mut it = strips.strips().iter();
        self.run_from(f, rng, u64::MAX, |_| {
            it.next().map(|s| {
                if s.0.len() == dim && s.0.iter().all(|c| c.0 < self.ctx.q()) {
                    Ok(s.clone())
                } else {
                    Err(SvsError::StripLength { expected: dim, got: s.0.len() })
                }
            })
        })
    }
}

/// One run of the search with a random strip order.
pub fn svs_run<R: Rng + ?Sized>(
    f: &MultiPoly,
    ctx: &FieldCtx,
    rng: &mut R,
    max_strips: Option<u64>,
) -> Result<SvsResult, SvsError> {
    Svs::new(ctx, f.r(), f.d())?.run(f, rng, max_strips)
}

/// One run of the search with the strip order fixed by `strips`.
pub fn svs_run_with_strips<R: Rng + ?Sized>(
    f: &MultiPoly,
    strips: &StripSequence,
    ctx: &FieldCtx,
    rng: &mut R,
) -> Result<SvsResult, SvsError> {
    Svs::new(ctx, f.r(), f.d())?.run_with_strips(f, strips, rng)
}

/// Frequencies of the points returned by `trials` independent runs.
pub fn output_counts<R: Rng + ?Sized>(
    f: &MultiPoly,
    ctx: &FieldCtx,
    trials: u64,
    rng: &mut R,
) -> Result<HashMap<Vec<Elem>, u64>, SvsError> {
    let svs = Svs::new(ctx, f.r(), f.d())?.record_trace(false);
    let mut counts = HashMap::new();
    for _ in 0..trials {
        if let Outcome::Found { zero, .. } = svs.run(f, rng, None)?.outcome {
            *counts.entry(zero).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::sample_poly;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn strips(v: &[u64]) -> StripSequence {
        StripSequence::new(v.iter().map(|&a| Strip(vec![Elem(a)])).collect()).unwrap()
    }

    fn x1x2_minus_1(ctx: &FieldCtx) -> MultiPoly {
        crate::poly::parse_inline(ctx, 2, 2, "1:1,1 2:0,0").unwrap()
    }

    #[test]
    fn sampler_is_a_uniform_permutation() {
        let f3 = FieldCtx::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 6000;
        let mut counts = HashMap::new();
        for _ in 0..n {
            let mut s = StripSampler::new(&f3, 2).unwrap();
            let perm: Vec<u64> = (0..3).map(|_| s.next_index(&mut rng).unwrap()).collect();
            assert_eq!(s.next_index(&mut rng), Err(SvsError::Exhausted(3)));
            *counts.entry(perm).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / n as f64 - p).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn sampler_draws_distinct_strips() {
        let f67 = FieldCtx::prime(67).unwrap();
        let mut s = StripSampler::new(&f67, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let drawn: HashSet<Strip> = (0..100).map(|_| s.next_strip(&mut rng).unwrap()).collect();
        assert_eq!(drawn.len(), 100);
        assert!(drawn.iter().all(|a| a.0.len() == 2));

        // rejection path
        let big = FieldCtx::prime(1_000_003).unwrap();
        let mut s = StripSampler::new(&big, 3).unwrap();
        assert!(matches!(s.pool, Pool::Sparse(_)));
        let drawn: HashSet<u64> = (0..1000).map(|_| s.next_index(&mut rng).unwrap()).collect();
        assert_eq!(drawn.len(), 1000);

        let seq = |seed| {
            let mut s = StripSampler::new(&f67, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20).map(|_| s.next_index(&mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(seq(7), seq(7));
    }

    #[test]
    fn fixed_strip_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let f = x1x2_minus_1(&f3);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = svs_run_with_strips(&f, &strips(&[0, 1, 2]), &f3, &mut rng).unwrap();
        assert_eq!(res.outcome, Outcome::Found { zero: vec![Elem(1), Elem(1)], searches: 2 });
        assert_eq!(res.trace.len(), 2);
        assert_eq!(res.trace[0].roots, 0);
        assert_eq!(res.trace[1].roots, 1);

        let res = svs_run_with_strips(&f, &strips(&[0, 1]), &f3, &mut rng).unwrap();
        assert_eq!(res.searches(), Some(2));
        let res = svs_run_with_strips(&f, &strips(&[1]), &f3, &mut rng).unwrap();
        assert_eq!(res.searches(), Some(1));

        // X_1 - 1 vanishes on the strip a = 1
        let g = crate::poly::parse_inline(&f3, 2, 2, "1:1,0 2:0,0").unwrap();
        let mut seen = HashSet::new();
        for _ in 0..100 {
            let res = svs_run_with_strips(&g, &strips(&[1, 0]), &f3, &mut rng).unwrap();
            assert_eq!(res.searches(), Some(1));
            assert_eq!(res.trace[0].roots, 3);
            let z = res.zero().unwrap();
            assert_eq!(z[0], Elem(1));
            seen.insert(z[1]);
        }
        assert_eq!(seen.len(), 3);

        assert_eq!(
            StripSequence::new(vec![Strip(vec![Elem(1)]), Strip(vec![Elem(1)])]),
            Err(SvsError::DuplicateStrips)
        );
    }

    #[test]
    fn random_order_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = x1x2_minus_1(&f3);
        for _ in 0..50 {
            let res = svs_run(&f, &f3, &mut rng, None).unwrap();
            let z = res.zero().unwrap();
            assert!(z == [Elem(1), Elem(1)] || z == [Elem(2), Elem(2)]);
        }
        let one = crate::poly::parse_inline(&f3, 2, 2, "1:0,0").unwrap();
        let res = svs_run(&one, &f3, &mut rng, None).unwrap();
        assert_eq!(res.outcome, Outcome::Failure);
        assert_eq!(res.trace.len(), 3);
        let capped = svs_run(&one, &f3, &mut rng, Some(2)).unwrap();
        assert_eq!(capped.trace.len(), 2);

        let zero = MultiPoly::zero(3, 2).unwrap();
        let res = svs_run(&zero, &f3, &mut rng, None).unwrap();
        assert_eq!(res.searches(), Some(1));
        assert_eq!(res.trace[0].strip.0, res.zero().unwrap()[..2]);
    }

    #[test]
    fn soundness_minimality_exhaustiveness() {
        let f5 = FieldCtx::prime(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let svs = Svs::new(&f5, 2, 2).unwrap();
        for _ in 0..500 {
            let f = sample_poly(&f5, 2, 2, &mut rng).unwrap();
            let res = svs.run(&f, &mut rng, None).unwrap();
            // independent check of each visited strip by direct evaluation
            let has_root = |a: &Strip| {
                f5.elements().any(|t| crate::poly::eval(&f5, &f, &a.point(t)).unwrap().is_zero())
            };
            match &res.outcome {
                Outcome::Found { zero, searches } => {
                    assert!(crate::poly::eval(&f5, &f, zero).unwrap().is_zero());
                    assert_eq!(res.trace.len(), *searches);
                    for e in &res.trace[..searches - 1] {
                        assert!(!has_root(&e.strip));
                    }
                }
                Outcome::Failure => {
                    assert_eq!(res.trace.len(), 5);
                    assert!(f5.elements().all(|a| !has_root(&Strip(vec![a]))));
                }
            }
        }
    }

    #[test]
    fn op_counts_are_reported() {
        let ctx = FieldCtx::prime(7).unwrap().counting();
        let f = crate::poly::parse_inline(&ctx, 2, 2, "1:1,1 6:0,0").unwrap();
        let res = svs_run(&f, &ctx, &mut ChaCha8Rng::seed_from_u64(1), None).unwrap();
        assert!(res.ops_used.unwrap().muls > 0);
        let plain = FieldCtx::prime(7).unwrap();
        let res = svs_run(&f, &plain, &mut ChaCha8Rng::seed_from_u64(1), None).unwrap();
        assert_eq!(res.ops_used, None);
    }
}
