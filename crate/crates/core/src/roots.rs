//! `F_q`-rational roots of univariate polynomials.
//!
//! Small fields are scanned point by point. Larger fields go through
//! `gcd(f, T^q - T)` followed by equal-degree splitting into linear factors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ff::{sample_uniform, Elem, FieldCtx};
use crate::poly::{uni_add, uni_eval, uni_gcd, uni_mulmod, uni_powmod, uni_rem, uni_sub, UniPoly};

/// Fields up to this size are scanned directly.
pub const SCAN_LIMIT: u64 = 4096;

const SPLIT_SEED: u64 = 0x05ee_d0f5_b117;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("equal-degree splitting made no progress on a degree {0} factor")]
    SplitExhausted(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RootSet {
    /// Distinct roots, sorted by index. Empty when `full_line` is set.
    pub roots: Vec<Elem>,
    /// The input was the zero polynomial: every element is a root.
    pub full_line: bool,
}

impl RootSet {
    pub fn count(&self, q: u64) -> u64 {
        if self.full_line {
            q
        } else {
            self.roots.len() as u64
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.full_line && self.roots.is_empty()
    }

    pub fn contains(&self, t: Elem) -> bool {
        self.full_line || self.roots.binary_search(&t).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Scan for `q <= SCAN_LIMIT`, split otherwise.
    #[default]
    Auto,
    Scan,
    Split,
}

/// Monic `gcd(f, T^q - T)`; zero iff `f` is zero.
pub fn frobenius_gcd(f: &UniPoly, ctx: &FieldCtx) -> UniPoly {
    match f.deg() {
        None => UniPoly::zero(),
        Some(0) => UniPoly::one(),
        Some(1) => f.monic(ctx),
        Some(_) => {
            let tq = uni_powmod(ctx, &UniPoly::t(), ctx.q(), f).expect("f is nonzero");
            uni_gcd(ctx, f, &uni_sub(ctx, &tq, &UniPoly::t()))
        }
    }
}

/// Every root of `f` in `F_q`.
pub fn all_roots(f: &UniPoly, ctx: &FieldCtx) -> Result<RootSet, RootError> {
    all_roots_with(f, ctx, Strategy::Auto, &mut ChaCha8Rng::seed_from_u64(SPLIT_SEED))
}

/// [`all_roots`] with an explicit strategy and splitting randomness.
pub fn all_roots_with<R: Rng + ?Sized>(
    f: &UniPoly,
    ctx: &FieldCtx,
    strategy: Strategy,
    rng: &mut R,
) -> Result<RootSet, RootError> {
    if f.is_zero() {
        return Ok(RootSet { roots: Vec::new(), full_line: true });
    }
    let scan = match strategy {
        Strategy::Auto => ctx.q() <= SCAN_LIMIT,
        Strategy::Scan => true,
        Strategy::Split => false,
    };
    let mut roots = Vec::new();
    if scan {
        scan_roots(f, ctx, &mut roots);
    } else {
        let g = frobenius_gcd(f, ctx);
        split_linear(&g, ctx, rng, &mut roots)?;
        roots.sort_unstable();
    }
    Ok(RootSet { roots, full_line: false })
}

/// Appends the roots of nonzero `f` to `out` in increasing order.
pub fn scan_roots(f: &UniPoly, ctx: &FieldCtx, out: &mut Vec<Elem>) {
    match f.deg() {
        None | Some(0) => {}
        Some(1) => {
            let c = f.coeffs();
            let t = ctx.neg(ctx.div(c[0], c[1]).expect("leading coefficient is nonzero"));
            out.push(t);
        }
        Some(_) => out.extend(ctx.elements().filter(|&t| uni_eval(ctx, f, t).is_zero())),
    }
}

// `g` is monic and squarefree with all roots in F_q.
fn split_linear<R: Rng + ?Sized>(
    g: &UniPoly,
    ctx: &FieldCtx,
    rng: &mut R,
    out: &mut Vec<Elem>,
) -> Result<(), RootError> {
    let n = match g.deg() {
        None | Some(0) => return Ok(()),
        Some(1) => {
            out.push(ctx.neg(g.coeffs()[0]));
            return Ok(());
        }
        Some(n) => n,
    };
    for _ in 0..64 * n {
        let h = uni_gcd(ctx, g, &splitter(g, ctx, rng));
        let dh = h.deg().unwrap_or(0);
        if dh == 0 || dh == n {
            continue;
        }
        let (rest, rem) = crate::poly::uni_divrem(ctx, g, &h).expect("h is nonzero");
        debug_assert!(rem.is_zero());
        split_linear(&h, ctx, rng, out)?;
        return split_linear(&rest.monic(ctx), ctx, rng, out);
    }
    Err(RootError::SplitExhausted(n))
}

// A random polynomial whose gcd with `g` is a proper factor with
// probability about 1/2.
fn splitter<R: Rng + ?Sized>(g: &UniPoly, ctx: &FieldCtx, rng: &mut R) -> UniPoly {
    if ctx.p() == 2 {
        // Tr(cT) = sum_{i<k} (cT)^{2^i}
        let mut c = sample_uniform(ctx, rng);
        while c.is_zero() {
            c = sample_uniform(ctx, rng);
        }
        let mut term = uni_rem(ctx, &UniPoly::new(vec![Elem::ZERO, c]), g).expect("g nonzero");
        let mut acc = term.clone();
        for _ in 1..ctx.k() {
            term = uni_mulmod(ctx, &term, &term, g).expect("g nonzero");
            acc = uni_add(ctx, &acc, &term);
        }
        acc
    } else {
        let delta = sample_uniform(ctx, rng);
        let shifted = UniPoly::new(vec![delta, Elem::ONE]);
        let pw = uni_powmod(ctx, &shifted, (ctx.q() - 1) / 2, g).expect("g nonzero");
        uni_sub(ctx, &pw, &UniPoly::one())
    }
}

/// A uniformly chosen root, or `None` when `f` is nonzero without roots.
/// The zero polynomial yields a uniform element of `F_q`.
pub fn sample_root<R: Rng + ?Sized>(
    f: &UniPoly,
    ctx: &FieldCtx,
    rng: &mut R,
) -> Result<Option<Elem>, RootError> {
    let set = all_roots(f, ctx)?;
    Ok(pick(&set, ctx, rng))
}

pub(crate) fn pick<R: Rng + ?Sized>(set: &RootSet, ctx: &FieldCtx, rng: &mut R) -> Option<Elem> {
    if set.full_line {
        Some(sample_uniform(ctx, rng))
    } else if set.roots.is_empty() {
        None
    } else {
        Some(set.roots[rng.random_range(0..set.roots.len())])
    }
}
