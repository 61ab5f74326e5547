//! Dense univariate polynomials over `F_q`.

use crate::ff::{Elem, FieldCtx};

use super::PolyError;

/// Coefficients low-to-high with no trailing zeros; the zero polynomial is
/// the empty vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<Elem>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        UniPoly::constant(Elem::ONE)
    }

    pub fn constant(c: Elem) -> Self {
        UniPoly::new(vec![c])
    }

    /// The monomial `T`.
    pub fn t() -> Self {
        UniPoly::new(vec![Elem::ZERO, Elem::ONE])
    }

    pub fn new(mut coeffs: Vec<Elem>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(ctx: &FieldCtx, roots: &[Elem]) -> Self {
        roots.iter().fold(UniPoly::one(), |acc, &r| {
            uni_mul(ctx, &acc, &UniPoly::new(vec![ctx.neg(r), Elem::ONE]))
        })
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn deg(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [Elem::ONE]
    }

    pub fn leading(&self) -> Option<Elem> {
        self.coeffs.last().copied()
    }

    pub fn coeff(&self, i: usize) -> Elem {
        self.coeffs.get(i).copied().unwrap_or(Elem::ZERO)
    }

    pub fn monic(&self, ctx: &FieldCtx) -> Self {
        match self.leading() {
            None => UniPoly::zero(),
            Some(lc) if lc == Elem::ONE => self.clone(),
            Some(lc) => {
                let inv = ctx.inv(lc).expect("leading coefficient is nonzero");
                UniPoly::new(self.coeffs.iter().map(|&c| ctx.mul(c, inv)).collect())
            }
        }
    }

    pub fn eval(&self, ctx: &FieldCtx, t: Elem) -> Elem {
        uni_eval(ctx, self, t)
    }
}

/// Horner evaluation.
#[inline]
pub fn uni_eval(ctx: &FieldCtx, f: &UniPoly, t: Elem) -> Elem {
    f.coeffs
        .iter()
        .rev()
        .fold(Elem::ZERO, |acc, &c| ctx.add(ctx.mul(acc, t), c))
}

pub fn uni_add(ctx: &FieldCtx, f: &UniPoly, g: &UniPoly) -> UniPoly {
    let n = f.coeffs.len().max(g.coeffs.len());
    UniPoly::new((0..n).map(|i| ctx.add(f.coeff(i), g.coeff(i))).collect())
}

pub fn uni_sub(ctx: &FieldCtx, f: &UniPoly, g: &UniPoly) -> UniPoly {
    let n = f.coeffs.len().max(g.coeffs.len());
    UniPoly::new((0..n).map(|i| ctx.sub(f.coeff(i), g.coeff(i))).collect())
}

pub fn uni_mul(ctx: &FieldCtx, f: &UniPoly, g: &UniPoly) -> UniPoly {
    if f.is_zero() || g.is_zero() {
        return UniPoly::zero();
    }
    let mut out = vec![Elem::ZERO; f.coeffs.len() + g.coeffs.len() - 1];
    for (i, &a) in f.coeffs.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, &b) in g.coeffs.iter().enumerate() {
            out[i + j] = ctx.add(out[i + j], ctx.mul(a, b));
        }
    }
    UniPoly::new(out)
}

/// Quotient and remainder of `f` by nonzero `m`.
pub fn uni_divrem(
    ctx: &FieldCtx,
    f: &UniPoly,
    m: &UniPoly,
) -> Result<(UniPoly, UniPoly), PolyError> {
    let dm = m.deg().ok_or(PolyError::ZeroModulus)?;
    let lead_inv = ctx.inv(m.coeffs[dm]).expect("leading coefficient is nonzero");
    let mut rem = f.coeffs.clone();
    if rem.len() <= dm {
        return Ok((UniPoly::zero(), UniPoly::new(rem)));
    }
    let mut quot = vec![Elem::ZERO; rem.len() - dm];
    for top in (dm..rem.len()).rev() {
        let c = ctx.mul(rem[top], lead_inv);
        if c.is_zero() {
            continue;
        }
        let shift = top - dm;
        quot[shift] = c;
        for (i, &mc) in m.coeffs.iter().enumerate() {
            rem[shift + i] = ctx.sub(rem[shift + i], ctx.mul(c, mc));
        }
    }
    rem.truncate(dm);
    Ok((UniPoly::new(quot), UniPoly::new(rem)))
}

pub fn uni_rem(ctx: &FieldCtx, f: &UniPoly, m: &UniPoly) -> Result<UniPoly, PolyError> {
    uni_divrem(ctx, f, m).map(|(_, r)| r)
}

/// Monic gcd; `gcd(0, g) = monic(g)` and `gcd(0, 0) = 0`.
pub fn uni_gcd(ctx: &FieldCtx, f: &UniPoly, g: &UniPoly) -> UniPoly {
    let mut a = f.clone();
    let mut b = g.clone();
    while !b.is_zero() {
        let r = uni_rem(ctx, &a, &b).expect("b is nonzero");
        a = b;
        b = r;
    }
    a.monic(ctx)
}

pub fn uni_mulmod(
    ctx: &FieldCtx,
    f: &UniPoly,
    g: &UniPoly,
    m: &UniPoly,
) -> Result<UniPoly, PolyError> {
    uni_rem(ctx, &uni_mul(ctx, f, g), m)
}

/// `base^e mod m` by square-and-multiply.
pub fn uni_powmod(
    ctx: &FieldCtx,
    base: &UniPoly,
    mut e: u64,
    m: &UniPoly,
) -> Result<UniPoly, PolyError> {
    let mut b = uni_rem(ctx, base, m)?;
    let mut acc = uni_rem(ctx, &UniPoly::one(), m)?;
    while e > 0 {
        if e & 1 == 1 {
            acc = uni_mulmod(ctx, &acc, &b, m)?;
        }
        e >>= 1;
        if e > 0 {
            b = uni_mulmod(ctx, &b, &b, m)?;
        }
    }
    Ok(acc)
}
