//! Text serialization.
//!
//! File format: a header line `POLY q p k r d` followed by one line per
//! nonzero term, `coeff e_1 ... e_r`, with coefficients as element indices.
//! Blank lines and lines starting with `#` are ignored.
//!
//! Inline format: whitespace-separated `coeff:e_1,...,e_r` terms, e.g.
//! `"1:1,1 2:0,0"` for `X_1 X_2 - 1` over `F_3`.

use std::fmt::Write as _;

use crate::ff::{Elem, FieldCtx};

use super::{MultiPoly, PolyError};

pub fn write_poly(ctx: &FieldCtx, f: &MultiPoly) -> String {
    let mut out = format!("POLY {} {} {} {} {}\n", ctx.q(), ctx.p(), ctx.k(), f.r(), f.d());
    for (c, exps) in f.terms() {
        let _ = write!(out, "{}", c.0);
        for e in exps {
            let _ = write!(out, " {e}");
        }
        out.push('\n');
    }
    out
}

fn parse_num<T: std::str::FromStr>(tok: &str) -> Result<T, PolyError> {
    tok.parse().map_err(|_| PolyError::Parse(format!("bad integer {tok:?}")))
}

fn coeff(ctx: &FieldCtx, idx: u64) -> Result<Elem, PolyError> {
    if idx >= ctx.q() {
        return Err(PolyError::Parse(format!("coefficient {idx} not in [0, {})", ctx.q())));
    }
    Ok(Elem(idx))
}

/// Reads the file format. The header must agree with `ctx` on `q, p, k`.
pub fn parse_poly(ctx: &FieldCtx, text: &str) -> Result<MultiPoly, PolyError> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| PolyError::Parse("empty input".into()))?
        .split_whitespace()
        .collect();
    if header.len() != 6 || header[0] != "POLY" {
        return Err(PolyError::Parse("expected header `POLY q p k r d`".into()));
    }
    let (q, p, k): (u64, u64, u32) =
        (parse_num(header[1])?, parse_num(header[2])?, parse_num(header[3])?);
    if (q, p, k) != (ctx.q(), ctx.p(), ctx.k()) {
        return Err(PolyError::Parse(format!(
            "header field ({q}, {p}, {k}) does not match F_{}",
            ctx.q()
        )));
    }
    let r: usize = parse_num(header[4])?;
    let d: usize = parse_num(header[5])?;
    let mut terms = Vec::new();
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != r + 1 {
            return Err(PolyError::Parse(format!("term line {line:?} needs {} fields", r + 1)));
        }
        let c = coeff(ctx, parse_num(toks[0])?)?;
        let exps = toks[1..].iter().map(|t| parse_num(t)).collect::<Result<Vec<u32>, _>>()?;
        terms.push((c, exps));
    }
    MultiPoly::from_terms(r, d, terms.iter().map(|(c, e)| (*c, e.as_slice())))
}

/// Reads the inline format into `F_{r,d}`.
pub fn parse_inline(ctx: &FieldCtx, r: usize, d: usize, text: &str) -> Result<MultiPoly, PolyError> {
    let mut terms = Vec::new();
    for tok in text.split_whitespace() {
        let (c, e) = tok
            .split_once(':')
            .ok_or_else(|| PolyError::Parse(format!("term {tok:?} is not coeff:exponents")))?;
        let exps = e.split(',').map(parse_num).collect::<Result<Vec<u32>, _>>()?;
        terms.push((coeff(ctx, parse_num(c)?)?, exps));
    }
    MultiPoly::from_terms(r, d, terms.iter().map(|(c, e)| (*c, e.as_slice())))
}
