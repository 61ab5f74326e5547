//! Closed-form predictions for the search.
//!
//! Identities are evaluated in exact rationals; asymptotic bounds are plain
//! floats (in log space where the terms would overflow).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::ff::prime_power;
use crate::poly::{binomial, binomial_big};

/// Arbitrary-precision rational.
pub type ExactRational = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("argument out of range: {0}")]
    Range(String),
}

type Result<T> = std::result::Result<T, AnalyticsError>;

/// The two value-set estimates the distribution bounds are derived from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Valid for every characteristic, `s` up to `C(d/2 + r - 1, r - 1)`.
    Cmpp,
    /// Odd characteristic, `s` up to `C(d + r - 3, r - 1)`.
    Mpp,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Cmpp => "cmpp",
            Variant::Mpp => "mpp",
        })
    }
}

impl std::str::FromStr for Variant {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmpp" => Ok(Variant::Cmpp),
            "mpp" => Ok(Variant::Mpp),
            _ => Err(AnalyticsError::Range(format!("unknown variant {s:?}"))),
        }
    }
}

/// A main term with an error radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub center: f64,
    pub radius: f64,
    pub variant: Variant,
}

impl BoundReport {
    pub fn contains(&self, x: f64) -> bool {
        (x - self.center).abs() <= self.radius
    }
}

pub fn to_f64(x: &ExactRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn int(n: impl Into<BigInt>) -> ExactRational {
    ExactRational::from_integer(n.into())
}

fn big(n: BigUint) -> ExactRational {
    int(BigInt::from(n))
}

/// `q^e` for any integer `e`.
fn qpow(q: u64, e: i64) -> ExactRational {
    let p = int(BigInt::from(q).pow(e.unsigned_abs() as u32));
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

fn require_q_gt_d(q: u64, d: usize) -> Result<()> {
    if q <= d as u64 {
        return Err(AnalyticsError::Hypothesis(format!("q = {q} must exceed d = {d}")));
    }
    Ok(())
}

/// `mu_d = sum_{j=1}^d (-1)^{j-1} / j!`.
pub fn mu(d: usize) -> ExactRational {
    let mut acc = ExactRational::zero();
    let mut fact = BigUint::one();
    for j in 1..=d as u64 {
        fact *= j;
        let term = big(fact.clone()).recip();
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Float `mu_d`, usable for any `d`.
pub fn mu_f64(d: usize) -> f64 {
    let mut acc = 0.0;
    let mut term = 1.0;
    for j in 1..=d {
        term /= j as f64;
        if term == 0.0 {
            break;
        }
        acc += if j % 2 == 1 { term } else { -term };
    }
    acc
}

/// Geometric prediction `(1 - mu_d)^{s-1} mu_d`.
pub fn p_hat(s: usize, d: usize) -> Result<ExactRational> {
    if s == 0 {
        return Err(AnalyticsError::Range("s must be at least 1".into()));
    }
    let m = mu(d);
    Ok(num_traits::pow(ExactRational::one() - &m, s - 1) * m)
}

/// Probability that a uniform element of `F_{r,d}` has a zero on a fixed
/// strip. Independent of `r`.
pub fn prob_c1_exact(q: u64, d: usize) -> Result<ExactRational> {
    require_q_gt_d(q, d)?;
    let mut acc = ExactRational::zero();
    for j in 1..=d as u64 {
        let term = big(binomial_big(q, j)) * qpow(q, -(j as i64));
        if j % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let last = big(binomial_big(q - 1, d as u64)) * qpow(q, -(d as i64) - 1);
    if d.is_multiple_of(2) {
        acc += last;
    } else {
        acc -= last;
    }
    Ok(acc)
}

/// Probability that a uniform element of `F_{r,d}` has zeros on both of two
/// fixed distinct strips.
pub fn two_strip_joint(q: u64, d: usize) -> Result<ExactRational> {
    let p1 = prob_c1_exact(q, d)?;
    let c = big(binomial_big(q - 1, d as u64));
    Ok(&p1 * &p1 + int(q - 1) * qpow(q, -2 * d as i64 - 2) * &c * &c)
}

/// Probability that the second of two fixed strips is the first one with a
/// zero.
pub fn p_exact_c2(q: u64, d: usize) -> Result<ExactRational> {
    Ok(prob_c1_exact(q, d)? - two_strip_joint(q, d)?)
}

/// `D_j = C(j + r - 1, r - 1)`, with `D_{-1} = 0`.
pub fn d_j(j: i64, r: usize) -> u64 {
    if j < 0 {
        return 0;
    }
    binomial(j as u64 + r as u64 - 1, r as u64 - 1).expect("D_j fits a machine word")
}

/// The unique `k` with `D_{k-1} < i <= D_k`.
pub fn kappa(i: u64, r: usize) -> Result<u64> {
    if i == 0 || r == 0 {
        return Err(AnalyticsError::Range("kappa needs i >= 1 and r >= 1".into()));
    }
    if r == 1 {
        // D_j = 1 for all j >= 0
        return if i == 1 { Ok(0) } else { Err(AnalyticsError::Range("i > 1 with r = 1".into())) };
    }
    let mut k = 0i64;
    while d_j(k, r) < i {
        k += 1;
    }
    Ok(k as u64)
}

/// Largest `s` covered by the distribution bound of the given variant.
pub fn s_star(r: usize, d: usize, variant: Variant) -> u64 {
    let r = r as u64;
    match variant {
        Variant::Cmpp => binomial(d as u64 / 2 + r - 1, r - 1).unwrap_or(u64::MAX),
        Variant::Mpp => {
            if d + (r as usize) < 3 {
                0
            } else {
                binomial(d as u64 + r - 3, r - 1).unwrap_or(u64::MAX)
            }
        }
    }
}

/// `sum_{i=1}^s (d + 1 - kappa_i)`.
pub fn dim_im_phi_sum(s: u64, r: usize, d: usize) -> Result<u64> {
    let mut acc = 0u64;
    for i in 1..=s {
        let k = kappa(i, r)?;
        acc += (d as u64 + 1).saturating_sub(k);
    }
    Ok(acc)
}

/// Dimension of the image of `F -> (F(a_1, T), ..., F(a_s, T))` for generic
/// strips: `C(kappa_s - 1 + r, r) + s (d - kappa_s + 1)`.
pub fn dim_im_phi(s: u64, r: usize, d: usize) -> Result<u64> {
    if s == 0 {
        return Err(AnalyticsError::Range("s must be at least 1".into()));
    }
    if s > d_j(d as i64, r) {
        return Err(AnalyticsError::Hypothesis(format!("s = {s} exceeds D_d = {}", d_j(d as i64, r))));
    }
    let k = kappa(s, r)?;
    let head = if k == 0 { 0 } else { binomial(k - 1 + r as u64, r as u64).expect("small") };
    let closed = head + s * (d as u64 - k + 1);
    debug_assert_eq!(closed, dim_im_phi_sum(s, r, d)?);
    Ok(closed)
}

// log of d^{d+5} e^{2 sqrt d - d}
fn ln_mpp_const(d: f64) -> f64 {
    (d + 5.0) * d.ln() + 2.0 * d.sqrt() - d
}

fn characteristic(q: u64) -> Result<u64> {
    prime_power(q)
        .map(|(p, _)| p)
        .ok_or_else(|| AnalyticsError::Range(format!("{q} is not a prime power")))
}

/// Deviation bound for `p[C_a = s]` from `(1 - mu_d)^{s-1} mu_d`.
pub fn prob_cs_bound(q: u64, r: usize, d: usize, s: usize, variant: Variant) -> Result<BoundReport> {
    if s == 0 {
        return Err(AnalyticsError::Range("s must be at least 1".into()));
    }
    let p = characteristic(q)?;
    let strips = q.checked_pow(r as u32 - 1).unwrap_or(u64::MAX);
    let limit = s_star(r, d, variant).min(strips);
    if s as u64 > limit {
        return Err(AnalyticsError::Hypothesis(format!(
            "s = {s} exceeds min(s*, q^(r-1)) = {limit} for the {variant} bound"
        )));
    }
    let qf = q as f64;
    let df = d as f64;
    let radius = match variant {
        Variant::Cmpp => {
            let middle = (df - 2.0).powi(5) * (2.0 * df.sqrt()).exp() / 2f64.powi(d as i32 - 1);
            ((-1.0f64).exp() + middle + 1.0) / qf + 14.0 / (qf * qf)
        }
        Variant::Mpp => {
            if p == 2 {
                return Err(AnalyticsError::Hypothesis("the mpp bound needs odd q".into()));
            }
            let lead = (2.0 * df.ln() + df * 2f64.ln() - 0.5 * qf.ln()).exp();
            let tail = ((266f64).ln() + ln_mpp_const(df)).exp();
            lead + (tail + 1.0) / qf
        }
    };
    Ok(BoundReport { center: to_f64(&p_hat(s, d)?), radius, variant })
}

/// `(1 - mu_d)^{s*}`.
pub fn tail_prob(s_star: u64, d: usize) -> f64 {
    (1.0 - mu_f64(d)).powf(s_star as f64)
}

/// Expected number of strips with a zero, over uniform `F_{r,d}`.
pub fn ns_mean(q: u64, r: usize, d: usize) -> Result<ExactRational> {
    require_q_gt_d(q, d)?;
    let e = r as i64 - 1;
    let mut acc = ExactRational::zero();
    for k in 1..=d as i64 {
        let term = big(binomial_big(q, k as u64)) * qpow(q, e - k);
        if k % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    let last = big(binomial_big(q - 1, d as u64)) * qpow(q, e - d as i64 - 1);
    if d.is_multiple_of(2) {
        acc += last;
    } else {
        acc -= last;
    }
    debug_assert_eq!(acc, qpow(q, e) * prob_c1_exact(q, d)?);
    Ok(acc)
}

/// Leading terms of the variance of the number of strips with a zero:
/// `q^{2r-3} / (d!)^2 + mu_d (1 - mu_d) q^{r-1}`.
pub fn ns_variance_leading(q: u64, r: usize, d: usize) -> Result<f64> {
    require_q_gt_d(q, d)?;
    let m = mu_f64(d);
    let qf = q as f64;
    Ok(qf.powi(2 * r as i32 - 3) * inv_factorial_sq(d) + m * (1.0 - m) * qf.powi(r as i32 - 1))
}

fn inv_factorial_sq(d: usize) -> f64 {
    let mut x = 1.0f64;
    for k in 1..=d {
        x /= (k * k) as f64;
        if x == 0.0 {
            break;
        }
    }
    x
}

/// Upper bound on the probability that `NS(F) <= (1 - alpha) E[NS]`.
pub fn chebyshev_a_bound(alpha: f64, q: u64, r: usize, d: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(AnalyticsError::Range(format!("alpha = {alpha} not in (0, 1)")));
    }
    let m = mu_f64(d);
    let qf = q as f64;
    Ok(inv_factorial_sq(d) / (alpha * m).powi(2) / qf
        + (1.0 - m) / (alpha * alpha * m) * qf.powi(1 - r as i32))
}

// C(n + k, k) as a float, for possibly huge arguments
fn binomial_f64(n: u64, k: u64) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (n + i) as f64 / i as f64)
}

/// Main term of the expected number of strips searched, without the cost
/// of a single strip.
pub fn expected_searches_bound(r: usize, d: usize) -> Result<f64> {
    if r < 2 || d < 2 {
        return Err(AnalyticsError::Range("needs r >= 2 and d >= 2".into()));
    }
    let m = mu_f64(d);
    let df = d as f64;
    if r > 2 {
        let s = binomial_f64((d / 2) as u64, r as u64 - 1);
        Ok(1.0 / m + df * (1.0 - 1.0 / df).powf(s))
    } else {
        let s = (d / 2 + 1) as f64;
        let alpha = 1.0 - 1.0 / s.sqrt();
        Ok((1.0 / (alpha * alpha)) * ((1.0 - m) / m + inv_factorial_sq(d) / (m * m))
            + 1.0 / m
            + (1.0 - m / s.sqrt()).powf(s + 1.0))
    }
}

/// Cost of one strip search in field multiplications: `D + c d log2 q`.
pub fn cost_model_tau(d: usize, r: usize, q: u64, c: f64) -> f64 {
    let dim = binomial_f64(d as u64, r as u64);
    dim + c * d as f64 * (q as f64).log2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyBounds {
    /// `log q^{r-1}` (natural log).
    pub ideal_upper: f64,
    /// `1 / (2 mu_d)`: the search's entropy is at least this times `log q^{r-1}`.
    pub svs_lower_coeff: f64,
}

pub fn entropy_bounds(q: u64, r: usize, d: usize) -> EntropyBounds {
    EntropyBounds {
        ideal_upper: (r as f64 - 1.0) * (q as f64).ln(),
        svs_lower_coeff: 1.0 / (2.0 * mu_f64(d)),
    }
}

/// Deviation of the average value-set size `V_d(j, a)` from `mu_d q`.
pub fn valueset_bounds(q: u64, d: usize, j: usize, variant: Variant) -> Result<BoundReport> {
    let p = characteristic(q)?;
    let qf = q as f64;
    let df = d as f64;
    let hi = match variant {
        Variant::Cmpp => (d / 2).saturating_sub(1),
        Variant::Mpp => d.saturating_sub(3),
    };
    if j < 1 || j > hi {
        return Err(AnalyticsError::Hypothesis(format!(
            "j = {j} outside 1..={hi} for the {variant} estimate"
        )));
    }
    let radius = match variant {
        Variant::Cmpp => {
            (-1.0f64).exp() / 2.0
                + (df - 2.0).powi(5) * (2.0 * df.sqrt()).exp() / 2f64.powi(d as i32 - 2)
                + 7.0 / qf
        }
        Variant::Mpp => {
            if p == 2 {
                return Err(AnalyticsError::Hypothesis("the mpp estimate needs odd q".into()));
            }
            df * df * 2f64.powi(d as i32 - 1) * qf.sqrt() + (133f64.ln() + ln_mpp_const(df)).exp()
        }
    };
    Ok(BoundReport { center: mu_f64(d) * qf, radius, variant })
}

fn bad_set_terms(s: u64, r: usize, q: u64) -> Result<(u64, f64)> {
    if s == 0 {
        return Err(AnalyticsError::Range("s must be at least 1".into()));
    }
    let k = kappa(s, r)?;
    let qf = q as f64;
    let mut dev = 0.0;
    for j in 1..=k {
        let delta = (j * d_j(j as i64, r)) as f64;
        dev += (delta - 1.0) * (delta - 2.0) * qf.powf(-1.5) + 5.0 * delta.powf(13.0 / 3.0) / (qf * qf);
    }
    Ok((k, dev))
}

/// Sum over `j <= kappa_s` of the error terms in the count of strip tuples
/// where the `j`-th Vandermonde determinant vanishes, divided by
/// `q^{s(r-1)}`.
pub fn bad_set_deviation(s: u64, r: usize, _d: usize, q: u64) -> Result<f64> {
    Ok(bad_set_terms(s, r, q)?.1)
}

/// Upper bound on the fraction of strip tuples that are not generic:
/// `kappa_s / q` plus [`bad_set_deviation`].
pub fn bad_set_bound(s: u64, r: usize, _d: usize, q: u64) -> Result<f64> {
    let (k, dev) = bad_set_terms(s, r, q)?;
    Ok(k as f64 / q as f64 + dev)
}

/// `|x - y|` for rationals.
pub fn abs_diff(x: &ExactRational, y: &ExactRational) -> ExactRational {
    (x - y).abs()
}
