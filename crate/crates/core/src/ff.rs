//! Arithmetic in `F_q`, `q = p^k`.
//!
//! Elements are plain integers in `[0, q)`: the base-`p` digits of the index
//! are the coefficients of the element in the polynomial basis
//! `1, T, ..., T^{k-1}` modulo the field's defining polynomial. For
//! `q <= 2^16` multiplication goes through discrete log / antilog tables,
//! which keeps the Monte Carlo loops free of divisions.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Largest supported characteristic (exclusive).
pub const MAX_CHARACTERISTIC: u64 = 1 << 31;
/// Largest supported cardinality (exclusive).
pub const MAX_ORDER: u64 = 1 << 63;

const TABLE_LIMIT: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("modulus is reducible over F_{0}")]
    Reducible(u64),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field order {p}^{k} does not fit the supported range")]
    Overflow { p: u64, k: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse field spec: {0}")]
    Parse(String),
}

/// A field element, encoded as `sum c_i p^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Elem(pub u64);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn idx(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Exact operation totals. Shared between clones of a counting context.
#[derive(Debug, Default)]
pub struct OpCounter {
    adds: AtomicU64,
    muls: AtomicU64,
    invs: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub adds: u64,
    pub muls: u64,
    pub invs: u64,
}

impl OpCounter {
    pub fn snapshot(&self) -> OpCounts {
        OpCounts {
            adds: self.adds.load(Ordering::Relaxed),
            muls: self.muls.load(Ordering::Relaxed),
            invs: self.invs.load(Ordering::Relaxed),
        }
    }
}

#[derive(Debug)]
struct LogTables {
    // exp has length 2(q-1) so log a + log b never needs a reduction.
    exp: Vec<u64>,
    log: Vec<u32>,
}

#[derive(Debug, Clone)]
enum Repr {
    Tables(Arc<LogTables>),
    Prime,
    Poly,
}

/// A finite field `F_{p^k}` with a fixed polynomial basis.
#[derive(Debug, Clone)]
pub struct FieldCtx {
    p: u64,
    k: u32,
    q: u64,
    modulus: Vec<u64>,
    repr: Repr,
    counter: Option<Arc<OpCounter>>,
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldCtx {}

impl FieldCtx {
    /// Builds `F_{p^k}`. When `modulus` is `None` and `k > 1` the monic
    /// irreducible of degree `k` with the smallest coefficient index
    /// `sum c_i p^i` is used.
    pub fn new(p: u64, k: u32, modulus: Option<Vec<u64>>) -> Result<Self, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if k == 0 {
            return Err(FieldError::ZeroDegree);
        }
        if p >= MAX_CHARACTERISTIC {
            return Err(FieldError::Overflow { p, k });
        }
        let q = match p.checked_pow(k) {
            Some(q) if q < MAX_ORDER => q,
            _ => return Err(FieldError::Overflow { p, k }),
        };
        let modulus = match modulus {
            Some(m) => {
                validate_modulus(p, k, &m)?;
                m
            }
            None if k == 1 => vec![0, 1],
            None => smallest_irreducible(p, k),
        };
        let mut ctx = FieldCtx {
            p,
            k,
            q,
            modulus,
            repr: if k == 1 { Repr::Prime } else { Repr::Poly },
            counter: None,
        };
        if q <= TABLE_LIMIT {
            ctx.repr = Repr::Tables(Arc::new(ctx.build_tables()));
        }
        Ok(ctx)
    }

    /// The prime field `F_p`.
    pub fn prime(p: u64) -> Result<Self, FieldError> {
        Self::new(p, 1, None)
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn with_order(q: u64) -> Result<Self, FieldError> {
        let (p, k) = prime_power(q).ok_or(FieldError::NotPrime(q))?;
        Self::new(p, k, None)
    }

    /// Returns a copy of this context with operation counting switched on.
    pub fn counting(&self) -> Self {
        let mut c = self.clone();
        c.counter = Some(Arc::new(OpCounter::default()));
        c
    }

    pub fn op_counts(&self) -> Option<OpCounts> {
        self.counter.as_ref().map(|c| c.snapshot())
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Defining polynomial, low-to-high, monic of degree `k`.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(Elem)
    }

    /// Maps an integer into the prime subfield.
    pub fn from_int(&self, n: i64) -> Elem {
        Elem(n.rem_euclid(self.p as i64) as u64)
    }

    pub fn elem(&self, idx: u64) -> Option<Elem> {
        (idx < self.q).then_some(Elem(idx))
    }

    pub fn encode(&self, digits: &[u64]) -> Result<Elem, FieldError> {
        if digits.len() > self.k as usize || digits.iter().any(|&c| c >= self.p) {
            return Err(FieldError::Parse(format!("bad digit vector {digits:?}")));
        }
        Ok(Elem(digits.iter().rev().fold(0, |acc, &c| acc * self.p + c)))
    }

    pub fn decode(&self, a: Elem) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.k as usize);
        let mut x = a.0;
        for _ in 0..self.k {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    #[inline]
    fn count_add(&self) {
        if let Some(c) = &self.counter {
            c.adds.fetch_add(1, Ordering::Relaxed);
        }
    }

    #[inline]
    fn count_mul(&self) {
        if let Some(c) = &self.counter {
            c.muls.fetch_add(1, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.count_add();
        self.raw_add(a, b)
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.count_add();
        self.raw_add(a, self.neg(b))
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.k == 1 {
            return if a.0 == 0 { a } else { Elem(self.p - a.0) };
        }
        if self.p == 2 {
            return a;
        }
        let mut x = a.0;
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            let c = x % self.p;
            x /= self.p;
            out += ((self.p - c) % self.p) * place;
            place *= self.p;
        }
        Elem(out)
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.count_mul();
        self.raw_mul(a, b)
    }

    /// Multiplicative inverse.
    pub fn inv(&self, a: Elem) -> Result<Elem, FieldError> {
        if a.0 == 0 {
            return Err(FieldError::DivisionByZero);
        }
        if let Some(c) = &self.counter {
            c.invs.fetch_add(1, Ordering::Relaxed);
        }
        Ok(match &self.repr {
            Repr::Tables(t) => {
                let l = t.log[a.0 as usize] as u64;
                Elem(t.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
            }
            Repr::Prime => Elem(inv_mod_prime(a.0, self.p)),
            Repr::Poly => self.raw_pow(a, self.q - 2),
        })
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem, FieldError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` by square-and-multiply; every internal product is counted.
    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    #[inline]
    fn raw_add(&self, a: Elem, b: Elem) -> Elem {
        if self.k == 1 {
            let s = a.0 + b.0;
            return Elem(if s >= self.p { s - self.p } else { s });
        }
        if self.p == 2 {
            return Elem(a.0 ^ b.0);
        }
        let (mut x, mut y) = (a.0, b.0);
        let mut out = 0;
        let mut place = 1;
        for _ in 0..self.k {
            let s = (x % self.p + y % self.p) % self.p;
            x /= self.p;
            y /= self.p;
            out += s * place;
            place *= self.p;
        }
        Elem(out)
    }

    #[inline]
    fn raw_mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.repr {
            Repr::Tables(t) => {
                if a.0 == 0 || b.0 == 0 {
                    Elem::ZERO
                } else {
                    Elem(t.exp[t.log[a.0 as usize] as usize + t.log[b.0 as usize] as usize])
                }
            }
            Repr::Prime => Elem(a.0 * b.0 % self.p),
            Repr::Poly => self.poly_mul(a, b),
        }
    }

    fn raw_pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(acc, base);
            }
            e >>= 1;
            base = self.raw_mul(base, base);
        }
        acc
    }

    fn poly_mul(&self, a: Elem, b: Elem) -> Elem {
        if self.k == 1 {
            return Elem(a.0 * b.0 % self.p);
        }
        let x = self.decode(a);
        let y = self.decode(b);
        let prod = fp_poly::mul(&x, &y, self.p);
        let r = fp_poly::rem(&prod, &self.modulus, self.p);
        Elem(r.iter().rev().fold(0, |acc, &c| acc * self.p + c))
    }

    fn build_tables(&self) -> LogTables {
        let order = self.q - 1;
        let factors = distinct_prime_factors(order);
        let gen = (1..self.q)
            .map(Elem)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&l| self.slow_pow(g, order / l) != Elem::ONE)
            })
            .expect("multiplicative group of a finite field is cyclic");
        let n = order as usize;
        let mut exp = vec![0u64; 2 * n];
        let mut log = vec![0u32; self.q as usize];
        let mut x = Elem::ONE;
        for i in 0..n {
            exp[i] = x.0;
            exp[i + n] = x.0;
            log[x.0 as usize] = i as u32;
            x = self.poly_mul(x, gen);
        }
        LogTables { exp, log }
    }

    fn slow_pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.poly_mul(acc, base);
            }
            e >>= 1;
            base = self.poly_mul(base, base);
        }
        acc
    }
}

impl From<u64> for Elem {
    fn from(v: u64) -> Self {
        Elem(v)
    }
}

/// Uniform element of `F_q`.
#[inline]
pub fn sample_uniform<R: Rng + ?Sized>(ctx: &FieldCtx, rng: &mut R) -> Elem {
    Elem(rng.random_range(0..ctx.q))
}

/// `q p k [m_0 .. m_k]`, modulus omitted for prime fields.
impl fmt::Display for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.q, self.p, self.k)?;
        if self.k > 1 {
            for m in &self.modulus {
                write!(f, " {m}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for FieldCtx {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let nums = s
            .split_whitespace()
            .map(|t| t.parse::<u64>().map_err(|e| FieldError::Parse(format!("{t}: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let [q, p, k, rest @ ..] = nums.as_slice() else {
            return Err(FieldError::Parse("expected `q p k [m_0 .. m_k]`".into()));
        };
        let k = u32::try_from(*k).map_err(|_| FieldError::Parse("k too large".into()))?;
        let modulus = match (k, rest.len()) {
            (1, 0) => None,
            (_, 0) => None,
            (_, n) if n == k as usize + 1 => Some(rest.to_vec()),
            _ => return Err(FieldError::Parse("modulus must have k+1 coefficients".into())),
        };
        let ctx = FieldCtx::new(*p, k, modulus)?;
        if ctx.q != *q {
            return Err(FieldError::Parse(format!("q = {q} but p^k = {}", ctx.q)));
        }
        Ok(ctx)
    }
}

/// Deterministic primality test; trial division is enough below 2^31 but the
/// Miller-Rabin branch covers all of `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    if n < 1 << 32 {
        let mut d = 41;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 2;
        }
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u64(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Splits `q = p^k`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    if q < 2 {
        return None;
    }
    let p = smallest_prime_factor(q);
    let mut k = 0;
    let mut x = q;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    (x == 1).then_some((p, k))
}

fn smallest_prime_factor(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return d;
        }
        d += 2;
    }
    n
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn mul_mod_u64(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u64(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u64(acc, a, m);
        }
        a = mul_mod_u64(a, a, m);
        e >>= 1;
    }
    acc
}

fn inv_mod_prime(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (p as i64, a as i64);
    while new_r != 0 {
        let quo = r / new_r;
        (t, new_t) = (new_t, t - quo * new_t);
        (r, new_r) = (new_r, r - quo * new_r);
    }
    t.rem_euclid(p as i64) as u64
}

fn validate_modulus(p: u64, k: u32, m: &[u64]) -> Result<(), FieldError> {
    if m.len() != k as usize + 1 {
        return Err(FieldError::InvalidModulus(format!(
            "expected {} coefficients, got {}",
            k + 1,
            m.len()
        )));
    }
    if m.iter().any(|&c| c >= p) {
        return Err(FieldError::InvalidModulus("coefficient out of range".into()));
    }
    if m[k as usize] != 1 {
        return Err(FieldError::InvalidModulus("modulus must be monic".into()));
    }
    if !fp_poly::is_irreducible(m, p) {
        return Err(FieldError::Reducible(p));
    }
    Ok(())
}

fn smallest_irreducible(p: u64, k: u32) -> Vec<u64> {
    let span = p.pow(k);
    (0..span)
        .map(|idx| {
            let mut m = Vec::with_capacity(k as usize + 1);
            let mut x = idx;
            for _ in 0..k {
                m.push(x % p);
                x /= p;
            }
            m.push(1);
            m
        })
        .find(|m| fp_poly::is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}

/// Dense polynomials over `F_p` used only to set up extension fields.
pub(crate) mod fp_poly {
    pub fn trim(mut a: Vec<u64>) -> Vec<u64> {
        while a.last() == Some(&0) {
            a.pop();
        }
        a
    }

    pub fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y % p) % p;
            }
        }
        trim(out)
    }

    pub fn rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let m = trim(m.to_vec());
        let dm = m.len() - 1;
        let lead_inv = super::inv_mod_prime(m[dm], p);
        let mut r = trim(a.to_vec());
        while r.len() > dm {
            let shift = r.len() - 1 - dm;
            let c = r[r.len() - 1] * lead_inv % p;
            for (i, &mc) in m.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - c * mc % p) % p;
            }
            r = trim(r);
        }
        r
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = trim(a.to_vec());
        let mut y = trim(b.to_vec());
        while !y.is_empty() {
            let r = rem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    fn powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let mut acc = vec![1u64];
        let mut b = rem(base, m, p);
        while e > 0 {
            if e & 1 == 1 {
                acc = rem(&mul(&acc, &b, p), m, p);
            }
            b = rem(&mul(&b, &b, p), m, p);
            e >>= 1;
        }
        acc
    }

    /// Monic `m` of degree `k` is irreducible iff `gcd(T^{p^i} - T, m) = 1`
    /// for `1 <= i <= k/2`.
    pub fn is_irreducible(m: &[u64], p: u64) -> bool {
        let m = trim(m.to_vec());
        let k = m.len().saturating_sub(1);
        if k == 0 {
            return false;
        }
        if k == 1 {
            return true;
        }
        let t = vec![0u64, 1];
        let mut frob = t.clone();
        for _ in 1..=k / 2 {
            frob = powmod(&frob, p, &m, p);
            let mut diff = frob.clone();
            diff.resize(diff.len().max(2), 0);
            diff[1] = (diff[1] + p - 1) % p;
            let g = gcd(&diff, &m, p);
            if g.len() != 1 {
                return false;
            }
        }
        true
    }
}
