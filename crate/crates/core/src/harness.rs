//! Monte Carlo estimates of the search-count distribution.
//!
//! A simulation draws `reps` independent strip orders. Under each order it
//! runs the search on `samples` uniform polynomials and records the index of
//! the first strip with a zero. Every `(order, polynomial)` pair gets its own
//! RNG streams derived from the master seed, so the result does not depend on
//! how the work is split across threads.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::{self, AnalyticsError};
use crate::ff::{sample_uniform, Elem, FieldCtx, FieldError};
use crate::oracle::{self, EnumGuard, OracleError};
use crate::poly::{resample_poly, MultiPoly, PolyError, Specializer, Strip, StripWeights};
use crate::roots::{all_roots, pick, scan_roots, SCAN_LIMIT};
use crate::search::{output_counts, StripSampler, SvsError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Svs(#[from] SvsError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("cannot parse report: {0}")]
    Parse(String),
}

type Result<T> = std::result::Result<T, HarnessError>;

/// Polynomials per work item.
const CHUNK: u64 = 2048;
/// Strips whose monomial weights are cached per strip order.
const CACHED_STRIPS: usize = 48;

const TAG_STRIPS: u64 = 1;
const TAG_POLY: u64 = 2;
const TAG_ROOT: u64 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub field: FieldCtx,
    pub r: usize,
    pub d: usize,
    /// Polynomials per strip order.
    pub samples: u64,
    /// Number of strip orders.
    pub reps: u64,
    pub s_max: usize,
    pub seed: u64,
    pub workers: usize,
    /// Reuse one polynomial sample for every strip order.
    pub shared_sample: bool,
    /// Stop each search after this many strips.
    pub max_strips: Option<u64>,
}

impl SimConfig {
    pub fn new(field: FieldCtx, r: usize, d: usize) -> Self {
        SimConfig {
            field,
            r,
            d,
            samples: 100_000,
            reps: 30,
            s_max: 15,
            seed: 0,
            workers: 1,
            shared_sample: false,
            max_strips: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::ConfigInvalid(m.into()));
        if self.r < 2 {
            return bad("r must be at least 2");
        }
        if self.d < 1 {
            return bad("d must be at least 1");
        }
        if self.samples == 0 || self.reps == 0 || self.s_max == 0 {
            return bad("samples, reps and smax must be positive");
        }
        if self.max_strips == Some(0) {
            return bad("max_strips must be positive");
        }
        if crate::search::strip_count(self.field.q(), self.r).is_none() {
            return bad("q^(r-1) does not fit a machine word");
        }
        Ok(())
    }

    /// Applies `key=value` lines (`#` comments allowed). Keys: `q`, `field`,
    /// `r`, `d`, `samples`, `reps`, `smax`, `seed`, `workers`,
    /// `shared_sample`, `max_strips`.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::ConfigInvalid(format!("line {line:?} is not key=value")))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| HarnessError::ConfigInvalid(format!("{k}: bad value {v:?}")))
        }
        match key {
            "q" => self.field = FieldCtx::with_order(num(key, value)?)?,
            "field" => self.field = value.parse()?,
            "r" => self.r = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "samples" => self.samples = num(key, value)?,
            "reps" => self.reps = num(key, value)?,
            "smax" => self.s_max = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "shared_sample" => self.shared_sample = num(key, value)?,
            "max_strips" => self.max_strips = Some(num(key, value)?),
            _ => return Err(HarnessError::ConfigInvalid(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for one `(tag, a, b)` cell of the master seed.
pub fn stream(seed: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(mix(mix(seed ^ mix(tag)) ^ a) ^ b))
}

/// Integer tallies for one strip order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Tally {
    /// `by_s[s - 1]` = runs whose first zero was on strip `s <= s_max`.
    pub by_s: Vec<u64>,
    /// Successful runs with `s > s_max`.
    pub tail: u64,
    pub failures: u64,
    /// Sum of `s` over successful runs.
    pub searches: u64,
    pub runs: u64,
}

impl Tally {
    fn new(s_max: usize) -> Self {
        Tally { by_s: vec![0; s_max], ..Default::default() }
    }

    fn merge(&mut self, o: &Tally) {
        for (a, b) in self.by_s.iter_mut().zip(&o.by_s) {
            *a += b;
        }
        self.tail += o.tail;
        self.failures += o.failures;
        self.searches += o.searches;
        self.runs += o.runs;
    }

    fn record(&mut self, s: Option<usize>) {
        self.runs += 1;
        match s {
            None => self.failures += 1,
            Some(s) => {
                self.searches += s as u64;
                match self.by_s.get_mut(s - 1) {
                    Some(c) => *c += 1,
                    None => self.tail += 1,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub s: usize,
    pub p_bar: f64,
    pub p_hat: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub rows: Vec<Row>,
    /// Mean strips searched over successful runs.
    pub n_bar: f64,
    pub fail_rate: f64,
    /// Fraction of runs with a zero first found beyond `s_max`.
    pub tail_mass: f64,
    pub inv_mu: f64,
    /// Per strip order tallies, in order.
    pub tallies: Vec<Tally>,
    pub elapsed: Duration,
}

// A strip order with cached monomial weights for its first strips.
struct Order {
    strips: Vec<u64>,
    weights: Vec<StripWeights>,
}

struct Runner<'a> {
    cfg: &'a SimConfig,
    spec: Specializer,
    cap: usize,
}

impl Runner<'_> {
    fn order(&self, i: u64) -> Result<Order> {
        let ctx = &self.cfg.field;
        let mut rng = stream(self.cfg.seed, TAG_STRIPS, i, 0);
        let mut sampler = StripSampler::new(ctx, self.cfg.r)?;
        let n = (sampler.total() as usize).min(self.cap);
        let strips = (0..n).map(|_| sampler.next_index(&mut rng)).collect::<std::result::Result<Vec<_>, _>>()?;
        let weights = strips
            .iter()
            .take(CACHED_STRIPS)
            .map(|&a| self.spec.weights(ctx, &self.strip(a)))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Order { strips, weights })
    }

    fn strip(&self, idx: u64) -> Strip {
        Strip::from_index(idx, self.cfg.r - 1, self.cfg.field.q())
    }

    // Runs polynomials [lo, hi) under strip order `i`.
    fn chunk(&self, order: &Order, i: u64, lo: u64, hi: u64) -> Result<Tally> {
        let ctx = &self.cfg.field;
        let mut tally = Tally::new(self.cfg.s_max);
        let mut f = MultiPoly::zero(self.cfg.r, self.cfg.d)?;
        let mut roots = Vec::with_capacity(self.cfg.d + 1);
        let poly_seq = if self.cfg.shared_sample { 0 } else { i };
        for j in lo..hi {
            resample_poly(ctx, &mut f, &mut stream(self.cfg.seed, TAG_POLY, poly_seq, j));
            let mut found = None;
            for (k, &a) in order.strips.iter().enumerate() {
                let g = match order.weights.get(k) {
                    Some(w) => self.spec.apply(ctx, &f, w),
                    None => self.spec.apply(ctx, &f, &self.spec.weights(ctx, &self.strip(a))?),
                };
                let mut rng = stream(self.cfg.seed, TAG_ROOT, i, j);
                let t = if g.is_zero() {
                    Some(sample_uniform(ctx, &mut rng))
                } else if ctx.q() <= SCAN_LIMIT {
                    roots.clear();
                    scan_roots(&g, ctx, &mut roots);
                    if roots.is_empty() {
                        continue;
                    }
                    Some(roots[rng.random_range(0..roots.len())])
                } else {
                    pick(&all_roots(&g, ctx).map_err(SvsError::from)?, ctx, &mut rng)
                };
                if let Some(t) = t {
                    debug_assert!(crate::poly::eval(ctx, &f, &self.strip(a).point(t))?.is_zero());
                    found = Some(k + 1);
                    break;
                }
            }
            tally.record(found);
        }
        Ok(tally)
    }
}

/// Runs the simulation described by `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let runner = Runner {
        cfg,
        spec: Specializer::new(cfg.r, cfg.d)?,
        cap: cfg.max_strips.map_or(usize::MAX, |m| m.min(usize::MAX as u64) as usize),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| HarnessError::ConfigInvalid(e.to_string()))?;
    let orders = pool.install(|| {
        (0..cfg.reps).into_par_iter().map(|i| runner.order(i)).collect::<Result<Vec<_>>>()
    })?;
    let chunks_per_order = cfg.samples.div_ceil(CHUNK);
    let items: Vec<(u64, u64)> =
        (0..cfg.reps).flat_map(|i| (0..chunks_per_order).map(move |c| (i, c))).collect();
    let parts = pool.install(|| {
        items
            .par_iter()
            .map(|&(i, c)| {
                let lo = c * CHUNK;
                let hi = (lo + CHUNK).min(cfg.samples);
                runner.chunk(&orders[i as usize], i, lo, hi)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut tallies = vec![Tally::new(cfg.s_max); cfg.reps as usize];
    for (&(i, _), t) in items.iter().zip(&parts) {
        tallies[i as usize].merge(t);
    }
    Ok(build_report(cfg, tallies, start.elapsed()))
}

fn build_report(cfg: &SimConfig, tallies: Vec<Tally>, elapsed: Duration) -> SimulationReport {
    let mut total = Tally::new(cfg.s_max);
    for t in &tallies {
        total.merge(t);
    }
    let runs = total.runs as f64;
    let m = cfg.samples as f64;
    let n = cfg.reps as f64;
    let mu = analytics::mu_f64(cfg.d);
    let rows = (1..=cfg.s_max)
        .map(|s| {
            // mean over strip orders of the per-order frequency
            let p_bar = tallies.iter().map(|t| t.by_s[s - 1] as f64 / m).sum::<f64>() / n;
            let p_hat = (1.0 - mu).powi(s as i32 - 1) * mu;
            Row { s, p_bar, p_hat, eps: (p_bar - p_hat).abs() / p_hat }
        })
        .collect();
    let successes = total.runs - total.failures;
    SimulationReport {
        config: cfg.clone(),
        rows,
        n_bar: if successes == 0 { f64::NAN } else { total.searches as f64 / successes as f64 },
        fail_rate: total.failures as f64 / runs,
        tail_mass: total.tail as f64 / runs,
        inv_mu: 1.0 / mu,
        tallies,
        elapsed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Md,
}

impl FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "md" => Ok(Format::Md),
            _ => Err(HarnessError::ConfigInvalid(format!("unknown format {s:?}"))),
        }
    }
}

/// Renders the table. Timing is left out so equal seeds give equal text.
pub fn render_report(report: &SimulationReport, format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str("s,p_bar,p_hat,eps\n");
            for r in &report.rows {
                let _ = writeln!(out, "{},{:.6},{:.6},{:.6}", r.s, r.p_bar, r.p_hat, r.eps);
            }
            let _ = writeln!(out, "n_bar,{:.6}", report.n_bar);
            let _ = writeln!(out, "fail_rate,{:.6}", report.fail_rate);
            let _ = writeln!(out, "inv_mu,{:.6}", report.inv_mu);
        }
        Format::Md => {
            let c = &report.config;
            let _ = writeln!(
                out,
                "q={}, r={}, d={}, samples={}, reps={}, seed={}\n",
                c.field.q(),
                c.r,
                c.d,
                c.samples,
                c.reps,
                c.seed
            );
            out.push_str("| s | p_bar | p_hat | eps |\n|---|---|---|---|\n");
            for r in &report.rows {
                let _ = writeln!(out, "| {} | {:.6} | {:.6} | {:.6} |", r.s, r.p_bar, r.p_hat, r.eps);
            }
            let _ = writeln!(out, "\nN_bar = {:.6}", report.n_bar);
            let _ = writeln!(out, "fail_rate = {:.6}", report.fail_rate);
            let _ = writeln!(out, "1/mu_d = {:.6}", report.inv_mu);
        }
    }
    out
}

/// Numeric content of a CSV report.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub rows: Vec<Row>,
    pub n_bar: f64,
    pub fail_rate: f64,
    pub inv_mu: f64,
}

pub fn parse_csv(text: &str) -> Result<ParsedReport> {
    let err = |m: String| HarnessError::Parse(m);
    let mut lines = text.lines();
    if lines.next() != Some("s,p_bar,p_hat,eps") {
        return Err(err("missing header".into()));
    }
    let mut rows = Vec::new();
    let mut summary = HashMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let num = |s: &str| s.parse::<f64>().map_err(|_| err(format!("bad number in {line:?}")));
        match f.as_slice() {
            [s, a, b, c] => rows.push(Row {
                s: s.parse().map_err(|_| err(format!("bad s in {line:?}")))?,
                p_bar: num(a)?,
                p_hat: num(b)?,
                eps: num(c)?,
            }),
            [k, v] => {
                summary.insert(k.to_string(), num(v)?);
            }
            _ => return Err(err(format!("unexpected line {line:?}"))),
        }
    }
    let get = |k: &str| summary.get(k).copied().ok_or_else(|| err(format!("missing {k}")));
    Ok(ParsedReport { rows, n_bar: get("n_bar")?, fail_rate: get("fail_rate")?, inv_mu: get("inv_mu")? })
}

/// Output frequencies of `trials` independent runs of the search on `f`.
pub fn empirical_output_dist<R: Rng + ?Sized>(
    f: &MultiPoly,
    ctx: &FieldCtx,
    trials: u64,
    rng: &mut R,
) -> Result<HashMap<Vec<Elem>, f64>> {
    if trials == 0 {
        return Err(HarnessError::ConfigInvalid("trials must be positive".into()));
    }
    Ok(output_counts(f, ctx, trials, rng)?
        .into_iter()
        .map(|(x, c)| (x, c as f64 / trials as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub samples: u64,
    /// Mean of `H_F` over the sample.
    pub mean_h: f64,
    /// Mean of `log N(F)` (zero when `N(F) = 0`): the entropy of an ideal
    /// uniform-over-zeros output.
    pub mean_ideal: f64,
    /// Number of sampled `F` with `H_F > log N(F)`.
    pub violations: u64,
    pub ideal_upper: f64,
    pub svs_lower_coeff: f64,
}

impl EntropyReport {
    /// `mean_h / log q^{r-1}`.
    pub fn ratio(&self) -> f64 {
        self.mean_h / self.ideal_upper
    }
}

/// Entropy of the search's output averaged over `samples` uniform `F`.
pub fn empirical_entropy(
    ctx: &FieldCtx,
    r: usize,
    d: usize,
    samples: u64,
    seed: u64,
    guard: &EnumGuard,
) -> Result<EntropyReport> {
    guard.check_pow(ctx.q(), r)?;
    let mut f = MultiPoly::zero(r, d)?;
    let (mut sum_h, mut sum_ideal, mut violations) = (0.0, 0.0, 0);
    for j in 0..samples {
        resample_poly(ctx, &mut f, &mut stream(seed, TAG_POLY, 0, j));
        let counts = oracle::strip_root_counts(&f, ctx, guard)?;
        let n: u64 = counts.iter().sum();
        let h = oracle::exact_entropy(&f, ctx, guard)?;
        let ideal = if n == 0 { 0.0 } else { (n as f64).ln() };
        if h > ideal + 1e-12 {
            violations += 1;
        }
        sum_h += h;
        sum_ideal += ideal;
    }
    let b = analytics::entropy_bounds(ctx.q(), r, d);
    Ok(EntropyReport {
        samples,
        mean_h: sum_h / samples as f64,
        mean_ideal: sum_ideal / samples as f64,
        violations,
        ideal_upper: b.ideal_upper,
        svs_lower_coeff: b.svs_lower_coeff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(q: u64, r: usize, d: usize) -> SimConfig {
        let mut c = SimConfig::new(FieldCtx::with_order(q).unwrap(), r, d);
        c.samples = 3000;
        c.reps = 4;
        c.s_max = 6;
        c.seed = 11;
        c
    }

    #[test]
    fn tallies_are_consistent() {
        let rep = simulate(&small(7, 2, 3)).unwrap();
        let mass: f64 = rep.rows.iter().map(|r| r.p_bar).sum::<f64>() + rep.tail_mass + rep.fail_rate;
        assert!((mass - 1.0).abs() < 1e-12);
        for r in &rep.rows {
            assert!(r.p_bar >= 0.0);
            assert!((r.eps - (r.p_bar - r.p_hat).abs() / r.p_hat).abs() < 1e-12);
        }
        for t in &rep.tallies {
            assert_eq!(t.runs, 3000);
            assert!(t.by_s.iter().sum::<u64>() + t.tail + t.failures == t.runs);
        }
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let mut c = small(8, 2, 3);
        c.samples = 5000;
        let base = render_report(&simulate(&c).unwrap(), Format::Csv);
        for w in [2, 4, 16] {
            c.workers = w;
            assert_eq!(render_report(&simulate(&c).unwrap(), Format::Csv), base);
        }
        c.seed += 1;
        assert_ne!(render_report(&simulate(&c).unwrap(), Format::Csv), base);
    }

    #[test]
    fn shared_sample_reuses_polynomials() {
        let mut c = small(5, 2, 2);
        c.shared_sample = true;
        c.reps = 3;
        let rep = simulate(&c).unwrap();
        // the failure set depends only on the polynomial, not the strip order
        let f: Vec<u64> = rep.tallies.iter().map(|t| t.failures).collect();
        assert!(f.iter().all(|&x| x == f[0]));
    }

    #[test]
    fn strip_cap_counts_failures() {
        let mut c = small(11, 2, 3);
        c.max_strips = Some(1);
        let rep = simulate(&c).unwrap();
        assert_eq!(rep.tail_mass, 0.0);
        assert!((rep.rows[0].p_bar + rep.fail_rate - 1.0).abs() < 1e-12);
        assert!(rep.rows[1..].iter().all(|r| r.p_bar == 0.0));
    }

    #[test]
    fn csv_round_trip() {
        let mut c = small(67, 2, 5);
        c.s_max = 15;
        c.samples = 500;
        let rep = simulate(&c).unwrap();
        let text = render_report(&rep, Format::Csv);
        assert_eq!(text.lines().count(), 1 + 15 + 3);
        let parsed = parse_csv(&text).unwrap();
        assert_eq!(parsed.rows.len(), 15);
        for (a, b) in parsed.rows.iter().zip(&rep.rows) {
            assert_eq!(a.s, b.s);
            assert!((a.p_bar - b.p_bar).abs() <= 5e-7);
            assert!((a.p_hat - b.p_hat).abs() <= 5e-7);
        }
        assert!((parsed.n_bar - rep.n_bar).abs() <= 5e-7);
        assert!(render_report(&rep, Format::Md).contains("| 15 |"));
        // far tail: p_hat is tiny but eps is still finite
        assert!(rep.rows[14].p_hat > 0.0 && rep.rows[14].eps.is_finite());
    }

    #[test]
    fn config_from_key_values() {
        let mut c = SimConfig::new(FieldCtx::prime(3).unwrap(), 2, 2);
        c.apply_kv("# table 2\nq = 67\nd=5\nsamples=10\nreps=2\nsmax=4\nseed=9\nshared_sample=true\n").unwrap();
        assert_eq!((c.field.q(), c.d, c.samples, c.reps, c.s_max, c.seed), (67, 5, 10, 2, 4, 9));
        assert!(c.shared_sample);
        assert!(c.apply_kv("bogus=1").is_err());
        assert!(c.apply_kv("q=6").is_err());
        c.samples = 0;
        assert!(matches!(simulate(&c), Err(HarnessError::ConfigInvalid(_))));
    }

    #[test]
    fn output_dist_examples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let mut rng = stream(1, 0, 0, 0);
        let unique = crate::poly::parse_inline(&f3, 2, 2, "1:2,0 1:0,2").unwrap();
        let d = empirical_output_dist(&unique, &f3, 100, &mut rng).unwrap();
        assert_eq!(d.get(&vec![Elem(0), Elem(0)]), Some(&1.0));
        let xy = crate::poly::parse_inline(&f3, 2, 2, "1:1,1").unwrap();
        let trials = 60_000;
        let d = empirical_output_dist(&xy, &f3, trials, &mut rng).unwrap();
        let probs = oracle::output_probs(&xy, &f3, &EnumGuard::default()).unwrap();
        assert_eq!(probs.len(), 5);
        for (x, p) in probs {
            let p = analytics::to_f64(&p);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((d.get(&x).copied().unwrap_or(0.0) - p).abs() <= 3.0 * sigma, "{x:?}");
        }
    }

    #[test]
    fn entropy_of_small_samples() {
        let f3 = FieldCtx::prime(3).unwrap();
        let rep = empirical_entropy(&f3, 2, 2, 200, 5, &EnumGuard::default()).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.mean_h <= rep.mean_ideal + 1e-12);
        assert!(rep.mean_h > 0.0);
        let one = crate::poly::parse_inline(&f3, 2, 0, "1:0,0").unwrap();
        assert_eq!(oracle::exact_entropy(&one, &f3, &EnumGuard::default()).unwrap(), 0.0);
    }
}
