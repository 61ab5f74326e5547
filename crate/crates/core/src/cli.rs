//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 the search found no
//! zero, 3 an enumeration exceeded its guard, 4 a hypothesis of a formula
//! does not hold (for instance `q <= d`).

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analytics::{self, AnalyticsError, ExactRational, Variant};
use crate::ff::{Elem, FieldCtx, FieldError};
use crate::harness::{self, Format, HarnessError, SimConfig};
use crate::oracle::{self, EnumGuard, OracleError};
use crate::poly::{parse_inline, parse_poly, MultiPoly, PolyError, Strip, UniPoly};
use crate::search::{Outcome, StripSequence, Svs, SvsError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;
pub const EXIT_GUARD: i32 = 3;
pub const EXIT_HYPOTHESIS: i32 = 4;

/// Environment variable overriding the worker count of `simulate`.
pub const WORKERS_ENV: &str = "SVS_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "svs", version, about = "Search on vertical strips over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct FieldArgs {
    /// Field order q = p^k (default modulus for k > 1).
    #[arg(long, conflicts_with = "field")]
    pub q: Option<u64>,
    /// Field spec line `q p k [m_0 .. m_k]`.
    #[arg(long)]
    pub field: Option<String>,
}

impl FieldArgs {
    fn ctx(&self) -> Result<Option<FieldCtx>, CliError> {
        match (&self.q, &self.field) {
            (Some(q), _) => Ok(Some(FieldCtx::with_order(*q)?)),
            (None, Some(spec)) => Ok(Some(spec.parse()?)),
            (None, None) => Ok(None),
        }
    }

    fn require(&self) -> Result<FieldCtx, CliError> {
        self.ctx()?.ok_or_else(|| CliError::Usage("one of --q or --field is required".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find a zero of one polynomial.
    Solve {
        #[command(flatten)]
        field: FieldArgs,
        /// File in POLY format, `-` for stdin, or inline terms `c:e1,..,er ...`.
        #[arg(long)]
        poly: String,
        /// Number of variables (inline polynomials only; default from the terms).
        #[arg(long)]
        r: Option<usize>,
        /// Degree bound (inline polynomials only; default the largest term degree).
        #[arg(long)]
        d: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_strips: Option<u64>,
        /// Comma-separated strip order, each strip as `a_1:..:a_{r-1}`.
        #[arg(long)]
        strips: Option<String>,
        /// Print one line per searched strip.
        #[arg(long)]
        trace: bool,
    },
    /// Monte Carlo table of the search-count distribution.
    Simulate {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Polynomials per strip order.
        #[arg(long)]
        samples: Option<u64>,
        /// Number of strip orders.
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        smax: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Use one polynomial sample for all strip orders.
        #[arg(long)]
        shared_sample: bool,
        #[arg(long)]
        max_strips: Option<u64>,
        /// key=value file with defaults for the flags above.
        #[arg(long)]
        config: Option<String>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Closed-form predictions.
    Predict {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 15)]
        smax: usize,
        #[arg(long, default_value = "cmpp")]
        variant: String,
        /// Constant in the strip cost model D + c d log2 q.
        #[arg(long, default_value_t = 1.0)]
        tau_c: f64,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Exact values by enumerating every polynomial.
    Exact {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: usize,
        /// Enumeration cap (number of states).
        #[arg(long, default_value_t = 1 << 30)]
        guard: u64,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Value-set sizes and their averages.
    Valueset {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: usize,
        /// Number of fixed top coefficients.
        #[arg(long)]
        j: Option<usize>,
        /// Fixed top coefficients a_d .. a_{d-j+1}, space separated.
        #[arg(long)]
        prefix: Option<String>,
        /// Single polynomial, coefficients low to high.
        #[arg(long)]
        coeffs: Option<String>,
        /// Sample size when the family is too large to enumerate.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "cmpp")]
        variant: String,
        #[arg(long, default_value_t = 1 << 30)]
        guard: u64,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Entropy of the search's output over random polynomials.
    Entropy {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1 << 30)]
        guard: u64,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Genericity and specialization rank for a strip tuple.
    RankCheck {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        d: usize,
        /// Space-separated strips, coordinates joined by commas.
        #[arg(long)]
        strips: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Guard(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Guard(_) => EXIT_GUARD,
            CliError::Hypothesis(_) => EXIT_HYPOTHESIS,
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<SvsError> for CliError {
    fn from(e: SvsError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<AnalyticsError> for CliError {
    fn from(e: AnalyticsError) -> Self {
        match e {
            AnalyticsError::Hypothesis(m) => CliError::Hypothesis(m),
            AnalyticsError::Range(m) => CliError::Usage(m),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::GuardExceeded { .. } => CliError::Guard(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Oracle(o) => o.into(),
            HarnessError::Analytics(a) => a.into(),
            e => CliError::Usage(e.to_string()),
        }
    }
}

// rows of (quantity, exact numerator, exact denominator, float, radius)
#[derive(Default)]
struct Table {
    rows: Vec<[String; 5]>,
}

impl Table {
    fn exact(&mut self, name: &str, x: &ExactRational) {
        self.rows.push([
            name.into(),
            x.numer().to_string(),
            x.denom().to_string(),
            format!("{:.6}", analytics::to_f64(x)),
            String::new(),
        ]);
    }

    fn float(&mut self, name: &str, x: f64) {
        self.rows.push([name.into(), String::new(), String::new(), fmt_f(x), String::new()]);
    }

    fn bound(&mut self, name: &str, b: &analytics::BoundReport) {
        self.rows.push([name.into(), String::new(), String::new(), fmt_f(b.center), fmt_f(b.radius)]);
    }

    fn render(&self, format: Format) -> String {
        let header = ["quantity", "exact_num", "exact_den", "float", "bound_radius"];
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&header.join(","));
                out.push('\n');
                for r in &self.rows {
                    // drop trailing empty fields
                    let n = r.iter().rposition(|f| !f.is_empty()).map_or(0, |i| i + 1);
                    out.push_str(&r[..n].join(","));
                    out.push('\n');
                }
            }
            Format::Md => {
                out.push_str(&format!("| {} |\n|---|---|---|---|---|\n", header.join(" | ")));
                for r in &self.rows {
                    out.push_str(&format!("| {} |\n", r.join(" | ")));
                }
            }
        }
        out
    }
}

fn fmt_f(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e9) {
        format!("{x:.6e}")
    } else {
        format!("{x:.6}")
    }
}

fn format(s: &str) -> Result<Format, CliError> {
    s.parse().map_err(|e: HarnessError| CliError::Usage(e.to_string()))
}

fn parse_elems(ctx: &FieldCtx, text: &str, sep: char) -> Result<Vec<Elem>, CliError> {
    text.split(sep)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: u64 = t.trim().parse().map_err(|_| CliError::Usage(format!("bad element {t:?}")))?;
            ctx.elem(v).ok_or_else(|| CliError::Usage(format!("element {v} not in F_{}", ctx.q())))
        })
        .collect()
}

fn load_poly(
    ctx: &FieldCtx,
    src: &str,
    r: Option<usize>,
    d: Option<usize>,
    stdin: &mut dyn Read,
) -> Result<MultiPoly, CliError> {
    let text = if src == "-" {
        let mut s = String::new();
        stdin.read_to_string(&mut s)?;
        Some(s)
    } else if Path::new(src).is_file() {
        Some(std::fs::read_to_string(src)?)
    } else {
        None
    };
    if let Some(text) = text {
        return Ok(parse_poly(ctx, &text)?);
    }
    // inline terms; infer r and d from the terms when not given
    let mut r_seen = None;
    let mut d_seen = 0usize;
    for tok in src.split_whitespace() {
        let exps = tok.split_once(':').map(|(_, e)| e).unwrap_or("");
        let parts: Vec<&str> = exps.split(',').collect();
        r_seen.get_or_insert(parts.len());
        d_seen = d_seen.max(parts.iter().filter_map(|p| p.parse::<usize>().ok()).sum());
    }
    let r = r.or(r_seen).ok_or_else(|| CliError::Usage("empty polynomial; pass --r".into()))?;
    Ok(parse_inline(ctx, r, d.unwrap_or(d_seen), src)?)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, stdin: &mut dyn Read) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, stdin) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, stdin: &mut dyn Read) -> Result<i32, CliError> {
    match cmd {
        Command::Solve { field, poly, r, d, seed, max_strips, strips, trace } => {
            let ctx = field.require()?;
            let f = load_poly(&ctx, &poly, r, d, stdin)?;
            let svs = Svs::new(&ctx, f.r(), f.d())?.record_trace(trace);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let res = match strips {
                Some(s) => {
                    let seq = s
                        .split(',')
                        .map(|a| parse_elems(&ctx, a, ':').map(Strip))
                        .collect::<Result<Vec<_>, _>>()?;
                    svs.run_with_strips(&f, &StripSequence::new(seq)?, &mut rng)?
                }
                None => svs.run(&f, &mut rng, max_strips)?,
            };
            for e in &res.trace {
                let a: Vec<String> = e.strip.0.iter().map(|c| c.to_string()).collect();
                writeln!(out, "strip {} roots={}", a.join(" "), e.roots)?;
            }
            match res.outcome {
                Outcome::Found { zero, searches } => {
                    let z: Vec<String> = zero.iter().map(|c| c.to_string()).collect();
                    writeln!(out, "{}", z.join(" "))?;
                    writeln!(out, "searches={searches}")?;
                    Ok(EXIT_OK)
                }
                Outcome::Failure => {
                    writeln!(out, "failure")?;
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Simulate {
            field,
            r,
            d,
            samples,
            reps,
            smax,
            seed,
            workers,
            shared_sample,
            max_strips,
            config,
            format: fmt,
        } => {
            let fmt = format(&fmt)?;
            let mut cfg = SimConfig::new(FieldCtx::prime(2)?, 2, 0);
            let mut have_field = false;
            if let Some(path) = config {
                let text = std::fs::read_to_string(&path)?;
                have_field = text.lines().any(|l| {
                    let k = l.split('=').next().unwrap_or("").trim();
                    k == "q" || k == "field"
                });
                cfg.apply_kv(&text)?;
            }
            if let Ok(w) = std::env::var(WORKERS_ENV) {
                cfg.set("workers", &w)?;
            }
            if let Some(ctx) = field.ctx()? {
                cfg.field = ctx;
                have_field = true;
            }
            if !have_field {
                return Err(CliError::Usage("one of --q or --field is required".into()));
            }
            macro_rules! take {
                ($flag:expr, $slot:expr) => {
                    if let Some(v) = $flag {
                        $slot = v;
                    }
                };
            }
            take!(r, cfg.r);
            take!(d, cfg.d);
            take!(samples, cfg.samples);
            take!(reps, cfg.reps);
            take!(smax, cfg.s_max);
            take!(seed, cfg.seed);
            take!(workers, cfg.workers);
            cfg.shared_sample |= shared_sample;
            if max_strips.is_some() {
                cfg.max_strips = max_strips;
            }
            let report = harness::simulate(&cfg)?;
            write!(out, "{}", harness::render_report(&report, fmt))?;
            Ok(EXIT_OK)
        }
        Command::Predict { field, r, d, smax, variant, tau_c, format: fmt } => {
            let fmt = format(&fmt)?;
            let variant: Variant = variant.parse()?;
            let mut t = Table::default();
            t.exact("mu", &analytics::mu(d));
            t.float("inv_mu", 1.0 / analytics::mu_f64(d));
            for s in 1..=smax {
                t.exact(&format!("p_hat_{s}"), &analytics::p_hat(s, d)?);
            }
            t.float("tail_prob", analytics::tail_prob(analytics::s_star(r, d, variant), d));
            if r >= 2 && d >= 2 {
                t.float("expected_searches_bound", analytics::expected_searches_bound(r, d)?);
            }
            if let Some(ctx) = field.ctx()? {
                let q = ctx.q();
                t.exact("P_C1", &analytics::prob_c1_exact(q, d)?);
                t.exact("two_strip_joint", &analytics::two_strip_joint(q, d)?);
                t.exact("P_C2", &analytics::p_exact_c2(q, d)?);
                t.exact("ns_mean", &analytics::ns_mean(q, r, d)?);
                t.float("ns_variance_leading", analytics::ns_variance_leading(q, r, d)?);
                let limit = analytics::s_star(r, d, variant).min(smax as u64);
                for s in 1..=limit as usize {
                    match analytics::prob_cs_bound(q, r, d, s, variant) {
                        Ok(b) => t.bound(&format!("prob_cs_{s}"), &b),
                        Err(AnalyticsError::Hypothesis(_)) => break,
                        Err(e) => return Err(e.into()),
                    }
                }
                t.float("tau", analytics::cost_model_tau(d, r, q, tau_c));
                let e = analytics::entropy_bounds(q, r, d);
                t.float("entropy_ideal_upper", e.ideal_upper);
                t.float("entropy_svs_lower_coeff", e.svs_lower_coeff);
            }
            write!(out, "{}", t.render(fmt))?;
            Ok(EXIT_OK)
        }
        Command::Exact { field, r, d, guard, format: fmt } => {
            let fmt = format(&fmt)?;
            let ctx = field.require()?;
            let guard = EnumGuard::new(guard);
            let mut t = Table::default();
            t.exact("P_C1", &oracle::enumerate_prob_c1(&ctx, r, d, &guard)?);
            if ctx.q() > d as u64 {
                t.exact("P_C1_formula", &analytics::prob_c1_exact(ctx.q(), d)?);
            }
            let strips: Vec<Strip> =
                (0..2).map(|i| Strip::from_index(i, r - 1, ctx.q())).collect();
            let dist = oracle::enumerate_prob_cs(&ctx, r, d, &StripSequence::new(strips)?, &guard)?;
            t.exact("P_C2", &dist.by_s[1]);
            if ctx.q() > d as u64 {
                t.exact("P_C2_formula", &analytics::p_exact_c2(ctx.q(), d)?);
            }
            t.exact("mean_N", &oracle::mean_n(&ctx, r, d, &guard)?);
            t.exact("mean_NS", &oracle::mean_ns(&ctx, r, d, &guard)?);
            t.exact("var_NS", &oracle::var_ns(&ctx, r, d, &guard)?);
            t.float("avg_entropy", oracle::exact_avg_entropy(&ctx, r, d, &guard)?);
            write!(out, "{}", t.render(fmt))?;
            Ok(EXIT_OK)
        }
        Command::Valueset { field, d, j, prefix, coeffs, samples, seed, variant, guard, format: fmt } => {
            let fmt = format(&fmt)?;
            let ctx = field.require()?;
            let guard = EnumGuard::new(guard);
            let mut t = Table::default();
            if let Some(c) = coeffs {
                let f = UniPoly::new(parse_elems(&ctx, &c, ' ')?);
                t.float("V", oracle::value_set_card(&f, &ctx, &guard)? as f64);
            }
            if let Some(j) = j {
                let prefix = match prefix {
                    Some(p) => parse_elems(&ctx, &p, ' ')?,
                    None => {
                        let mut v = vec![Elem::ZERO; j];
                        v[0] = Elem::ONE;
                        v
                    }
                };
                match oracle::avg_value_set(&ctx, d, j, &prefix, &guard) {
                    Ok(v) => t.exact("V_avg", &v),
                    Err(OracleError::GuardExceeded { .. }) if samples.is_some() => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        let n = samples.unwrap_or_default();
                        let (m, se) = oracle::avg_value_set_sampled(&ctx, d, j, &prefix, n, &mut rng)?;
                        t.float("V_avg_sampled", m);
                        t.float("V_avg_stderr", se);
                    }
                    Err(e) => return Err(e.into()),
                }
                t.bound("V_bound", &analytics::valueset_bounds(ctx.q(), d, j, variant.parse()?)?);
            }
            write!(out, "{}", t.render(fmt))?;
            Ok(EXIT_OK)
        }
        Command::Entropy { field, r, d, samples, seed, guard, format: fmt } => {
            let fmt = format(&fmt)?;
            let ctx = field.require()?;
            let rep = harness::empirical_entropy(&ctx, r, d, samples, seed, &EnumGuard::new(guard))?;
            let mut t = Table::default();
            t.float("mean_H", rep.mean_h);
            t.float("mean_H_ideal", rep.mean_ideal);
            t.float("ideal_upper", rep.ideal_upper);
            t.float("H_ratio", rep.ratio());
            t.float("svs_lower_coeff", rep.svs_lower_coeff);
            t.float("violations", rep.violations as f64);
            write!(out, "{}", t.render(fmt))?;
            Ok(EXIT_OK)
        }
        Command::RankCheck { field, r, d, strips } => {
            let ctx = field.require()?;
            let strips = strips
                .split_whitespace()
                .map(|a| parse_elems(&ctx, a, ',').map(Strip))
                .collect::<Result<Vec<_>, _>>()?;
            StripSequence::new(strips.clone())?;
            let generic = oracle::vandermonde_generic(&strips, r, d, &ctx)?;
            let rank = oracle::phi_matrix_rank(&strips, r, d, &ctx)?;
            writeln!(out, "generic={generic}")?;
            writeln!(out, "phi_rank={rank}")?;
            writeln!(out, "dim_im_phi={}", analytics::dim_im_phi(strips.len() as u64, r, d)?)?;
            Ok(EXIT_OK)
        }
    }
}
