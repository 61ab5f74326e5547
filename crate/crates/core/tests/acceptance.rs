//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fatal check fails. Runs without the libtest harness so the
//! lines always show.

use std::time::Instant;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use svs::analytics::{self, ExactRational, Variant};
use svs::ff::{sample_uniform, Elem, FieldCtx};
use svs::harness::{self, render_report, simulate, Format, SimConfig, SimulationReport};
use svs::oracle::{self, EnumGuard};
use svs::poly::{sample_poly, Strip, UniPoly};
use svs::roots::{all_roots, sample_root, scan_roots};
use svs::search::{StripSequence, Svs};

const SEED: u64 = 20240611;

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn check(&mut self, id: &'static str, ok: bool, detail: String, started: Instant) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag} {id}: {detail} [{:.1}s]", started.elapsed().as_secs_f64());
        if !ok {
            self.failed.push(id);
        }
    }
}

fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n.into(), d.into())
}

fn field(q: u64) -> FieldCtx {
    FieldCtx::with_order(q).unwrap()
}

fn run_sim(q: u64, r: usize, d: usize, samples: u64, workers: usize) -> SimulationReport {
    let mut cfg = SimConfig::new(field(q), r, d);
    cfg.samples = samples;
    cfg.reps = 30;
    cfg.s_max = 15;
    cfg.seed = SEED;
    cfg.workers = workers;
    simulate(&cfg).unwrap()
}

fn p_bar(rep: &SimulationReport, s: usize) -> f64 {
    rep.rows[s - 1].p_bar
}

fn c1_exact_theorem(suite: &mut Suite) {
    let t = Instant::now();
    let guard = EnumGuard::default();
    let mut ok = true;
    let mut detail = Vec::new();
    for (q, r, d) in [(3, 2, 2), (5, 2, 2), (3, 3, 2)] {
        let formula = analytics::prob_c1_exact(q, d).unwrap();
        let oracle = oracle::enumerate_prob_c1(&field(q), r, d, &guard).unwrap();
        ok &= formula == oracle;
        detail.push(format!("({q},{r},{d}) {formula} vs {oracle}"));
    }
    suite.check("C1 exact P[C_a=1]", ok, detail.join("; "), t);
}

fn c2_two_strip(suite: &mut Suite) {
    let t = Instant::now();
    let ctx = field(3);
    let formula = analytics::p_exact_c2(3, 2).unwrap();
    let seq = StripSequence::new(vec![Strip(vec![Elem(0)]), Strip(vec![Elem(1)])]).unwrap();
    let dist = oracle::enumerate_prob_cs(&ctx, 2, 2, &seq, &EnumGuard::default()).unwrap();
    let ok = formula == rat(50, 243) && dist.by_s[1] == formula;
    suite.check("C2 two-strip identity", ok, format!("formula {formula}, oracle {}", dist.by_s[1]), t);
}

fn c3_corollary(suite: &mut Suite) {
    let t = Instant::now();
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut ok = true;
    for q in [11u64, 67, 257] {
        for d in 2..=10usize {
            if q <= d as u64 {
                continue;
            }
            let diff = analytics::abs_diff(&analytics::prob_c1_exact(q, d).unwrap(), &analytics::mu(d));
            let bound = rat(2, q as i64);
            ok &= diff <= bound;
            worst = worst.max(analytics::to_f64(&(diff / bound)));
            checked += 1;
        }
    }
    suite.check("C3 |P - mu_d| <= 2/q", ok, format!("{checked} cases, max ratio to bound {worst:.4}"), t);
}

fn table_check(
    id: &'static str,
    suite: &mut Suite,
    rep: &SimulationReport,
    targets: &[(usize, f64, f64)],
    n_range: (f64, f64),
    t: Instant,
) {
    let mut ok = true;
    let mut detail = Vec::new();
    for &(s, target, tol) in targets {
        let pb = p_bar(rep, s);
        ok &= (pb - target).abs() <= tol;
        detail.push(format!("p_bar_{s}={pb:.6} (target {target:.6} +-{tol})"));
    }
    ok &= rep.n_bar >= n_range.0 && rep.n_bar <= n_range.1;
    detail.push(format!("n_bar={:.6} in [{}, {}]", rep.n_bar, n_range.0, n_range.1));
    suite.check(id, ok, detail.join(", "), t);
}

fn c4_table1(suite: &mut Suite) -> String {
    let t = Instant::now();
    let rep = run_sim(67, 2, 30, 100_000, 1);
    let targets: Vec<_> = (1..=3).map(|s| (s, rep.rows[s - 1].p_hat, 0.010)).collect();
    table_check("C4 table q=67 r=2 d=30", suite, &rep, &targets, (1.555, 1.595), t);
    render_report(&rep, Format::Csv)
}

fn c5_table2(suite: &mut Suite) {
    let t = Instant::now();
    let rep = run_sim(67, 2, 5, 100_000, 1);
    table_check(
        "C5 table q=67 r=2 d=5",
        suite,
        &rep,
        &[(1, 0.633333, 0.010), (2, 0.232222, 0.010)],
        (1.553, 1.593),
        t,
    );
}

fn c6_table3(suite: &mut Suite) {
    let t = Instant::now();
    let rep = run_sim(8, 2, 3, 100_000, 1);
    table_check("C6 table q=8 r=2 d=3", suite, &rep, &[(1, 0.666666, 0.012)], (1.48, 1.53), t);
    let alt = run_sim(8, 3, 3, 100_000, 1);
    println!(
        "INFO C6 r=3 variant (not asserted): p_bar_1={:.6}, n_bar={:.6}",
        p_bar(&alt, 1),
        alt.n_bar
    );
}

fn c7_table5(suite: &mut Suite) {
    let t = Instant::now();
    let rep = run_sim(67, 3, 5, 50_000, 1);
    table_check("C7 table q=67 r=3 d=5", suite, &rep, &[(1, 0.633333, 0.012)], (1.54, 1.60), t);
}

fn c8_ns_stats(suite: &mut Suite) {
    let t = Instant::now();
    let guard = EnumGuard::default();
    let mean = oracle::mean_ns(&field(3), 2, 2, &guard).unwrap();
    let formula = analytics::ns_mean(3, 2, 2).unwrap();
    let var = analytics::to_f64(&oracle::var_ns(&field(5), 2, 2, &guard).unwrap());
    let lead = analytics::ns_variance_leading(5, 2, 2).unwrap();
    let ok = mean == rat(19, 9) && formula == mean && (var - lead).abs() <= 5.0;
    suite.check(
        "C8 NS statistics",
        ok,
        format!("mean {mean} (formula {formula}); var {var:.6} vs leading {lead:.6}"),
        t,
    );
}

fn c9_dim_im_phi(suite: &mut Suite) {
    let t = Instant::now();
    let ctx = field(11);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    let configs = [(2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (3, 5)];
    let (mut accepted, mut agree, mut tries) = (0, 0, 0);
    while accepted < 50 {
        let (r, d) = configs[tries % configs.len()];
        tries += 1;
        let limit = analytics::d_j(d as i64 - 2, r).min(10);
        let s = rng.random_range(1..=limit) as usize;
        let total = 11u64.pow(r as u32 - 1);
        let mut idx: Vec<u64> = (0..total).collect();
        idx.shuffle(&mut rng);
        let strips: Vec<Strip> = idx[..s].iter().map(|&i| Strip::from_index(i, r - 1, 11)).collect();
        if !oracle::vandermonde_generic(&strips, r, d, &ctx).unwrap() {
            continue;
        }
        accepted += 1;
        let rank = oracle::phi_matrix_rank(&strips, r, d, &ctx).unwrap() as u64;
        if rank == analytics::dim_im_phi(s as u64, r, d).unwrap() {
            agree += 1;
        }
    }
    let mut forms = 0;
    let mut forms_ok = true;
    for r in 2..=4 {
        for d in 1..=8 {
            for s in 1..=analytics::d_j(d as i64, r) {
                forms += 1;
                forms_ok &= analytics::dim_im_phi_sum(s, r, d).unwrap() == analytics::dim_im_phi(s, r, d).unwrap();
            }
        }
    }
    suite.check(
        "C9 dim Im(Phi)",
        agree == 50 && forms_ok,
        format!("rank agrees {agree}/50 ({tries} tuples drawn); closed form agrees on {forms} cases: {forms_ok}"),
        t,
    );
}

fn c10_output_dist(suite: &mut Suite) {
    let t = Instant::now();
    let ctx = field(3);
    let guard = EnumGuard::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let trials = 100_000u64;
    let (mut polys, mut compared, mut worst_z) = (0, 0, 0.0f64);
    let mut ok = true;
    while polys < 10 {
        let f = sample_poly(&ctx, 2, 2, &mut rng).unwrap();
        if oracle::ns_of(&f, &ctx, &guard).unwrap() == 0 {
            continue;
        }
        polys += 1;
        let probs = oracle::output_probs(&f, &ctx, &guard).unwrap();
        ok &= oracle::is_one(&oracle::total_output_prob(&probs));
        let emp = harness::empirical_output_dist(&f, &ctx, trials, &mut rng).unwrap();
        ok &= emp.keys().all(|x| probs.iter().any(|(z, _)| z == x));
        for (x, p) in &probs {
            let p = p.to_f64().unwrap();
            let freq = emp.get(x).copied().unwrap_or(0.0);
            let sigma = (p * (1.0 - p) / trials as f64).sqrt();
            let z = if sigma == 0.0 {
                if freq == p { 0.0 } else { f64::INFINITY }
            } else {
                (freq - p).abs() / sigma
            };
            worst_z = worst_z.max(z);
            ok &= z <= 3.0;
            compared += 1;
        }
    }
    suite.check(
        "C10 output distribution",
        ok,
        format!("{polys} polynomials, {compared} zeros, max |z| {worst_z:.3}, sums exact"),
        t,
    );
}

fn c11_geometric(suite: &mut Suite) {
    let t = Instant::now();
    let (q, r, d) = (67u64, 2usize, 5usize);
    let ctx = field(q);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 11);
    let mut order: Vec<u64> = (0..q).collect();
    order.shuffle(&mut rng);
    let strips: Vec<Strip> = order.iter().map(|&i| Strip::from_index(i, r - 1, q)).collect();
    let generic = oracle::vandermonde_generic(&strips[..3], r, d, &ctx).unwrap();
    let seq = StripSequence::new(strips).unwrap();
    let svs = Svs::new(&ctx, r, d).unwrap();
    let m = 100_000u64;
    let mut counts = [0u64; 3];
    for _ in 0..m {
        let f = sample_poly(&ctx, r, d, &mut rng).unwrap();
        if let Some(s) = svs.run_with_strips(&f, &seq, &mut rng).unwrap().searches() {
            if s <= 3 {
                counts[s - 1] += 1;
            }
        }
    }
    let mut ok = generic;
    let mut detail = vec![format!("generic={generic}")];
    for s in 1..=3 {
        let b = analytics::prob_cs_bound(q, r, d, s, Variant::Cmpp).unwrap();
        let freq = counts[s - 1] as f64 / m as f64;
        let sigma = (b.center * (1.0 - b.center) / m as f64).sqrt();
        ok &= (freq - b.center).abs() <= b.radius + 3.0 * sigma;
        detail.push(format!(
            "s={s} freq {freq:.6} p_hat {:.6} radius {:.4} 3sigma {:.6}",
            b.center,
            b.radius,
            3.0 * sigma
        ));
    }
    suite.check("C11 geometric law (Monte Carlo)", ok, detail.join("; "), t);
}

fn c12_entropy(suite: &mut Suite) {
    let t = Instant::now();
    let guard = EnumGuard::default();
    let small = harness::empirical_entropy(&field(3), 2, 2, 10_000, SEED, &guard).unwrap();
    let big = harness::empirical_entropy(&field(67), 2, 5, 1_000, SEED, &guard).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, e) in [("q=3", &small), ("q=67", &big)] {
        ok &= e.violations == 0;
        ok &= e.mean_h <= e.mean_ideal;
        ok &= e.mean_ideal <= e.ideal_upper;
        detail.push(format!(
            "{name}: H={:.6} <= H_ideal={:.6} <= log q^(r-1)={:.6}, per-F violations {}",
            e.mean_h, e.mean_ideal, e.ideal_upper, e.violations
        ));
    }
    suite.check("C12 entropy (a,b)", ok, detail.join("; "), t);
    let floor = big.svs_lower_coeff - 0.05;
    let flag = if big.ratio() >= floor { "ok" } else { "BELOW (report only)" };
    println!("INFO C12(c) q=67 r=2 d=5: H/log 67 = {:.6}, reference 1/(2 mu_5) - 0.05 = {floor:.6}: {flag}", big.ratio());
}

fn c13_roots(suite: &mut Suite) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 13);
    let mut ok = true;
    let mut detail = Vec::new();
    for q in [67u64, 8, 121] {
        let ctx = field(q);
        let mut buf = Vec::new();
        let mut mismatches = 0;
        let mut done = 0;
        while done < 1000 {
            let deg = rng.random_range(0..=8);
            let f = UniPoly::new((0..=deg).map(|_| sample_uniform(&ctx, &mut rng)).collect());
            if f.is_zero() {
                continue;
            }
            done += 1;
            buf.clear();
            scan_roots(&f, &ctx, &mut buf);
            buf.sort();
            let set = all_roots(&f, &ctx).unwrap();
            if set.full_line || set.roots != buf {
                mismatches += 1;
            }
        }
        // chi-square of sample_root on a polynomial with 8 distinct roots
        let mut elems: Vec<Elem> = ctx.elements().collect();
        elems.shuffle(&mut rng);
        let roots = &elems[..8];
        let f = UniPoly::from_roots(&ctx, roots);
        let n = 8000;
        let mut hits = [0u64; 8];
        for _ in 0..n {
            let x = sample_root(&f, &ctx, &mut rng).unwrap().unwrap();
            hits[roots.iter().position(|&r| r == x).unwrap()] += 1;
        }
        let expect = n as f64 / 8.0;
        let chi2: f64 = hits.iter().map(|&h| (h as f64 - expect).powi(2) / expect).sum();
        let limit = 7.0 + 3.0 * 14f64.sqrt();
        ok &= mismatches == 0 && chi2 <= limit;
        detail.push(format!("F_{q}: {mismatches} mismatches, chi2 {chi2:.2} <= {limit:.2}"));
    }
    suite.check("C13 root finder", ok, detail.join("; "), t);
}

fn c14_determinism(suite: &mut Suite, csv1: &str) {
    let t = Instant::now();
    let rep = run_sim(67, 2, 30, 100_000, 8);
    let csv8 = render_report(&rep, Format::Csv);
    suite.check(
        "C14 determinism workers 1 vs 8",
        csv1 == csv8,
        format!("{} bytes, identical={}", csv1.len(), csv1 == csv8),
        t,
    );
}

fn main() {
    // libtest flags such as --nocapture or a name filter are accepted and ignored
    let _ = std::env::args();
    let mut suite = Suite { failed: Vec::new() };
    c1_exact_theorem(&mut suite);
    c2_two_strip(&mut suite);
    c3_corollary(&mut suite);
    let csv = c4_table1(&mut suite);
    c5_table2(&mut suite);
    c6_table3(&mut suite);
    c7_table5(&mut suite);
    c8_ns_stats(&mut suite);
    c9_dim_im_phi(&mut suite);
    c10_output_dist(&mut suite);
    c11_geometric(&mut suite);
    c12_entropy(&mut suite);
    c13_roots(&mut suite);
    c14_determinism(&mut suite, &csv);
    if suite.failed.is_empty() {
        println!("acceptance: all 14 criteria passed");
    } else {
        println!("acceptance: failed {:?}", suite.failed);
        std::process::exit(1);
    }
}
