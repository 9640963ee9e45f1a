//! Acceptance suite: one line per criterion, tolerances pinned below.
//!
//! Runs as its own binary so every line is printed. Exits nonzero when a hard
//! criterion fails; soft assertions are reported and do not fail the run.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use charsum_core::arith::{
    enumerate_fundamental, kronecker, sieve_primes, smoothness_sieve, FundamentalDiscriminant,
};
use charsum_core::charsum::{char_values, normalized_m, PartialSums};
use charsum_core::consts::{EXP_GAMMA, EXP_NEG_GAMMA};
use charsum_core::dataset::DatasetFile;
use charsum_core::dickman::{
    b0_constant, build_dickman, eta_constant, friable_harmonic, solve_grid,
};
use charsum_core::exec::{with_threads, Execution};
use charsum_core::polya::{gauss_sum, polya_rhs};
use charsum_core::rational::best_approx;
use charsum_core::verify::{check_thm11, check_thm12, psi, scan, Config, Family, Outcome};

const KRONECKER_LIMIT: i64 = 300;
const KRONECKER_TIME: Duration = Duration::from_secs(1);
const ENUM_X: u64 = 10_000;
const DENSITY_REL_TOL: f64 = 0.01;
const ENUM_TIME: Duration = Duration::from_secs(1);
const IDENTITY_LIMIT: u64 = 1000;
const RANDOM_PAIRS: usize = 10_000;
const LISTED_M: [(i64, f64); 3] = [(-3, 1.01843), (5, 0.78884), (-4, 0.88196)];
const LISTED_M_TOL: f64 = 1e-4;
const GAUSS_LIMIT: u64 = 500;
const GAUSS_TOL: f64 = 1e-9;
const POLYA_LIMIT: u64 = 2000;
const POLYA_TOL: f64 = 5.0;
const POLYA_TIME: Duration = Duration::from_secs(120);
const RHO_TOL: f64 = 1e-9;
const P1_TOL: f64 = 1e-8;
const CONVERGENCE_RATIO: f64 = 8.0;
const B0_RANGE: (f64, f64) = (0.8182, 0.8192);
const ETA_TARGET: f64 = 0.389173;
const ETA_TOL: f64 = 1e-5;
const FRIABLE_LOG_Y: f64 = 8.0;
const FRIABLE_TOL: f64 = 3.0;
const FRIABLE_SIEVE: u64 = 10_000_000;
const FRIABLE_TIME: Duration = Duration::from_secs(60);
const RATIONAL_SAMPLES: usize = 1000;
const RATIONAL_BOUNDS: [u64; 3] = [10, 100, 1000];
const EXACT_X: u64 = 10_000;
const EXACT_TOL: f64 = 1e-9;
const STRUCTURE_X: u64 = 200_000;
const STRUCTURE_TIME: Duration = Duration::from_secs(600);
const PSI_X: u64 = 100_000;
const PSI_TAUS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];
const REPRO_X: u64 = 20_000;
const SEED: u64 = 0x5eed;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    SoftFail,
}

struct Line {
    status: Status,
    detail: String,
}

impl Line {
    fn hard(ok: bool, detail: String) -> Self {
        Line {
            status: if ok { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

fn fundamentals(x: u64) -> Vec<FundamentalDiscriminant> {
    enumerate_fundamental(x).unwrap()
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn is_prime_naive(n: u64) -> bool {
    n >= 2
        && (2..n)
            .take_while(|k| k * k <= n)
            .all(|k| !n.is_multiple_of(k))
}

fn euler_criterion(d: i64, p: u64) -> i8 {
    let r = pow_mod(d.rem_euclid(p as i64) as u64, (p - 1) / 2, p);
    match r {
        0 => 0,
        1 => 1,
        x if x == p - 1 => -1,
        _ => unreachable!("Euler criterion gives 0 or ±1"),
    }
}

fn c1_kronecker() -> Line {
    let start = Instant::now();
    let mut checked = 0;
    let mut mismatches = 0;
    for p in (3..=KRONECKER_LIMIT as u64).filter(|&p| is_prime_naive(p)) {
        for d in -KRONECKER_LIMIT..=KRONECKER_LIMIT {
            checked += 1;
            if kronecker(d, p as i64) != euler_criterion(d, p) {
                mismatches += 1;
            }
        }
    }
    let t = start.elapsed();
    Line::hard(
        mismatches == 0 && t < KRONECKER_TIME,
        format!("{checked} pairs, {mismatches} mismatches, {t:.2?}"),
    )
}

fn squarefree(n: u64) -> bool {
    (2..)
        .take_while(|k| k * k <= n)
        .all(|k| !n.is_multiple_of(k * k))
}

fn definitional(d: i64) -> bool {
    match d.rem_euclid(4) {
        1 => d != 1 && squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

fn c2_enumeration() -> Line {
    let start = Instant::now();
    let got = fundamentals(ENUM_X);
    let t = start.elapsed();
    let mut expected = Vec::new();
    for a in 1..=ENUM_X as i64 {
        for d in [-a, a] {
            if definitional(d) {
                expected.push(d);
            }
        }
    }
    let got: Vec<i64> = got.iter().map(|d| d.get()).collect();
    let density = got.len() as f64 / ENUM_X as f64;
    let target = 6.0 / (PI * PI);
    let rel = (density - target).abs() / target;
    Line::hard(
        got == expected && rel <= DENSITY_REL_TOL && t < ENUM_TIME,
        format!(
            "{} discriminants, oracle {}, density {density:.5} vs {target:.5} ({:.3}%), {t:.2?}",
            got.len(),
            if got == expected { "equal" } else { "DIFFERS" },
            100.0 * rel
        ),
    )
}

fn c3_identities() -> Line {
    let sieve = sieve_primes(IDENTITY_LIMIT).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let ds = fundamentals(IDENTITY_LIMIT);
    let mut failures = 0;
    for &d in &ds {
        let q = d.modulus();
        let sums = PartialSums::new(d, &sieve).unwrap();
        let full: i64 = (1..=q).map(|n| kronecker(d.get(), n as i64) as i64).sum();
        if full != 0 || sums.at(q) != 0 {
            failures += 1;
        }
        let sign = -(d.chi(-1) as i64);
        let mut s = 0i64;
        let mut direct = vec![0i64; q as usize];
        for t in 1..q {
            s += kronecker(d.get(), t as i64) as i64;
            direct[t as usize] = s;
        }
        for t in 1..=q - 2 {
            if direct[(q - 1 - t) as usize] != sign * direct[t as usize]
                || sums.at(t) != direct[t as usize]
            {
                failures += 1;
            }
        }
    }
    // random pairs grouped by discriminant so each table is filled once
    let mut pairs = vec![Vec::new(); ds.len()];
    for _ in 0..RANDOM_PAIRS {
        let i = rng.gen_range(0..ds.len());
        pairs[i].push((rng.gen_range(1..1000u64), rng.gen_range(1..1000u64)));
    }
    let big = sieve_primes(1_000_000).unwrap();
    for (&d, ps) in ds.iter().zip(&pairs) {
        let Some(top) = ps.iter().map(|&(m, n)| m * n).max() else {
            continue;
        };
        let v = char_values(d, top, &big).unwrap();
        for &(m, n) in ps {
            if v.get(m * n) != v.get(m) * v.get(n)
                || v.get(m * n) != kronecker(d.get(), (m * n) as i64)
            {
                failures += 1;
            }
        }
    }
    let listed_worst = LISTED_M
        .iter()
        .map(|&(d, m)| (normalized_m(FundamentalDiscriminant::new(d).unwrap()) - m).abs())
        .fold(0.0, f64::max);
    Line::hard(
        failures == 0 && listed_worst <= LISTED_M_TOL,
        format!(
            "{} discriminants, {RANDOM_PAIRS} random pairs, {failures} failures; listed m values within {listed_worst:.1e}",
            ds.len()
        ),
    )
}

fn c4_gauss() -> Line {
    let mut worst = 0.0f64;
    let ds = fundamentals(GAUSS_LIMIT);
    for &d in &ds {
        let r = (d.modulus() as f64).sqrt();
        let closed = if d.get() > 0 {
            Complex64::new(r, 0.0)
        } else {
            Complex64::new(0.0, r)
        };
        worst = worst.max((gauss_sum(d) - closed).norm());
    }
    Line::hard(
        worst <= GAUSS_TOL,
        format!("{} discriminants, max error {worst:.2e}", ds.len()),
    )
}

fn c5_polya() -> Line {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let ds = fundamentals(POLYA_LIMIT);
    for &d in &ds {
        let q = d.modulus();
        let mut prefix = vec![0i64; q as usize + 1];
        for n in 1..=q {
            prefix[n as usize] = prefix[n as usize - 1] + kronecker(d.get(), n as i64) as i64;
        }
        for j in 1..=9 {
            let alpha = j as f64 / 10.0;
            let direct = prefix[(alpha * q as f64).floor() as usize] as f64;
            let rhs = polya_rhs(d, alpha, (q * q) as f64).unwrap();
            worst = worst.max((Complex64::new(direct, 0.0) - rhs).norm());
        }
    }
    let t = start.elapsed();
    Line::hard(
        worst <= POLYA_TOL && t < POLYA_TIME,
        format!(
            "{} discriminants × 9 α, max residual {worst:.3}, {t:.1?}",
            ds.len()
        ),
    )
}

/// Power-series coefficients of `t ↦ ρ(k - t)` on `[0, 1]` for `k = 1..=k_max`.
///
/// From `(k+1-t) f'_{k+1}(t) = f_k(t)` and continuity at `t = 1`.
fn rho_series(k_max: usize) -> Vec<Vec<f64>> {
    const TERMS: usize = 90;
    let mut out = vec![{
        let mut a = vec![0.0; TERMS];
        a[0] = 1.0;
        a
    }];
    for k in 1..k_max {
        let a = out.last().unwrap();
        let mut b = vec![0.0; TERMS];
        for i in 0..TERMS - 1 {
            b[i + 1] = (a[i] + i as f64 * b[i]) / ((k + 1) as f64 * (i + 1) as f64);
        }
        b[0] = a[0] - b[1..].iter().sum::<f64>();
        out.push(b);
    }
    out
}

fn series_rho(series: &[Vec<f64>], u: f64) -> f64 {
    if u <= 1.0 {
        return 1.0;
    }
    let k = u.ceil() as usize;
    let t = k as f64 - u;
    series[k - 1].iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

fn c6_dickman() -> Line {
    let table = build_dickman(10.0, 1e-4).unwrap();
    let series = rho_series(6);
    let rho2 = (table.rho(2.0).value - (1.0 - 2f64.ln())).abs();
    let mut sup = 0.0f64;
    for j in 0..=100_000 {
        let t = 1.0 + j as f64 / 100_000.0;
        sup = sup.max((table.rho(t).value - (1.0 - t.ln())).abs());
    }
    let p = table.p_grid();
    let monotone = p.windows(2).all(|w| w[1] >= w[0]) && p.iter().all(|&v| v <= 1.0);
    let p0 = table.p_of_u(0.0).value;
    let p1 = (table.p_of_u(1.0).value - EXP_NEG_GAMMA).abs();
    let rho4 = series_rho(&series, 4.0);
    let err = |k: usize| (solve_grid(5.0, k).unwrap().0[4 * k] - rho4).abs();
    let (e40, e80) = (err(40), err(80));
    let ratio = e40 / e80;
    let fine = (table.rho(4.0).value - rho4).abs();
    Line::hard(
        rho2 <= RHO_TOL && sup <= RHO_TOL && monotone && p0 == 0.0 && p1 <= P1_TOL && ratio >= CONVERGENCE_RATIO,
        format!(
            "|ρ(2) err| {rho2:.1e}, sup [1,2] {sup:.1e}, P monotone {monotone}, P(0) {p0}, |P(1) err| {p1:.1e}, \
             ρ(4) err h=1/40 {e40:.2e} → 1/80 {e80:.2e} (×{ratio:.1}), at h=1e-4 {fine:.1e}"
        ),
    )
}

fn c7_constants() -> Line {
    let b0 = b0_constant(1e-8).unwrap().value;
    let eta = eta_constant();
    Line::hard(
        (B0_RANGE.0..=B0_RANGE.1).contains(&b0) && (eta - ETA_TARGET).abs() <= ETA_TOL,
        format!("B0 = {b0:.10}, η = {eta:.10}"),
    )
}

fn c8_friable() -> Line {
    let start = Instant::now();
    let lpf = smoothness_sieve(FRIABLE_SIEVE).unwrap();
    let table = build_dickman(10.0, 1e-4).unwrap();
    let y = FRIABLE_LOG_Y.exp();
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for u in [1.0, 1.5, 2.0] {
        let lhs = friable_harmonic(y, u, &lpf).unwrap();
        let main = EXP_GAMMA * table.p_of_u(u).value * FRIABLE_LOG_Y;
        worst = worst.max((lhs - main).abs());
        parts.push(format!("u={u}: {:+.4}", lhs - main));
    }
    let t = start.elapsed();
    Line::hard(
        worst <= FRIABLE_TOL && t < FRIABLE_TIME,
        format!("{} (bound {FRIABLE_TOL}), {t:.1?}", parts.join(", ")),
    )
}

fn c9_rational() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let den = 1u128 << 64;
    let mut mismatches = 0;
    let mut dirichlet = 0;
    for _ in 0..RATIONAL_SAMPLES {
        let alpha: f64 = rng.gen();
        let num = (alpha * 2f64.powi(64)).round() as u128;
        for bound in RATIONAL_BOUNDS {
            let r = best_approx(alpha, bound).unwrap();
            let mut best = (u128::MAX, 0u64, 0u64);
            for b in 1..=bound as u128 {
                let lo = b * num / den;
                for a in [lo, lo + 1] {
                    let err = (b * num).abs_diff(a * den);
                    if a <= b && err < best.0 {
                        best = (err, a as u64, b as u64);
                    }
                }
            }
            if (r.a, r.b) != (best.1, best.2) {
                mismatches += 1;
            }
            // |α - a/b| <= 1/(bB) in exact integers
            if best.0 * bound as u128 > den || !r.satisfies_dirichlet() {
                dirichlet += 1;
            }
        }
    }
    Line::hard(
        mismatches == 0 && dirichlet == 0,
        format!(
            "{} cases, {mismatches} mismatches vs exhaustive search, {dirichlet} Dirichlet violations",
            RATIONAL_SAMPLES * RATIONAL_BOUNDS.len()
        ),
    )
}

fn run_scan(config: &Config) -> Vec<charsum_core::verify::DiscriminantRecord> {
    with_threads(config.threads, || scan(config, Execution::Parallel)).unwrap()
}

fn c10_exact_identity() -> Line {
    let config = Config::new(EXACT_X);
    let recs = run_scan(&config);
    let table = build_dickman(config.dickman_u_max, config.dickman_h).unwrap();
    let rep = check_thm12(&recs, &config, &[], &table, Execution::Parallel).unwrap();
    let mut worst = 0.0f64;
    let mut odd = 0;
    for r in recs.iter().filter(|r| r.d < 0) {
        odd += 1;
        let s: i64 = (1..=r.argmax)
            .map(|n| kronecker(r.d, n as i64) as i64)
            .sum();
        let q = r.d.unsigned_abs() as f64;
        worst = worst.max((EXP_NEG_GAMMA * PI * s.abs() as f64 / q.sqrt() - r.m).abs());
    }
    let hard = rep.soft_value("identity_at_alpha").unwrap();
    Line::hard(
        worst <= EXACT_TOL && hard.passed && rep.outcome() != Outcome::HardFailure,
        format!(
            "{odd} odd discriminants, recount max defect {worst:.1e}, report max defect {:.1e}",
            hard.measured.unwrap_or(f64::NAN)
        ),
    )
}

fn c11_structure() -> Line {
    let config = Config::new(STRUCTURE_X);
    let start = Instant::now();
    let recs = run_scan(&config);
    let t = start.elapsed();
    let rep = check_thm11(&recs, &config);
    let frac = rep.soft_value("fraction_odd_large_m").unwrap();
    let rho = rep.soft_value("spearman_m_vs_euler_product").unwrap();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let detail = format!(
        "{} rows in {t:.1?} on {cores} core(s); odd fraction among m > {} = {:.4} (> {}: {}); \
         Spearman = {:.4} over {} members (> {}: {}); report outcome {:?}",
        recs.len(),
        config.tau,
        frac.measured.unwrap_or(f64::NAN),
        frac.threshold,
        frac.passed,
        rho.measured.unwrap_or(f64::NAN),
        rep.population,
        rho.threshold,
        rho.passed,
        rep.outcome()
    );
    let soft_ok = frac.passed && rho.passed;
    let consistent = rep.outcome()
        == if soft_ok {
            Outcome::Pass
        } else {
            Outcome::SoftFailure
        };
    let status = if t > STRUCTURE_TIME || !consistent {
        Status::Fail
    } else if soft_ok {
        Status::Pass
    } else {
        Status::SoftFail
    };
    Line { status, detail }
}

fn c12_distribution() -> Line {
    let config = Config::new(PSI_X);
    let recs = run_scan(&config);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.csv");
    DatasetFile::new(config.clone(), recs).write(&path).unwrap();
    let loaded = DatasetFile::read(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    // independent recount from the raw CSV: column 1 is parity, column 4 is m
    let rows: Vec<(String, f64)> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("d,"))
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[1].to_string(), c[4].parse().unwrap())
        })
        .collect();
    let mut ok = rows.len() == loaded.records.len();
    let mut parts = Vec::new();
    for (family, tag, label) in [(Family::Odd, "odd", "Ψ⁻"), (Family::Even, "even", "Ψ⁺")] {
        let table = psi(&loaded.records, PSI_X, family, &PSI_TAUS).unwrap();
        let ms: Vec<f64> = rows.iter().filter(|r| r.0 == tag).map(|r| r.1).collect();
        ok &= table.size == ms.len();
        for w in table.rows.windows(2) {
            ok &= w[1].psi <= w[0].psi;
        }
        for row in &table.rows {
            let count = ms.iter().filter(|&&m| m > row.tau).count();
            ok &= (0.0..=1.0).contains(&row.psi)
                && row.count == count
                && row.psi == count as f64 / ms.len() as f64;
        }
        parts.push(format!(
            "{label} = [{}]",
            table
                .rows
                .iter()
                .map(|r| format!("{:.4}", r.psi))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    Line::hard(
        ok,
        format!(
            "τ = {PSI_TAUS:?}: {}; recount {}",
            parts.join(", "),
            if ok { "equal" } else { "DIFFERS" }
        ),
    )
}

fn c13_reproducibility() -> Line {
    let config = Config {
        threads: Some(1),
        ..Config::new(REPRO_X)
    };
    let run = || {
        DatasetFile::new(config.clone(), run_scan(&config))
            .to_csv()
            .unwrap()
    };
    let (a, b) = (run(), run());
    let sequential = DatasetFile::new(
        config.clone(),
        scan(&config, Execution::Sequential).unwrap(),
    )
    .to_csv()
    .unwrap();
    let sum = |s: &str| s.lines().last().unwrap_or("").to_string();
    Line::hard(
        a == b && a == sequential,
        format!(
            "two single-thread runs {}, sequential fallback {}; {}",
            if a == b { "byte-identical" } else { "DIFFER" },
            if a == sequential {
                "identical"
            } else {
                "DIFFERS"
            },
            sum(&a).trim_start_matches("# ")
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Line);
    let criteria: [Criterion; 13] = [
        ("Kronecker symbol vs Euler criterion", c1_kronecker),
        ("fundamental discriminant enumeration", c2_enumeration),
        ("character sum identities", c3_identities),
        ("Gauss sum closed form", c4_gauss),
        ("Fourier truncation of partial sums", c5_polya),
        ("Dickman function", c6_dickman),
        ("constants B0 and η", c7_constants),
        ("friable harmonic sums", c8_friable),
        ("best rational approximation", c9_rational),
        ("exact identity at α", c10_exact_identity),
        ("structure scan", c11_structure),
        ("distribution tables", c12_distribution),
        ("reproducibility", c13_reproducibility),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut out = std::io::stdout();
    let (mut failed, mut soft) = (0, 0);
    for (i, (name, f)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !filter.is_empty() && !filter.iter().any(|a| a == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let line = f();
        let tag = match line.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::SoftFail => {
                soft += 1;
                "SOFT-FAIL"
            }
        };
        writeln!(
            out,
            "criterion {id:>2} {tag:<9} {name}: {} [{:.1?}]",
            line.detail,
            start.elapsed()
        )
        .unwrap();
        out.flush().unwrap();
    }
    writeln!(
        out,
        "acceptance: {failed} hard failure(s), {soft} soft failure(s)"
    )
    .unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
