//! `charsum`: scans of large quadratic character sums and the reports built
//! on them.
//!
//! Exit status: 0 when every hard assertion holds, 1 when only soft
//! assertions fail, 2 on errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use charsum_core::arith::{smoothness_sieve, FundamentalDiscriminant};
use charsum_core::charsum::{max_partial_sum, normalized_m, partial_sum_at};
use charsum_core::dataset::DatasetFile;
use charsum_core::dickman::{b0_constant, build_cached, eta_constant, CACHE_ENV};
use charsum_core::exec::{with_threads, Execution};
use charsum_core::polya::{gauss_closed_form, polya_rhs, s_yz_max};
use charsum_core::verify::{
    attach_structure, check_thm11, check_thm12, check_thm13, check_thm14, psi, scan, Config,
    DiscriminantRecord, Family, Outcome, TheoremReport,
};
use charsum_core::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "charsum",
    version,
    about = "Large quadratic character sums over fundamental discriminants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

const DEFAULT_PSI_TAUS: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 2.5];

#[derive(Subcommand)]
enum Command {
    /// Scan every fundamental discriminant up to x and write the dataset.
    Scan {
        #[command(flatten)]
        config: ConfigArgs,
        /// CSV output; the sidecar goes to <out>.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Distribution of m(χ_d) over a family; --tau lists the thresholds (default 0.5,1,1.5,2,2.5).
    Psi {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "odd")]
        family: Family,
        /// JSON output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Statistical checks of the structure theorems.
    Verify {
        #[command(flatten)]
        source: Source,
        /// 1.1, 1.2, 1.3, 1.4 or all.
        #[arg(long, default_value = "all")]
        theorem: String,
        /// Points β for the partial-sum checks, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "0,0.25,0.5")]
        beta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the Dickman function and its integral.
    Dickman {
        /// Evaluate ρ and P here.
        #[arg(long)]
        eval: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        u_max: f64,
        #[arg(long, default_value_t = 1e-4)]
        h: f64,
        /// Write the binary table here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a partial sum with its truncated Fourier expansion.
    PolyaDemo {
        #[arg(long, allow_hyphen_values = true)]
        d: i64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Truncation length; defaults to |d|².
        #[arg(long)]
        z: Option<f64>,
        #[arg(long, default_value_t = 2.0)]
        tau: f64,
        #[arg(long = "C", default_value_t = 2.0)]
        offset: f64,
        #[arg(long, default_value_t = 1 << 16)]
        grid: usize,
    },
}

/// Flags that make up a [`Config`]; unset flags keep their defaults.
#[derive(Args, Clone, Default)]
struct ConfigArgs {
    #[arg(long)]
    x: Option<u64>,
    /// τ; `psi` reads a comma-separated list of thresholds here instead.
    #[arg(long, value_delimiter = ',')]
    tau: Vec<f64>,
    /// Offset C in y = e^{τ+C} (odd characters).
    #[arg(long = "C")]
    offset_odd: Option<f64>,
    /// Offset c in y = e^{√3τ+c} (even characters).
    #[arg(long = "c")]
    offset_even: Option<f64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    dmax: Option<u32>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn overlay(&self, mut c: Config) -> Result<Config, Error> {
        if let Some(v) = self.x {
            c.x = v;
        }
        match self.tau[..] {
            [] => {}
            [v] => c.tau = v,
            _ => {
                return Err(Error::InvalidArgument(
                    "--tau takes a single value here".into(),
                ))
            }
        }
        if let Some(v) = self.offset_odd {
            c.offset_odd = v;
        }
        if let Some(v) = self.offset_even {
            c.offset_even = v;
        }
        if self.z.is_some() {
            c.z = self.z;
        }
        if let Some(v) = self.grid {
            c.grid = v;
        }
        if self.dmax.is_some() {
            c.dmax = self.dmax;
        }
        if let Some(v) = self.budget {
            c.budget = v;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }

    fn config(&self) -> Result<Config, Error> {
        let x = self
            .x
            .ok_or_else(|| Error::InvalidArgument("--x is required without --dataset".into()))?;
        let c = self.overlay(Config::new(x))?;
        c.validate()?;
        Ok(c)
    }
}

/// Records come from a dataset file or from a fresh scan.
#[derive(Args, Clone)]
struct Source {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

impl Source {
    fn load(&self) -> Result<(Config, Vec<DiscriminantRecord>), Error> {
        match &self.dataset {
            Some(path) => {
                let file = DatasetFile::read(path)?;
                let requested = self.config.overlay(file.config.clone())?;
                file.config.ensure_compatible(&requested)?;
                let mut records = file.records;
                with_threads(requested.threads, || {
                    attach_structure(&mut records, &requested, Execution::Parallel)
                })?;
                Ok((requested, records))
            }
            None => {
                let config = self.config.config()?;
                let records = with_threads(config.threads, || scan(&config, Execution::Parallel))?;
                Ok((config, records))
            }
        }
    }
}

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Error> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.6}"))
}

fn print_report(r: &TheoremReport) {
    println!(
        "theorem {}  x = {}  τ = {}  population = {}",
        r.theorem, r.x, r.tau, r.population
    );
    for m in &r.measured {
        println!("  {:<32} {}", m.name, fmt_opt(m.value));
    }
    for s in &r.statistics {
        println!(
            "  {:<32} n = {:<6} median = {:<12} max = {:<12} (÷ {:.4})",
            s.name,
            s.count,
            fmt_opt(s.median),
            fmt_opt(s.max),
            s.normalizer
        );
    }
    for (kind, list) in [("hard", &r.hard), ("soft", &r.soft)] {
        for a in list {
            let status = if a.passed { "pass" } else { "FAIL" };
            println!(
                "  [{kind} {status}] {} = {} (threshold {})",
                a.name,
                fmt_opt(a.measured),
                a.threshold
            );
        }
    }
    for n in &r.notes {
        println!("  note: {n}");
    }
}

fn run(cli: Cli) -> Result<Outcome, Error> {
    match cli.command {
        Command::Scan { config, out } => {
            let config = config.config()?;
            let records = with_threads(config.threads, || scan(&config, Execution::Parallel))?;
            let file = DatasetFile::new(config, records);
            let side = file.write(&out)?;
            println!("wrote {} rows to {}", file.records.len(), out.display());
            println!("sidecar {}", side.display());
            println!("{}", file.checksum);
            Ok(Outcome::Pass)
        }
        Command::Psi {
            mut source,
            family,
            out,
        } => {
            // --tau is the threshold grid here; m(χ_d) does not depend on τ
            let mut taus = std::mem::take(&mut source.config.tau);
            if taus.is_empty() {
                taus = DEFAULT_PSI_TAUS.to_vec();
            }
            let (config, records) = source.load()?;
            let table = psi(&records, config.x, family, &taus)?;
            println!(
                "x = {}  family = {:?}  size = {}",
                table.x, table.family, table.size
            );
            println!(
                "{:>8} {:>8} {:>12} {:>12} {:>12}",
                "tau", "count", "psi", "lower", "upper"
            );
            for r in &table.rows {
                println!(
                    "{:>8} {:>8} {:>12.6} {:>12} {:>12}",
                    r.tau,
                    r.count,
                    r.psi,
                    fmt_opt(r.lower),
                    fmt_opt(r.upper)
                );
            }
            if let Some(path) = out {
                write_json(&path, &json!({ "config": config, "table": table }))?;
            }
            Ok(Outcome::Pass)
        }
        Command::Verify {
            source,
            theorem,
            beta,
            out,
        } => {
            let which: Vec<&str> = match theorem.as_str() {
                "all" => vec!["1.1", "1.2", "1.3", "1.4"],
                t @ ("1.1" | "1.2" | "1.3" | "1.4") => vec![t],
                t => return Err(Error::InvalidArgument(format!("unknown theorem {t:?}"))),
            };
            let (config, records) = source.load()?;
            let needs_table = which.iter().any(|t| *t == "1.2" || *t == "1.4");
            let table = if needs_table {
                Some(build_cached(
                    config.dickman_u_max,
                    config.dickman_h,
                    cache_dir().as_deref(),
                )?)
            } else {
                None
            };
            let mut reports = Vec::new();
            for t in which {
                let report = with_threads(config.threads, || -> Result<TheoremReport, Error> {
                    match t {
                        "1.1" => Ok(check_thm11(&records, &config)),
                        "1.2" => check_thm12(
                            &records,
                            &config,
                            &beta,
                            table.as_ref().unwrap(),
                            Execution::Parallel,
                        ),
                        "1.3" => check_thm13(&records, &config),
                        _ => check_thm14(&records, &config, &beta, table.as_ref().unwrap()),
                    }
                })?;
                print_report(&report);
                reports.push(report);
            }
            if let Some(path) = out {
                write_json(&path, &reports)?;
            }
            let worst = reports
                .iter()
                .map(|r| r.outcome())
                .fold(Outcome::Pass, |acc, o| match (acc, o) {
                    (Outcome::HardFailure, _) | (_, Outcome::HardFailure) => Outcome::HardFailure,
                    (Outcome::SoftFailure, _) | (_, Outcome::SoftFailure) => Outcome::SoftFailure,
                    _ => Outcome::Pass,
                });
            Ok(worst)
        }
        Command::Dickman {
            eval,
            u_max,
            h,
            out,
        } => {
            let table = build_cached(u_max, h, cache_dir().as_deref())?;
            println!("u_max = {}  h = {}", table.u_max(), table.h());
            println!(
                "B0 = {:.10}  eta = {:.10}",
                b0_constant(1e-8)?.value,
                eta_constant()
            );
            for t in eval {
                let r = table.rho(t);
                let p = table.p_of_u(t);
                let flag = if r.clamped || p.clamped {
                    "  (clamped)"
                } else {
                    ""
                };
                println!("rho({t}) = {:.12}  P({t}) = {:.12}{flag}", r.value, p.value);
            }
            if let Some(path) = out {
                let f = std::fs::File::create(&path)?;
                table.write_to(std::io::BufWriter::new(f))?;
                println!("wrote {}", path.display());
            }
            Ok(Outcome::Pass)
        }
        Command::PolyaDemo {
            d,
            beta,
            z,
            tau,
            offset,
            grid,
        } => {
            let d = FundamentalDiscriminant::new(d)?;
            let q = d.modulus() as f64;
            let z = z.unwrap_or(q * q);
            let direct = partial_sum_at(d, beta)?;
            let rhs = polya_rhs(d, beta, z)?;
            let (max_sum, argmax) = max_partial_sum(d);
            println!(
                "d = {}  parity = {}  G = {}",
                d.get(),
                d.parity(),
                gauss_closed_form(d)
            );
            println!("M = {max_sum}  N = {argmax}  m = {:.9}", normalized_m(d));
            println!(
                "S(β|d|) = {direct}  truncated expansion = {:.6}  (z = {z})",
                rhs.re
            );
            println!("difference = {:.6}", (direct as f64 - rhs.re).abs());
            let y = (tau + offset).exp();
            let zz = (q.max(y + 1.0)).ceil();
            let lpf = smoothness_sieve(zz as u64)?;
            let bound = s_yz_max(d, y, zz, grid, charsum_core::polya::MEMBERSHIP_SLACK, &lpf)?;
            println!(
                "S_(y,z) <= {:.6}  (y = {y:.3}, z = {zz}, grid {}, slack {:.4})",
                bound.value, bound.grid, bound.slack
            );
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::SoftFailure) => ExitCode::from(1),
        Ok(Outcome::HardFailure) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
