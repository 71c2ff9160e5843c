//! `ksat`: generate, solve, verify, validate and benchmark random k-SAT
//! instances.

mod config;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ksat_core::bench::{run_bench, BenchConfig, BenchMode};
use ksat_core::dimacs::{read_dimacs_with, write_dimacs, ReadOptions, WidthPolicy};
use ksat_core::distributions::{
    sample_assignment_uniform, sample_formula_fixed_m, sample_m_at_threshold,
    sample_planted_formula, threshold_density,
};
use ksat_core::search::SmallKConfig;
use ksat_core::solver::{alpha_sample_and_test_parallel, Outcome};
use ksat_core::validate::{run_suite, Suite, SuiteData, SuiteOptions, SuiteReport};
use ksat_core::{
    num_clauses_unsat, Assignment, Formula, ParamOverrides, RandomStream, SolveResult, SolverParams,
};

use config::Config;

/// Environment variable holding the default seed.
const SEED_ENV: &str = "KSAT_SEED";

const EXIT_OK: u8 = 0;
const EXIT_NOT_FOUND: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "ksat",
    version,
    about = "Random k-SAT sample-and-test workbench"
)]
struct Cli {
    /// Flat key = value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instances as DIMACS files.
    Gen(GenArgs),
    /// Run the solver on a DIMACS file and print a JSON result.
    Solve(SolveArgs),
    /// Check an assignment against a DIMACS file.
    Verify(VerifyArgs),
    /// Run a validation suite (or `all`).
    Validate(ValidateArgs),
    /// Sweep n on planted instances and emit CSV.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GenMode {
    FixedM,
    ThresholdPoisson,
    Planted,
}

impl std::str::FromStr for GenMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <GenMode as ValueEnum>::from_str(s, true)
    }
}

impl GenMode {
    fn name(self) -> &'static str {
        match self {
            GenMode::FixedM => "fixed-m",
            GenMode::ThresholdPoisson => "threshold-poisson",
            GenMode::Planted => "planted",
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    mode: Option<GenMode>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Clause count; required for fixed-m, defaults to ceil(d_k n) when planted.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    count: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct SolverFlags {
    #[arg(long)]
    alpha_n: Option<usize>,
    #[arg(long)]
    k_star: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Multiplier on the sample budget.
    #[arg(long)]
    budget_scale: Option<f64>,
    /// Fixed restart count for the small-k path.
    #[arg(long)]
    restarts: Option<u64>,
    /// Largest n for the exhaustive backstop on the small-k path.
    #[arg(long)]
    brute_force_bound: Option<usize>,
}

const SOLVER_KEYS: &[&str] = &[
    "alpha-n",
    "k-star",
    "threshold",
    "budget-scale",
    "restarts",
    "brute-force-bound",
];

impl SolverFlags {
    fn overrides(&self, cfg: &Config) -> Result<ParamOverrides> {
        let defaults = SmallKConfig::default();
        Ok(ParamOverrides {
            alpha_n: cfg.pick(self.alpha_n, "alpha-n")?,
            k_star: cfg.pick(self.k_star, "k-star")?,
            threshold: cfg.pick(self.threshold, "threshold")?,
            budget_scale: cfg.pick(self.budget_scale, "budget-scale")?.unwrap_or(1.0),
            small_k: SmallKConfig {
                restarts: cfg.pick(self.restarts, "restarts")?,
                brute_force_bound: cfg
                    .pick(self.brute_force_bound, "brute-force-bound")?
                    .unwrap_or(defaults.brute_force_bound),
                ..defaults
            },
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Accept clauses of mixed width.
    #[arg(long)]
    tolerant: bool,
    /// Also write the JSON result here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct VerifyArgs {
    file: PathBuf,
    /// Bit string (`0101...`) or a JSON result from `solve`.
    assignment: PathBuf,
    #[arg(long)]
    tolerant: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite name, or `all`.
    suite: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha_n: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Monte Carlo draws per estimate.
    #[arg(long)]
    samples: Option<u64>,
    /// Number of instances or seeds.
    #[arg(long)]
    seeds: Option<u64>,
    /// n=16, k=4, m=163, radius 4.
    #[arg(long, alias = "fig1")]
    reference_regime: bool,
    /// Directory for CSV and JSON output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    n_step: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    instances: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: test, always-positive.
    #[arg(long)]
    modes: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    predict_bound: Option<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_OK });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Gen(a) => cmd_gen(a, &cfg),
        Command::Solve(a) => cmd_solve(a, &cfg),
        Command::Verify(a) => cmd_verify(a),
        Command::Validate(a) => cmd_validate(a, &cfg),
        Command::Bench(a) => cmd_bench(a, &cfg),
    }
}

/// Flag, then config, then `KSAT_SEED`, then 0.
fn resolve_seed(flag: Option<u64>, cfg: &Config) -> Result<u64> {
    if let Some(s) = cfg.pick(flag, "seed")? {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV}={v:?} is not an unsigned integer")),
        Err(_) => Ok(0),
    }
}

fn read_formula(path: &Path, tolerant: bool) -> Result<Formula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let opts = ReadOptions {
        width: if tolerant {
            WidthPolicy::Tolerant
        } else {
            WidthPolicy::Strict
        },
        k: None,
    };
    read_dimacs_with(&text, opts).with_context(|| format!("parsing {}", path.display()))
}

fn cmd_gen(a: GenArgs, cfg: &Config) -> Result<u8> {
    cfg.check_keys(&["mode", "n", "k", "m", "seed", "count", "out"])?;
    let mode = cfg.pick(a.mode, "mode")?.context("--mode is required")?;
    let n: usize = cfg.pick(a.n, "n")?.context("--n is required")?;
    let k: usize = cfg.pick(a.k, "k")?.context("--k is required")?;
    let m: Option<usize> = cfg.pick(a.m, "m")?;
    let seed = resolve_seed(a.seed, cfg)?;
    let count: u64 = cfg.pick(a.count, "count")?.unwrap_or(1);
    let out: PathBuf = cfg
        .pick(a.out, "out")?
        .unwrap_or_else(|| PathBuf::from("."));
    if n == 0 || k == 0 {
        bail!("n and k must be positive");
    }
    if mode == GenMode::FixedM && m.is_none() {
        bail!("--m is required for fixed-m");
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    for i in 0..count {
        let mut rng = RandomStream::new(seed, 0).child(i).rng();
        let stem = format!("{}_n{n}_k{k}_s{seed}_{i:04}", mode.name());
        let formula = match mode {
            GenMode::FixedM => sample_formula_fixed_m(n, k, m.unwrap(), &mut rng),
            GenMode::ThresholdPoisson => {
                let m = sample_m_at_threshold(n, k, &mut rng);
                sample_formula_fixed_m(n, k, m, &mut rng)
            }
            GenMode::Planted => {
                let m = m.unwrap_or_else(|| (threshold_density(k) * n as f64).ceil() as usize);
                let planted = sample_assignment_uniform(n, &mut rng);
                let f = sample_planted_formula(&planted, m, k, &mut rng);
                let sidecar = out.join(format!("{stem}.sol"));
                fs::write(&sidecar, format!("{}\n", planted.to_bit_string()))
                    .with_context(|| format!("writing {}", sidecar.display()))?;
                f
            }
        };
        let path = out.join(format!("{stem}.cnf"));
        fs::write(&path, write_dimacs(&formula))
            .with_context(|| format!("writing {}", path.display()))?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn cmd_solve(a: SolveArgs, cfg: &Config) -> Result<u8> {
    let mut known = vec!["seed", "workers"];
    known.extend_from_slice(SOLVER_KEYS);
    cfg.check_keys(&known)?;
    let f = read_formula(&a.file, a.tolerant)?;
    let seed = resolve_seed(a.seed, cfg)?;
    let workers: usize = cfg.pick(a.workers, "workers")?.unwrap_or(1);
    let params = SolverParams::derive(&f, &a.solver.overrides(cfg)?)?;
    log::info!(
        "n={} m={} k={} alpha_n={} T={:.3} budget={} cap={:.2}",
        f.n(),
        f.num_clauses(),
        f.k(),
        params.alpha_n,
        params.threshold,
        params.sample_budget,
        params.cap_s
    );
    let res = alpha_sample_and_test_parallel(&f, &params, RandomStream::new(seed, 0), workers)?;
    let json = serde_json::to_string_pretty(&SolveOutput {
        file: &a.file,
        seed,
        params: &params,
        result: &res,
    })?;
    println!("{json}");
    if let Some(path) = &a.out {
        fs::write(path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(match res.outcome {
        Outcome::Found { .. } => EXIT_OK,
        Outcome::NotFound { .. } => EXIT_NOT_FOUND,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    file: &'a Path,
    seed: u64,
    params: &'a SolverParams,
    result: &'a SolveResult,
}

/// Reads an assignment from a bit-string file or from `solve` JSON output.
fn read_assignment(path: &Path) -> Result<Option<Assignment>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trimmed = text.trim();
    if trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed).context("parsing JSON result")?;
        let outcome = v.get("result").and_then(|r| r.get("outcome")).unwrap_or(&v);
        let outcome: Outcome =
            serde_json::from_value(outcome.clone()).context("reading outcome")?;
        return Ok(outcome.assignment().cloned());
    }
    Ok(Some(Assignment::from_bit_string(trimmed)?))
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let f = read_formula(&a.file, a.tolerant)?;
    let Some(assignment) = read_assignment(&a.assignment)? else {
        println!("no assignment");
        return Ok(EXIT_NOT_FOUND);
    };
    let unsat = num_clauses_unsat(&f, &assignment)?;
    println!("unsatisfied_clauses={unsat}");
    Ok(if unsat == 0 { EXIT_OK } else { EXIT_NOT_FOUND })
}

fn cmd_validate(a: ValidateArgs, cfg: &Config) -> Result<u8> {
    cfg.check_keys(&[
        "seed",
        "n",
        "k",
        "m",
        "alpha-n",
        "threshold",
        "samples",
        "seeds",
        "out",
    ])?;
    let suites: Vec<Suite> = if a.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse()?]
    };
    let mut opts = SuiteOptions {
        seed: resolve_seed(a.seed, cfg)?,
        n: cfg.pick(a.n, "n")?,
        k: cfg.pick(a.k, "k")?,
        m: cfg.pick(a.m, "m")?,
        alpha_n: cfg.pick(a.alpha_n, "alpha-n")?,
        threshold: cfg.pick(a.threshold, "threshold")?,
        samples: cfg.pick(a.samples, "samples")?,
        seeds: cfg.pick(a.seeds, "seeds")?,
    };
    if a.reference_regime {
        opts.n = Some(16);
        opts.k = Some(4);
        opts.m = Some(163);
        opts.alpha_n = Some(4);
    }
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    if let Some(dir) = &out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut all_passed = true;
    for suite in suites {
        let report = run_suite(suite, &opts)?;
        for c in &report.checks {
            println!(
                "{suite:<20} {:<4} {:<48} {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        if report.found_failed > 0 {
            println!(
                "{suite:<20} FAIL {} returned assignments failed re-verification",
                report.found_failed
            );
        }
        println!(
            "{suite:<20} {} ({:.1} ms)",
            if report.passed() { "PASS" } else { "FAIL" },
            report.elapsed_ms
        );
        all_passed &= report.passed();
        if let Some(dir) = &out {
            write_report(dir, &report)?;
        }
    }
    Ok(if all_passed { EXIT_OK } else { EXIT_NOT_FOUND })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    suite: &'a str,
    seed: u64,
    name: &'a str,
    observed: f64,
    expected: f64,
    tolerance: f64,
    passed: bool,
    detail: &'a str,
}

fn write_report(dir: &Path, report: &SuiteReport) -> Result<()> {
    let path = dir.join(format!("{}.csv", report.suite));
    let mut w =
        csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for c in &report.checks {
        w.serialize(CheckRow {
            suite: &report.suite,
            seed: report.seed,
            name: &c.name,
            observed: c.observed,
            expected: c.expected,
            tolerance: c.tolerance,
            passed: c.passed,
            detail: &c.detail,
        })?;
    }
    w.flush()?;
    let json = dir.join(format!("{}.json", report.suite));
    fs::write(&json, serde_json::to_string_pretty(report)?)?;

    match &report.data {
        SuiteData::Histogram(h) => {
            let path = dir.join(format!("{}_counts.csv", report.suite));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["satisfied", "uniform", "ball"])?;
            for (s, u) in h.uniform.iter().enumerate() {
                let b = h
                    .ball
                    .as_ref()
                    .map(|b| b[s].to_string())
                    .unwrap_or_default();
                w.write_record([s.to_string(), u.to_string(), b])?;
            }
            w.flush()?;
        }
        SuiteData::Rates(r) => {
            let path = dir.join(format!("{}_confusion.csv", report.suite));
            let mut w = csv::Writer::from_path(&path)?;
            w.write_record(["rate", "count", "value", "ci_low", "ci_high"])?;
            for (name, rate) in r.iter() {
                w.write_record([
                    name.to_string(),
                    rate.count.to_string(),
                    rate.rate.to_string(),
                    rate.ci_low.to_string(),
                    rate.ci_high.to_string(),
                ])?;
            }
            w.flush()?;
        }
        SuiteData::None => {}
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs, cfg: &Config) -> Result<u8> {
    let mut known = vec![
        "n-min",
        "n-max",
        "n-step",
        "k",
        "density",
        "instances",
        "seed",
        "modes",
        "workers",
        "predict-bound",
        "out",
    ];
    known.extend_from_slice(SOLVER_KEYS);
    cfg.check_keys(&known)?;
    let d = BenchConfig::default();
    let modes: Option<String> = cfg.pick(a.modes, "modes")?;
    let modes = match modes {
        Some(s) => s
            .split(',')
            .map(|m| m.trim().parse::<BenchMode>())
            .collect::<Result<Vec<_>, _>>()?,
        None => d.modes,
    };
    let bc = BenchConfig {
        n_min: cfg.pick(a.n_min, "n-min")?.unwrap_or(d.n_min),
        n_max: cfg.pick(a.n_max, "n-max")?.unwrap_or(d.n_max),
        n_step: cfg.pick(a.n_step, "n-step")?.unwrap_or(d.n_step),
        k: cfg.pick(a.k, "k")?.unwrap_or(d.k),
        density: cfg.pick(a.density, "density")?,
        instances: cfg.pick(a.instances, "instances")?.unwrap_or(d.instances),
        seed: resolve_seed(a.seed, cfg)?,
        modes,
        overrides: a.solver.overrides(cfg)?,
        workers: cfg.pick(a.workers, "workers")?.unwrap_or(d.workers),
        predict_bound: cfg
            .pick(a.predict_bound, "predict-bound")?
            .unwrap_or(d.predict_bound),
    };
    let rows = run_bench(&bc)?;
    let out: Option<PathBuf> = cfg.pick(a.out, "out")?;
    let sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}
