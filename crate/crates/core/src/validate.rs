//! Named validation suites.
//!
//! Each suite draws from its own seeded streams, compares measurements with
//! closed forms or oracles, and returns one [`Check`] per comparison.
//! Monte Carlo tolerances are three standard errors computed from the sample
//! counts; fixed tolerances appear only where a quantity is compared with a
//! published reference number.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    classify_formula, estimate_rates, expected_count_planted, histogram_num_sat,
    planted_mean_satisfied, planted_unsat_prob, HistogramConfig, HistogramData, Neighborhood,
    RateMode,
};
use crate::cnf::{num_clauses_unsat, satisfied_literal_count, Assignment, Formula};
use crate::combinatorics::ball_size_exact;
use crate::distributions::{
    sample_assignment_uniform, sample_clause_replace, sample_falsified_clause,
    sample_formula_fixed_m, sample_in_ball_exact, sample_m_at_threshold, sample_planted_clause,
    sample_planted_formula, threshold_density, ThresholdModel,
};
use crate::error::{Error, Result};
use crate::oracle;
use crate::rng::RandomStream;
use crate::search::{branching_node_bound, exhaustive_ball_search, sat_from_small_hd_with_stats};
use crate::solver::{
    alpha_sample_and_test, compute_budgets, compute_threshold, predicted_runtime, ParamOverrides,
    RateEstimates, SolveResult, SolverParams,
};
use crate::stats::{binomial_sigma, Moments};

/// One comparison inside a suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `|observed - expected| <= tolerance`.
    pub fn within(name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) -> Self {
        let passed = (observed - expected).abs() <= tolerance;
        Check {
            name: name.into(),
            observed,
            expected,
            tolerance,
            passed,
            detail: format!("|{observed:.6} - {expected:.6}| <= {tolerance:.6}"),
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            expected: bound,
            tolerance: 0.0,
            passed: observed >= bound,
            detail: format!("{observed:.6} >= {bound:.6}"),
        }
    }

    pub fn greater_than(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            expected: bound,
            tolerance: 0.0,
            passed: observed > bound,
            detail: format!("{observed:.6} > {bound:.6}"),
        }
    }

    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            observed,
            expected: bound,
            tolerance: 0.0,
            passed: observed <= bound,
            detail: format!("{observed:.6} <= {bound:.6}"),
        }
    }

    pub fn exact(name: impl Into<String>, observed: u64, expected: u64) -> Self {
        Check {
            name: name.into(),
            observed: observed as f64,
            expected: expected as f64,
            tolerance: 0.0,
            passed: observed == expected,
            detail: format!("{observed} == {expected}"),
        }
    }
}

/// Extra data a suite hands back for CSV emission.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteData {
    None,
    Histogram(HistogramData),
    Rates(RateEstimates),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Solver results that returned an assignment, all re-verified.
    pub found_verified: u64,
    /// Returned assignments that failed re-verification.
    pub found_failed: u64,
    pub elapsed_ms: f64,
    pub data: SuiteData,
}

impl SuiteReport {
    fn new(suite: Suite, seed: u64) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            seed,
            checks: Vec::new(),
            found_verified: 0,
            found_failed: 0,
            elapsed_ms: 0.0,
            data: SuiteData::None,
        }
    }

    pub fn passed(&self) -> bool {
        self.found_failed == 0 && self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// Re-verifies a solver result independently of the solver's own check.
    fn record(&mut self, f: &Formula, res: &SolveResult) {
        if let Some(a) = res.outcome.assignment() {
            match num_clauses_unsat(f, a) {
                Ok(0) => self.found_verified += 1,
                _ => self.found_failed += 1,
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Falsification,
    PlantedDistance,
    Decomposition,
    ExpectedCount,
    Histogram,
    Rates,
    Poisson,
    OneSided,
    SearchEquivalence,
    PlantedRecovery,
    Mechanism,
    Budgets,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Falsification,
        Suite::PlantedDistance,
        Suite::Decomposition,
        Suite::ExpectedCount,
        Suite::Histogram,
        Suite::Rates,
        Suite::Poisson,
        Suite::OneSided,
        Suite::SearchEquivalence,
        Suite::PlantedRecovery,
        Suite::Mechanism,
        Suite::Budgets,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Falsification => "falsification",
            Suite::PlantedDistance => "planted-distance",
            Suite::Decomposition => "decomposition",
            Suite::ExpectedCount => "expected-count",
            Suite::Histogram => "histogram",
            Suite::Rates => "rates",
            Suite::Poisson => "poisson",
            Suite::OneSided => "one-sided",
            Suite::SearchEquivalence => "search-equivalence",
            Suite::PlantedRecovery => "planted-recovery",
            Suite::Mechanism => "mechanism",
            Suite::Budgets => "budgets",
        }
    }

    /// Fixed stream id so suites never share draws under one seed.
    fn stream_tag(self) -> u64 {
        (Suite::ALL.iter().position(|&s| s == self).unwrap() as u64 + 1) << 40
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Parameter overrides shared by all suites; unset fields keep each suite's
/// defaults. Not every suite reads every field.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub alpha_n: Option<usize>,
    pub threshold: Option<f64>,
    /// Monte Carlo draws per estimate.
    pub samples: Option<u64>,
    /// Independent instances or seeds.
    pub seeds: Option<u64>,
}

/// Runs `suite` with defaults overridden by `opts`.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let stream = RandomStream::new(opts.seed, suite.stream_tag());
    let mut report = SuiteReport::new(suite, opts.seed);
    match suite {
        Suite::Falsification => falsification(opts, stream, &mut report),
        Suite::PlantedDistance => planted_distance(opts, stream, &mut report)?,
        Suite::Decomposition => decomposition(opts, stream, &mut report)?,
        Suite::ExpectedCount => expected_count(opts, stream, &mut report)?,
        Suite::Histogram => histogram(opts, stream, &mut report)?,
        Suite::Rates => rates(opts, stream, &mut report)?,
        Suite::Poisson => poisson(opts, stream, &mut report),
        Suite::OneSided => one_sided(opts, stream, &mut report)?,
        Suite::SearchEquivalence => search_equivalence(opts, stream, &mut report)?,
        Suite::PlantedRecovery => planted_recovery(opts, stream, &mut report)?,
        Suite::Mechanism => mechanism(opts, stream, &mut report)?,
        Suite::Budgets => budgets(opts, stream, &mut report)?,
    }
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn proportion_check(name: String, hits: u64, trials: u64, p: f64) -> Check {
    let sigma = binomial_sigma(p, trials);
    Check::within(name, hits as f64 / trials as f64, p, 3.0 * sigma)
}

/// Uniform clauses against independent uniform assignments: falsified with
/// probability `2^-k`.
fn falsification(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) {
    let n = opts.n.unwrap_or(64);
    let trials = opts.samples.unwrap_or(100_000);
    let ks: Vec<usize> = opts.k.map(|k| vec![k]).unwrap_or_else(|| vec![3, 4, 5]);
    for k in ks {
        let mut rng = stream.child(k as u64).rng();
        let hits = (0..trials)
            .filter(|_| {
                let c = sample_clause_replace(n, k, &mut rng);
                let a = sample_assignment_uniform(n, &mut rng);
                !c.iter().any(|l| l.is_true_under(&a))
            })
            .count() as u64;
        report.push(proportion_check(
            format!("unsat_fraction_k{k}"),
            hits,
            trials,
            (-(k as f64)).exp2(),
        ));
    }
}

fn planted_distance(
    opts: &SuiteOptions,
    stream: RandomStream,
    report: &mut SuiteReport,
) -> Result<()> {
    let n = opts.n.unwrap_or(64);
    let k = opts.k.unwrap_or(4);
    let trials = opts.samples.unwrap_or(100_000);
    let distances: Vec<usize> = match opts.alpha_n {
        Some(d) => vec![d],
        None => [0.1, 0.25, 0.5]
            .iter()
            .map(|a| (a * n as f64).round() as usize)
            .collect(),
    };
    report.push(Check::within(
        "closed_form_alpha_0.25_k4",
        planted_unsat_prob(0.25, 4),
        0.045573,
        5e-7,
    ));
    for d in distances {
        let mut rng = stream.child(d as u64).rng();
        let mut hits = 0u64;
        for _ in 0..trials {
            let a = sample_assignment_uniform(n, &mut rng);
            let c = sample_planted_clause(&a, k, &mut rng);
            let h = sample_in_ball_exact(&a, d, &mut rng)?;
            hits += !c.iter().any(|l| l.is_true_under(&h)) as u64;
        }
        let alpha = d as f64 / n as f64;
        report.push(proportion_check(
            format!("planted_unsat_d{d}_alpha{alpha:.4}"),
            hits,
            trials,
            planted_unsat_prob(alpha, k),
        ));
    }
    Ok(())
}

/// Per-clause statistic of the satisfied-literal count.
#[derive(Clone, Copy)]
enum Statistic {
    UnsatIndicator,
    SatisfiedLiterals,
}

impl Statistic {
    fn name(self) -> &'static str {
        match self {
            Statistic::UnsatIndicator => "unsat_indicator",
            Statistic::SatisfiedLiterals => "satisfied_literals",
        }
    }

    fn apply(self, satisfied: usize) -> f64 {
        match self {
            Statistic::UnsatIndicator => (satisfied == 0) as u8 as f64,
            Statistic::SatisfiedLiterals => satisfied as f64,
        }
    }
}

/// Planted-clause expectation against the weighted difference of the
/// uniform-clause and falsified-clause expectations, all under a uniform
/// assignment at exact distance `alpha_n` from the reference assignment.
fn decomposition(
    opts: &SuiteOptions,
    stream: RandomStream,
    report: &mut SuiteReport,
) -> Result<()> {
    let n = opts.n.unwrap_or(64);
    let k = opts.k.unwrap_or(4);
    let d = opts.alpha_n.unwrap_or(16);
    let trials = opts.samples.unwrap_or(100_000);
    let a = sample_assignment_uniform(n, &mut stream.rng());
    let two_k = (k as f64).exp2();
    for (si, stat) in [Statistic::UnsatIndicator, Statistic::SatisfiedLiterals]
        .into_iter()
        .enumerate()
    {
        let base = stream.child(((si as u64) + 1) << 8);
        let mut planted = Moments::new();
        let mut uniform = Moments::new();
        let mut falsified = Moments::new();
        let mut r_p = base.child(1).rng();
        let mut r_u = base.child(2).rng();
        let mut r_f = base.child(3).rng();
        for _ in 0..trials {
            let c = sample_planted_clause(&a, k, &mut r_p);
            let h = sample_in_ball_exact(&a, d, &mut r_p)?;
            planted.push(stat.apply(satisfied_literal_count(&c, &h)));

            let c = sample_clause_replace(n, k, &mut r_u);
            let h = sample_in_ball_exact(&a, d, &mut r_u)?;
            uniform.push(stat.apply(satisfied_literal_count(&c, &h)));

            let c = sample_falsified_clause(&a, k, &mut r_f);
            let h = sample_in_ball_exact(&a, d, &mut r_f)?;
            falsified.push(stat.apply(satisfied_literal_count(&c, &h)));
        }
        let w_u = two_k / (two_k - 1.0);
        let w_f = 1.0 / (two_k - 1.0);
        let rhs = w_u * uniform.mean() - w_f * falsified.mean();
        let sigma = (planted.std_error().powi(2)
            + (w_u * uniform.std_error()).powi(2)
            + (w_f * falsified.std_error()).powi(2))
        .sqrt();
        report.push(Check::within(
            format!("decomposition_{}", stat.name()),
            planted.mean(),
            rhs,
            3.0 * sigma,
        ));
        if let Statistic::UnsatIndicator = stat {
            report.push(Check::within(
                "planted_unsat_vs_closed_form",
                planted.mean(),
                planted_unsat_prob(d as f64 / n as f64, k),
                3.0 * planted.std_error(),
            ));
        }
    }
    Ok(())
}

fn expected_count(
    opts: &SuiteOptions,
    stream: RandomStream,
    report: &mut SuiteReport,
) -> Result<()> {
    let n = opts.n.unwrap_or(12);
    let k = opts.k.unwrap_or(3);
    let m = opts.m.unwrap_or(20);
    let formulas = opts.seeds.unwrap_or(2000);
    let mut counts = Moments::new();
    for i in 0..formulas {
        let mut rng = stream.child(i).rng();
        let a = sample_assignment_uniform(n, &mut rng);
        let f = sample_planted_formula(&a, m, k, &mut rng);
        counts.push(oracle::count_satisfying(&f)? as f64);
    }
    let expected = expected_count_planted(n, k, m);
    report.push(Check::within(
        format!("mean_solutions_n{n}_k{k}_m{m}"),
        counts.mean(),
        expected,
        3.0 * counts.std_error(),
    ));
    Ok(())
}

fn planted_instance(stream: RandomStream, n: usize, k: usize, m: usize) -> (Assignment, Formula) {
    let mut rng = stream.rng();
    let a = sample_assignment_uniform(n, &mut rng);
    let f = sample_planted_formula(&a, m, k, &mut rng);
    (a, f)
}

fn histogram(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) -> Result<()> {
    let n = opts.n.unwrap_or(16);
    let k = opts.k.unwrap_or(4);
    let m = opts.m.unwrap_or(163);
    let r = opts.alpha_n.unwrap_or(4);
    let seeds = opts.seeds.unwrap_or(20);
    let threshold = opts.threshold.unwrap_or(155.5);
    let mut uniform = Moments::new();
    let mut ball = Moments::new();
    let mut totals_ok = 0u64;
    let ball_size = ball_size_exact(n, r).unwrap_or(0) as u64;
    let mut first = None;
    for i in 0..seeds {
        let inst = stream.child(i);
        let (a, f) = planted_instance(inst, n, k, m);
        let cfg = HistogramConfig {
            stream: inst.child(1 << 20),
            threshold: Some(threshold),
            ..HistogramConfig::default()
        };
        let h = histogram_num_sat(&f, Some(&a), r, &cfg)?;
        uniform.push(h.uniform_mean());
        ball.push(h.ball_mean().expect("planted given"));
        if h.uniform_total() == 1u64 << n && h.ball_total() == Some(ball_size) {
            totals_ok += 1;
        }
        if first.is_none() {
            first = Some(h);
        }
    }
    let uniform_expected = m as f64 * (1.0 - (-(k as f64)).exp2());
    let shell_expected = m as f64 * (1.0 - planted_unsat_prob(r as f64 / n as f64, k));
    report.push(Check::within(
        "uniform_mean_vs_large_n_reference",
        uniform.mean(),
        uniform_expected,
        0.5,
    ));
    report.push(Check::within(
        "uniform_mean_vs_closed_form",
        uniform.mean(),
        planted_mean_satisfied(n, k, m, n),
        0.5,
    ));
    report.push(Check::within(
        "ball_mean_vs_shell_reference",
        ball.mean(),
        shell_expected,
        1.0,
    ));
    report.push(Check::within(
        "ball_mean_vs_ball_closed_form",
        ball.mean(),
        planted_mean_satisfied(n, k, m, r),
        0.5,
    ));
    report.push(Check::at_least(
        "ball_minus_uniform",
        ball.mean() - uniform.mean(),
        2.0,
    ));
    report.push(Check::exact("series_totals_match", totals_ok, seeds));
    if let Some(h) = first {
        report.data = SuiteData::Histogram(h);
    }
    Ok(())
}

fn rates(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) -> Result<()> {
    let n = opts.n.unwrap_or(16);
    let k = opts.k.unwrap_or(4);
    let m = opts.m.unwrap_or(163);
    let r = opts.alpha_n.unwrap_or(4);
    let threshold = opts.threshold.unwrap_or(155.5);
    let (_, f) = planted_instance(stream.child(0), n, k, m);
    let mode = RateMode::Exhaustive {
        bound: oracle::DEFAULT_BRUTE_FORCE_BOUND,
    };
    let base_rate = ball_size_exact(n, r).unwrap() as f64 / (n as f64).exp2();

    let est = estimate_rates(&f, r, threshold, &mode)?;
    let sum = est.p_tp() + est.p_fp() + est.p_fn() + est.p_tn();
    report.push(Check::within("rates_sum_to_one", sum, 1.0, 1e-12));
    report.push(Check::greater_than("p_tp_positive", est.p_tp(), 0.0));
    report.push(Check::greater_than(
        "precision_above_base_rate",
        est.precision(),
        base_rate,
    ));

    let formulaic = compute_threshold(m, k, r as f64 / n as f64);
    let est_f = estimate_rates(&f, r, formulaic, &mode)?;
    report.push(Check::greater_than(
        "formulaic_threshold_precision_above_base_rate",
        est_f.precision(),
        base_rate,
    ));

    let all = estimate_rates(&f, r, 0.0, &mode)?;
    report.push(Check::exact(
        "t0_no_negatives",
        all.false_negative.count + all.true_negative.count,
        0,
    ));
    let none = estimate_rates(&f, r, m as f64 + 1.0, &mode)?;
    report.push(Check::exact(
        "t_above_m_no_positives",
        none.true_positive.count + none.false_positive.count,
        0,
    ));

    // Cost model against measured formula scans (samples plus search nodes).
    let params = forced_params(&f, r, Some(formulaic))?;
    let runs = opts.seeds.unwrap_or(20);
    let scans = Moments::from_iter((0..runs).map(|i| {
        let res = alpha_sample_and_test(&f, &params, stream.child(1 << 24).child(i));
        report.record(&f, &res);
        res.formula_scans() as f64
    }));
    let predicted = predicted_runtime(1.0, &est_f, r, k).total;
    report.push(Check::within(
        "log10_predicted_over_measured_scans",
        (predicted / scans.mean()).log10(),
        0.0,
        1.0,
    ));

    let standard = planted_standard_fraction(n, k, m, r, formulaic, runs, stream.child(1 << 28))?;
    report.push(Check::greater_than(
        "planted_standard_fraction",
        standard,
        0.5,
    ));
    report.data = SuiteData::Rates(est);
    Ok(())
}

fn poisson(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) {
    let k = opts.k.unwrap_or(4);
    let n = opts.n.unwrap_or(100);
    let draws = opts.samples.unwrap_or(10_000);
    let lambda = threshold_density(k) * n as f64;

    let mut rng = stream.child(1).rng();
    let mean = Moments::from_iter((0..draws).map(|_| sample_m_at_threshold(n, k, &mut rng) as f64));
    report.push(Check::within(
        "mean",
        mean.mean(),
        lambda,
        3.0 * (lambda / draws as f64).sqrt(),
    ));

    let mut rng = stream.child(2).rng();
    let big =
        Moments::from_iter((0..10 * draws).map(|_| sample_m_at_threshold(n, k, &mut rng) as f64));
    // Sample variance of a Poisson(lambda) draw has variance about
    // (lambda + 2 lambda^2) / N.
    let var_se = ((lambda + 2.0 * lambda * lambda) / big.count as f64).sqrt() / lambda;
    report.push(Check::within(
        "variance_over_mean",
        big.variance() / big.mean(),
        1.0,
        3.0 * var_se,
    ));

    let tail_n = 2 * n;
    let model = ThresholdModel::new(k);
    let (lo, hi) = model.clause_window(tail_n);
    let mut rng = stream.child(3).rng();
    let inside = (0..draws)
        .map(|_| sample_m_at_threshold(tail_n, k, &mut rng) as f64)
        .filter(|&m| m >= lo && m <= hi)
        .count();
    report.push(Check::at_least(
        format!("window_n{tail_n}"),
        inside as f64 / draws as f64,
        1.0 - model.window_miss_bound(tail_n),
    ));

    // Per-seed generation, as the `gen` command does it.
    let (lo, hi) = ((lambda - n as f64).ceil(), (lambda + n as f64).floor());
    let inside = (0..1000u64)
        .filter(|&s| {
            let m = sample_m_at_threshold(n, k, &mut RandomStream::new(s, 0).rng()) as f64;
            m >= lo && m <= hi
        })
        .count();
    report.push(Check::at_least(
        format!("gen_seeds_within_{lo}_{hi}"),
        inside as f64 / 1000.0,
        0.99,
    ));
}

/// Brute-force-verified unsatisfiable instances from the fixed-`m` model.
pub fn unsat_corpus(
    n: usize,
    k: usize,
    m: usize,
    count: usize,
    stream: RandomStream,
) -> Result<Vec<Formula>> {
    let mut out = Vec::with_capacity(count);
    let mut i = 0u64;
    while out.len() < count {
        let f = sample_formula_fixed_m(n, k, m, &mut stream.child(i).rng());
        i += 1;
        if oracle::brute_force_solve(&f)?.is_none() {
            out.push(f);
        }
        if i > 1000 * count as u64 + 1000 {
            return Err(Error::InvalidParameter(format!(
                "density too low to collect {count} unsatisfiable instances"
            )));
        }
    }
    Ok(out)
}

fn one_sided(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) -> Result<()> {
    let n = opts.n.unwrap_or(14);
    let k = opts.k.unwrap_or(3);
    let m = opts.m.unwrap_or((6.0 * n as f64).round() as usize);
    let instances = opts.seeds.unwrap_or(100) as usize;
    let seeds = opts.samples.unwrap_or(10);
    let radius = opts.alpha_n.unwrap_or(3);
    let corpus = unsat_corpus(n, k, m, instances, stream.child(0))?;
    report.push(Check::exact(
        "corpus_size",
        corpus.len() as u64,
        instances as u64,
    ));

    let mut found_default = 0u64;
    let mut found_main = 0u64;
    let runs = stream.child(1 << 32);
    for (i, f) in corpus.iter().enumerate() {
        let default = SolverParams::derive(f, &ParamOverrides::default())?;
        let main = SolverParams::derive(
            f,
            &ParamOverrides {
                alpha_n: Some(radius),
                k_star: Some(k),
                ..ParamOverrides::default()
            },
        )?;
        for s in 0..seeds {
            let run_stream = RandomStream::new(runs.seed ^ s, runs.stream ^ ((i as u64) << 16));
            let res = alpha_sample_and_test(f, &default, run_stream);
            report.record(f, &res);
            found_default += res.outcome.is_found() as u64;
            let res = alpha_sample_and_test(f, &main, run_stream);
            report.record(f, &res);
            found_main += res.outcome.is_found() as u64;
        }
    }
    report.push(Check::exact(
        "found_on_unsat_default_params",
        found_default,
        0,
    ));
    report.push(Check::exact(
        "found_on_unsat_sample_and_test_path",
        found_main,
        0,
    ));
    Ok(())
}

fn search_equivalence(
    opts: &SuiteOptions,
    stream: RandomStream,
    report: &mut SuiteReport,
) -> Result<()> {
    let cases = opts.seeds.unwrap_or(100);
    let n_max = opts.n.unwrap_or(14);
    let k = opts.k.unwrap_or(3);
    let mut agree = 0u64;
    let mut node_bound_ok = 0u64;
    let mut radius_ok = 0u64;
    let mut found_any = 0u64;
    for case in 0..cases {
        let mut rng = stream.child(case).rng();
        let n = 6 + (case as usize % (n_max - 5));
        let density = [3.0, 4.5, 6.0][case as usize % 3];
        let m = (density * n as f64) as usize;
        let f = sample_formula_fixed_m(n, k, m, &mut rng);
        let v = sample_assignment_uniform(n, &mut rng);
        let radius = case as usize % 4;
        let truth = oracle::brute_force_ball_scan(&f, &v, radius)?.is_some();
        let (hd, stats) = sat_from_small_hd_with_stats(&f, &v, radius);
        let ex = exhaustive_ball_search(&f, &v, radius)?;
        if hd.is_some() == truth && ex.is_some() == truth {
            agree += 1;
        }
        node_bound_ok += (stats.nodes <= branching_node_bound(k, radius)) as u64;
        let within = |a: &Assignment| f.is_satisfied_by(a) && a.distance_to(&v) <= radius;
        radius_ok += (hd.iter().chain(ex.iter()).all(within)) as u64;
        found_any += truth as u64;
    }
    report.push(Check::exact("three_way_agreement", agree, cases));
    report.push(Check::exact("node_bound_respected", node_bound_ok, cases));
    report.push(Check::exact("sound_and_within_radius", radius_ok, cases));
    report.push(Check::greater_than(
        "cases_with_solution",
        found_any as f64,
        0.0,
    ));
    report.push(Check::greater_than(
        "cases_without_solution",
        (cases - found_any) as f64,
        0.0,
    ));
    Ok(())
}

fn forced_params(f: &Formula, alpha_n: usize, threshold: Option<f64>) -> Result<SolverParams> {
    SolverParams::derive(
        f,
        &ParamOverrides {
            alpha_n: Some(alpha_n),
            k_star: Some(f.k()),
            threshold,
            ..ParamOverrides::default()
        },
    )
}

fn planted_recovery(
    opts: &SuiteOptions,
    stream: RandomStream,
    report: &mut SuiteReport,
) -> Result<()> {
    let n = opts.n.unwrap_or(24);
    let k = opts.k.unwrap_or(4);
    let m = opts
        .m
        .unwrap_or((threshold_density(k) * n as f64).ceil() as usize);
    let r = opts.alpha_n.unwrap_or(4);
    let seeds = opts.seeds.unwrap_or(50);
    let mut found = 0u64;
    for i in 0..seeds {
        let (_, f) = planted_instance(stream.child(i), n, k, m);
        let params = forced_params(&f, r, opts.threshold)?;
        let res = alpha_sample_and_test(&f, &params, stream.child(i).child(1 << 24));
        report.record(&f, &res);
        found += res.outcome.is_found() as u64;
    }
    report.push(Check::at_least(
        "success_rate",
        found as f64 / seeds as f64,
        0.9,
    ));
    Ok(())
}

/// Runs the solver on fresh child streams until at least `window` samples
/// have been drawn; returns searches per 1000 samples.
fn searches_per_1000(
    f: &Formula,
    params: &SolverParams,
    stream: RandomStream,
    window: u64,
    report: &mut SuiteReport,
) -> f64 {
    let (mut samples, mut searches) = (0u64, 0u64);
    let mut j = 0;
    while samples < window {
        let res = alpha_sample_and_test(f, params, stream.child(j));
        report.record(f, &res);
        samples += res.samples_used;
        searches += res.searches_triggered;
        j += 1;
    }
    1000.0 * searches as f64 / samples as f64
}

fn mechanism(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) -> Result<()> {
    let n = opts.n.unwrap_or(16);
    let k = opts.k.unwrap_or(4);
    let m = opts.m.unwrap_or(163);
    let r = opts.alpha_n.unwrap_or(4);
    let seeds = opts.seeds.unwrap_or(20);
    let window = opts.samples.unwrap_or(1000);
    let mut fewer = 0u64;
    let mut found = 0u64;
    let mut test_rate = Moments::new();
    let mut base_rate = Moments::new();
    for i in 0..seeds {
        let (_, f) = planted_instance(stream.child(i), n, k, m);
        let run = stream.child(i).child(1 << 24);
        let tested = forced_params(&f, r, opts.threshold)?;
        let always = forced_params(&f, r, Some(0.0))?;
        let first = alpha_sample_and_test(&f, &tested, run.child(0));
        found += first.outcome.is_found() as u64;
        let t = searches_per_1000(&f, &tested, run, window, report);
        let b = searches_per_1000(&f, &always, run, window, report);
        test_rate.push(t);
        base_rate.push(b);
        fewer += (t < b) as u64;
    }
    report.push(Check::at_least(
        "pairs_with_fewer_searches",
        fewer as f64,
        (0.9 * seeds as f64).ceil(),
    ));
    report.push(Check::at_least(
        "tested_success_rate",
        found as f64 / seeds as f64,
        0.9,
    ));
    report.push(Check::at_most(
        "mean_searches_per_1000_tested_vs_baseline",
        test_rate.mean(),
        base_rate.mean(),
    ));
    Ok(())
}

fn budgets(opts: &SuiteOptions, stream: RandomStream, report: &mut SuiteReport) -> Result<()> {
    let n = opts.n.unwrap_or(16);
    let k = opts.k.unwrap_or(4);
    let r = opts.alpha_n.unwrap_or(4);
    let seeds = opts.seeds.unwrap_or(10);
    let b = compute_budgets(n, k, r);
    if (n, k, r) == (16, 4, 4) {
        report.push(Check::exact("sample_budget", b.sample_budget, 9219));
        report.push(Check::within("cap_s", b.cap_s, 2305.57, 0.01));
    }

    let mut instances: Vec<Formula> = (0..seeds)
        .map(|i| planted_instance(stream.child(i), n, k, opts.m.unwrap_or(163)).1)
        .collect();
    // A dense instance exhausts the full sample budget.
    instances.extend(unsat_corpus(n, k, 16 * n, 2, stream.child(1 << 30))?);
    let mut within = 0u64;
    let mut runs = 0u64;
    let mut exhausted = 0u64;
    let mut capped = 0u64;
    for (i, f) in instances.iter().enumerate() {
        // Formulaic, always-positive, and satisfying-only thresholds.
        for threshold in [None, Some(0.0), Some(f.num_clauses() as f64)] {
            let params = forced_params(f, r, threshold)?;
            let res = alpha_sample_and_test(f, &params, stream.child(i as u64).child(1 << 24));
            report.record(f, &res);
            runs += 1;
            let ok = res.samples_used <= params.sample_budget
                && res.searches_triggered <= res.promising
                && res.promising as f64 <= params.cap_s.ceil() + 1.0;
            within += ok as u64;
            exhausted += (res.samples_used == params.sample_budget) as u64;
            capped += matches!(
                res.outcome,
                crate::solver::Outcome::NotFound { cap_abort: true }
            ) as u64;
        }
    }
    report.push(Check::exact("runs_within_budgets", within, runs));
    report.push(Check::greater_than(
        "runs_exhausting_budget",
        exhausted as f64,
        0.0,
    ));
    report.push(Check::greater_than("runs_hitting_cap", capped as f64, 0.0));
    Ok(())
}

/// Fraction of seeded planted instances whose planted assignment is
/// classified standard.
pub fn planted_standard_fraction(
    n: usize,
    k: usize,
    m: usize,
    alpha_n: usize,
    threshold: f64,
    seeds: u64,
    stream: RandomStream,
) -> Result<f64> {
    let mut standard = 0u64;
    for i in 0..seeds {
        let (a, f) = planted_instance(stream.child(i), n, k, m);
        let c = classify_formula(
            &f,
            alpha_n,
            threshold,
            Neighborhood::Ball,
            oracle::DEFAULT_BRUTE_FORCE_BOUND,
        )?;
        standard += c.standard_satisfying_assignments.contains(&a) as u64;
    }
    Ok(standard as f64 / seeds as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn check_constructors() {
        assert!(Check::within("a", 1.0, 1.05, 0.1).passed);
        assert!(!Check::within("a", 1.0, 1.2, 0.1).passed);
        assert!(Check::at_least("b", 2.0, 2.0).passed);
        assert!(!Check::greater_than("c", 2.0, 2.0).passed);
        assert!(Check::exact("d", 3, 3).passed);
    }

    #[test]
    fn small_suites_pass() {
        let opts = SuiteOptions {
            seed: 5,
            samples: Some(20_000),
            ..SuiteOptions::default()
        };
        for s in [
            Suite::Falsification,
            Suite::PlantedDistance,
            Suite::Decomposition,
        ] {
            let r = run_suite(s, &opts).unwrap();
            assert!(r.passed(), "{s}: {:?}", r.checks);
        }
        let r = run_suite(
            Suite::ExpectedCount,
            &SuiteOptions {
                seed: 5,
                seeds: Some(300),
                ..SuiteOptions::default()
            },
        )
        .unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }
}
