//! The sample-and-test solver.
//!
//! Uniform assignments are drawn and scored by how many clauses they
//! satisfy. Only those reaching the threshold `T` seed a branching search of
//! radius `alpha_n`. The run gives up once more than `cap_S` assignments have
//! passed the test, or after `sample_budget` draws.
//!
//! Sample `i` is drawn from stream `base ^ i`, so the set of passing indices
//! does not depend on how many workers score samples. The returned
//! assignment is always the one reached from the lowest passing index that
//! leads to success.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::combinatorics::{binomial_exact, ln_binomial};
use crate::distributions::{sample_assignment_uniform, DEFAULT_K_STAR};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::search::{sat_from_small_hd_with_stats, solve_small_k, SmallKConfig, SmallKOutcome};
use crate::stats::wilson_interval;

/// Search radius `floor(n lg(k) / (16 k))`.
pub fn compute_alpha(n: usize, k: usize) -> usize {
    assert!(k >= 2, "k must be at least 2");
    let k = k as f64;
    ((n as f64) * k.log2() / (16.0 * k)).floor() as usize
}

/// Clause-satisfaction threshold `(1 - (1 - (1-alpha)^(2k)) / (2^k - 1)) m`.
pub fn compute_threshold(m: usize, k: usize, alpha: f64) -> f64 {
    let k_i = k as i32;
    let inner = (1.0 - (1.0 - alpha).powi(2 * k_i)) / ((k as f64).exp2() - 1.0);
    (1.0 - inner) * m as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budgets {
    /// `ceil(scale * n^2 2^n / C(n, alpha_n))`, saturating at `u64::MAX`.
    pub sample_budget: u64,
    /// `4 n^3 2^n / (C(n, alpha_n) k^alpha_n) + 1`, compared as a real.
    pub cap_s: f64,
}

/// Sample budget and promising-set cap for the given radius.
pub fn compute_budgets(n: usize, k: usize, alpha_n: usize) -> Budgets {
    compute_budgets_scaled(n, k, alpha_n, 1.0)
}

pub fn compute_budgets_scaled(n: usize, k: usize, alpha_n: usize, scale: f64) -> Budgets {
    let ln_c = ln_binomial(n, alpha_n);
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let nf = n as f64;

    let exact = (scale == 1.0)
        .then(|| exact_sample_budget(n, alpha_n))
        .flatten();
    let sample_budget = exact.unwrap_or_else(|| {
        let ln_b = scale.ln() + 2.0 * nf.ln() + ln2n - ln_c;
        let b = ln_b.exp().ceil();
        if b.is_finite() && b < u64::MAX as f64 {
            b as u64
        } else {
            u64::MAX
        }
    });

    let ln_cap = 4f64.ln() + 3.0 * nf.ln() + ln2n - ln_c - alpha_n as f64 * (k as f64).ln();
    Budgets {
        sample_budget,
        cap_s: ln_cap.exp() + 1.0,
    }
}

fn exact_sample_budget(n: usize, alpha_n: usize) -> Option<u64> {
    let c = binomial_exact(n, alpha_n)?;
    if c == 0 || n >= 128 {
        return None;
    }
    let num = ((n * n) as u128).checked_mul(1u128 << n)?;
    let b = num.div_ceil(c);
    Some(u64::try_from(b).unwrap_or(u64::MAX))
}

/// User-facing knobs; anything left `None` takes its formulaic value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamOverrides {
    pub alpha_n: Option<usize>,
    pub k_star: Option<usize>,
    pub threshold: Option<f64>,
    pub budget_scale: f64,
    pub small_k: SmallKConfig,
}

impl Default for ParamOverrides {
    fn default() -> Self {
        ParamOverrides {
            alpha_n: None,
            k_star: None,
            threshold: None,
            budget_scale: 1.0,
            small_k: SmallKConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub alpha_n: usize,
    pub threshold: f64,
    pub sample_budget: u64,
    pub cap_s: f64,
    pub k_star: usize,
    pub small_k: SmallKConfig,
}

impl SolverParams {
    /// Formulaic parameters for `f`, with `overrides` applied.
    pub fn derive(f: &Formula, overrides: &ParamOverrides) -> Result<Self> {
        let n = f.n();
        let k = f.k();
        if !(overrides.budget_scale > 0.0 && overrides.budget_scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "budget scale must be positive, got {}",
                overrides.budget_scale
            )));
        }
        let alpha_n = match overrides.alpha_n {
            Some(a) => a,
            None if k >= 2 && n >= 1 => compute_alpha(n, k),
            None => 0,
        };
        if alpha_n > n {
            return Err(Error::RadiusTooLarge { radius: alpha_n, n });
        }
        let alpha = if n == 0 {
            0.0
        } else {
            alpha_n as f64 / n as f64
        };
        let threshold = overrides
            .threshold
            .unwrap_or_else(|| compute_threshold(f.num_clauses(), k, alpha));
        let budgets = compute_budgets_scaled(n, k, alpha_n, overrides.budget_scale);
        let params = SolverParams {
            alpha_n,
            threshold,
            sample_budget: budgets.sample_budget,
            cap_s: budgets.cap_s,
            k_star: overrides.k_star.unwrap_or(DEFAULT_K_STAR),
            small_k: overrides.small_k,
        };
        params.validate(f)?;
        Ok(params)
    }

    pub fn validate(&self, f: &Formula) -> Result<()> {
        if self.alpha_n > f.n() {
            return Err(Error::RadiusTooLarge {
                radius: self.alpha_n,
                n: f.n(),
            });
        }
        if !(self.threshold >= 0.0 && self.threshold <= f.num_clauses() as f64) {
            return Err(Error::InvalidParameter(format!(
                "threshold {} outside [0, {}]",
                self.threshold,
                f.num_clauses()
            )));
        }
        if self.sample_budget == 0 {
            return Err(Error::InvalidParameter(
                "sample budget must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// True when an assignment satisfying `satisfied` clauses passes the test.
    #[inline]
    pub fn passes(&self, satisfied: usize) -> bool {
        satisfied as f64 >= self.threshold
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Found {
        assignment: Assignment,
    },
    /// `cap_abort` is set when the run stopped because too many samples
    /// passed the test; the formula may still be satisfiable.
    NotFound {
        cap_abort: bool,
    },
    /// The small-k fallback could neither find a solution nor sweep.
    Inconclusive,
}

impl Outcome {
    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            Outcome::Found { assignment } => Some(assignment),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, Outcome::Found { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    SampleAndTest,
    SmallK,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub path: SolvePath,
    pub samples_used: u64,
    pub searches_triggered: u64,
    /// Number of samples that passed the test (`|S|`).
    pub promising: u64,
    pub clause_evaluations: u64,
    pub search_nodes: u64,
    pub restarts: u64,
    pub wall_time_ms: f64,
}

impl SolveResult {
    fn empty(path: SolvePath) -> Self {
        SolveResult {
            outcome: Outcome::NotFound { cap_abort: false },
            path,
            samples_used: 0,
            searches_triggered: 0,
            promising: 0,
            clause_evaluations: 0,
            search_nodes: 0,
            restarts: 0,
            wall_time_ms: 0.0,
        }
    }

    /// Copy with the wall-clock field zeroed, for replay comparisons.
    pub fn without_timing(mut self) -> Self {
        self.wall_time_ms = 0.0;
        self
    }

    /// Work in whole-formula scans: one per sample plus one per search node.
    pub fn formula_scans(&self) -> u64 {
        self.samples_used + self.search_nodes
    }
}

/// Runs the solver single-threaded. Draws come from `stream.child(i)`.
pub fn alpha_sample_and_test(
    f: &Formula,
    params: &SolverParams,
    stream: RandomStream,
) -> SolveResult {
    run(f, params, stream, 1)
}

/// Same contract as [`alpha_sample_and_test`], scoring samples on `workers`
/// threads. The result equals the single-threaded one apart from timing.
pub fn alpha_sample_and_test_parallel(
    f: &Formula,
    params: &SolverParams,
    stream: RandomStream,
    workers: usize,
) -> Result<SolveResult> {
    if workers <= 1 {
        return Ok(run(f, params, stream, 1));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| run(f, params, stream, workers)))
}

const CHUNK: u64 = 1 << 12;

fn run(f: &Formula, params: &SolverParams, stream: RandomStream, workers: usize) -> SolveResult {
    let start = Instant::now();
    let mut res = if f.k() < params.k_star {
        run_small_k(f, params, stream)
    } else {
        run_sample_and_test(f, params, stream, workers)
    };
    if let Outcome::Found { assignment } = &res.outcome {
        assert!(
            f.is_satisfied_by(assignment),
            "solver returned a non-solution"
        );
    }
    res.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    res
}

fn run_small_k(f: &Formula, params: &SolverParams, stream: RandomStream) -> SolveResult {
    let report = solve_small_k(f, &params.small_k, &mut stream.rng());
    let mut res = SolveResult::empty(SolvePath::SmallK);
    res.restarts = report.restarts_used;
    res.search_nodes = report.stats.nodes;
    res.clause_evaluations = report.stats.clause_evaluations;
    res.searches_triggered = report.restarts_used;
    res.outcome = match report.outcome {
        SmallKOutcome::Satisfiable(a) => Outcome::Found { assignment: a },
        SmallKOutcome::Unsatisfiable => Outcome::NotFound { cap_abort: false },
        SmallKOutcome::Inconclusive => Outcome::Inconclusive,
    };
    res
}

fn draw(n: usize, stream: RandomStream, i: u64) -> Assignment {
    sample_assignment_uniform(n, &mut stream.child(i).rng())
}

fn run_sample_and_test(
    f: &Formula,
    params: &SolverParams,
    stream: RandomStream,
    workers: usize,
) -> SolveResult {
    let n = f.n();
    let m = f.num_clauses() as u64;
    let mut res = SolveResult::empty(SolvePath::SampleAndTest);
    let mut chunk_start = 0u64;
    while chunk_start < params.sample_budget {
        let chunk_end = chunk_start.saturating_add(CHUNK).min(params.sample_budget);
        let passing: Vec<u64> = if workers > 1 {
            (chunk_start..chunk_end)
                .into_par_iter()
                .filter(|&i| params.passes(f.count_satisfied(&draw(n, stream, i))))
                .collect()
        } else {
            (chunk_start..chunk_end)
                .filter(|&i| params.passes(f.count_satisfied(&draw(n, stream, i))))
                .collect()
        };
        for i in passing {
            res.promising += 1;
            if res.promising as f64 > params.cap_s {
                res.samples_used = i + 1;
                res.clause_evaluations += (i + 1 - chunk_start) * m;
                res.outcome = Outcome::NotFound { cap_abort: true };
                return res;
            }
            res.searches_triggered += 1;
            let a = draw(n, stream, i);
            let (found, stats) = sat_from_small_hd_with_stats(f, &a, params.alpha_n);
            res.search_nodes += stats.nodes;
            res.clause_evaluations += stats.clause_evaluations;
            if let Some(assignment) = found {
                res.samples_used = i + 1;
                res.clause_evaluations += (i + 1 - chunk_start) * m;
                res.outcome = Outcome::Found { assignment };
                return res;
            }
        }
        res.clause_evaluations += (chunk_end - chunk_start) * m;
        res.samples_used = chunk_end;
        chunk_start = chunk_end;
    }
    res
}

/// One confusion-matrix cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub count: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Rate {
    fn new(count: u64, total: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(count, total);
        Rate {
            count,
            rate: if total == 0 {
                0.0
            } else {
                count as f64 / total as f64
            },
            ci_low,
            ci_high,
        }
    }
}

/// Test outcome ("positive" = passes the threshold) crossed with closeness to
/// a satisfying assignment ("true" = within `alpha_n`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimates {
    pub true_positive: Rate,
    pub false_positive: Rate,
    pub false_negative: Rate,
    pub true_negative: Rate,
    pub total: u64,
    pub exhaustive: bool,
    /// Closeness was judged against a single planted solution only.
    pub surrogate_labels: bool,
}

impl RateEstimates {
    pub fn from_counts(
        tp: u64,
        fp: u64,
        fn_: u64,
        tn: u64,
        exhaustive: bool,
        surrogate_labels: bool,
    ) -> Self {
        let total = tp + fp + fn_ + tn;
        RateEstimates {
            true_positive: Rate::new(tp, total),
            false_positive: Rate::new(fp, total),
            false_negative: Rate::new(fn_, total),
            true_negative: Rate::new(tn, total),
            total,
            exhaustive,
            surrogate_labels,
        }
    }

    pub fn p_tp(&self) -> f64 {
        self.true_positive.rate
    }

    pub fn p_fp(&self) -> f64 {
        self.false_positive.rate
    }

    pub fn p_fn(&self) -> f64 {
        self.false_negative.rate
    }

    pub fn p_tn(&self) -> f64 {
        self.true_negative.rate
    }

    /// `p_TP / (p_TP + p_FP)`: fraction of positives that are close.
    pub fn precision(&self) -> f64 {
        let pos = self.true_positive.count + self.false_positive.count;
        if pos == 0 {
            0.0
        } else {
            self.true_positive.count as f64 / pos as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Rate)> {
        [
            ("p_tp", &self.true_positive),
            ("p_fp", &self.false_positive),
            ("p_fn", &self.false_negative),
            ("p_tn", &self.true_negative),
        ]
        .into_iter()
    }
}

/// Terms of the sample-and-test cost model
/// `M / p_TP + k^(alpha n) + (p_FP / p_TP) k^(alpha n)`, in units of `M`'s
/// cost measure (a search node costs one unit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimePrediction {
    pub sampling: f64,
    pub true_search: f64,
    pub false_positive_search: f64,
    pub total: f64,
    pub diagnostic: Option<String>,
}

pub fn predicted_runtime(
    membership_cost: f64,
    rates: &RateEstimates,
    alpha_n: usize,
    k: usize,
) -> RuntimePrediction {
    let search = (k as f64).powi(alpha_n as i32);
    let p_tp = rates.p_tp();
    if p_tp <= 0.0 {
        return RuntimePrediction {
            sampling: f64::INFINITY,
            true_search: search,
            false_positive_search: f64::INFINITY,
            total: f64::INFINITY,
            diagnostic: Some("true-positive rate is zero; cost is unbounded".into()),
        };
    }
    let sampling = membership_cost / p_tp;
    let fp = rates.p_fp() / p_tp * search;
    RuntimePrediction {
        sampling,
        true_search: search,
        false_positive_search: fp,
        total: sampling + search + fp,
        diagnostic: None,
    }
}
