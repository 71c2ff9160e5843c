//! Benchmark sweep over planted instances.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{estimate_rates, RateMode};
use crate::distributions::{sample_assignment_uniform, sample_planted_formula, threshold_density};
use crate::error::{Error, Result};
use crate::rng::RandomStream;
use crate::solver::{
    alpha_sample_and_test_parallel, predicted_runtime, Outcome, ParamOverrides, SolvePath,
    SolverParams,
};

/// Threshold used for a benchmark run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchMode {
    /// Formulaic (or overridden) threshold.
    Test,
    /// Threshold 0: every sample is searched.
    AlwaysPositive,
}

impl fmt::Display for BenchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BenchMode::Test => "test",
            BenchMode::AlwaysPositive => "always-positive",
        })
    }
}

impl FromStr for BenchMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "test" => Ok(BenchMode::Test),
            "always-positive" => Ok(BenchMode::AlwaysPositive),
            _ => Err(Error::InvalidParameter(format!("unknown bench mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub n_step: usize,
    pub k: usize,
    /// Clause density; defaults to the threshold density for `k`.
    pub density: Option<f64>,
    /// Instances per `n`.
    pub instances: u64,
    pub seed: u64,
    pub modes: Vec<BenchMode>,
    pub overrides: ParamOverrides,
    pub workers: usize,
    /// Largest `n` for which exhaustive rates feed the predicted cost.
    pub predict_bound: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_min: 12,
            n_max: 20,
            n_step: 2,
            k: 4,
            density: None,
            instances: 5,
            seed: 0,
            modes: vec![BenchMode::Test, BenchMode::AlwaysPositive],
            overrides: ParamOverrides::default(),
            workers: 1,
            predict_bound: 22,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    pub instance: u64,
    pub mode: BenchMode,
    pub alpha_n: usize,
    pub k_star: usize,
    pub threshold: f64,
    pub sample_budget: u64,
    pub cap_s: f64,
    pub path: SolvePath,
    pub found: bool,
    pub cap_abort: bool,
    pub samples_used: u64,
    pub searches_triggered: u64,
    pub promising: u64,
    pub clause_evaluations: u64,
    pub search_nodes: u64,
    pub formula_scans: u64,
    /// Cost-model prediction in formula scans; NaN above `predict_bound`.
    pub predicted_scans: f64,
    pub wall_ms: f64,
}

/// Stream of instance `instance` at size `n`; the solver uses its child
/// `1 << 24`, so both modes see the same draws.
pub fn instance_stream(seed: u64, n: usize, instance: u64) -> RandomStream {
    RandomStream::new(seed, n as u64).child(instance)
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.n_min == 0 || cfg.n_max < cfg.n_min || cfg.n_step == 0 {
        return Err(Error::InvalidParameter("empty n range".into()));
    }
    let density = cfg.density.unwrap_or_else(|| threshold_density(cfg.k));
    let mut rows = Vec::new();
    for n in (cfg.n_min..=cfg.n_max).step_by(cfg.n_step) {
        let m = (density * n as f64).ceil() as usize;
        for instance in 0..cfg.instances {
            let stream = instance_stream(cfg.seed, n, instance);
            let mut rng = stream.rng();
            let planted = sample_assignment_uniform(n, &mut rng);
            let f = sample_planted_formula(&planted, m, cfg.k, &mut rng);
            for &mode in &cfg.modes {
                let mut overrides = cfg.overrides.clone();
                if mode == BenchMode::AlwaysPositive {
                    overrides.threshold = Some(0.0);
                }
                let params = SolverParams::derive(&f, &overrides)?;
                let res = alpha_sample_and_test_parallel(
                    &f,
                    &params,
                    stream.child(1 << 24),
                    cfg.workers,
                )?;
                let predicted_scans =
                    if n <= cfg.predict_bound && res.path == SolvePath::SampleAndTest {
                        let mode = RateMode::Exhaustive {
                            bound: cfg.predict_bound,
                        };
                        let rates = estimate_rates(&f, params.alpha_n, params.threshold, &mode)?;
                        predicted_runtime(1.0, &rates, params.alpha_n, cfg.k).total
                    } else {
                        f64::NAN
                    };
                log::debug!(
                    "n={n} instance={instance} mode={mode} found={}",
                    res.outcome.is_found()
                );
                rows.push(BenchRow {
                    n,
                    k: cfg.k,
                    m,
                    seed: cfg.seed,
                    instance,
                    mode,
                    alpha_n: params.alpha_n,
                    k_star: params.k_star,
                    threshold: params.threshold,
                    sample_budget: params.sample_budget,
                    cap_s: params.cap_s,
                    path: res.path,
                    found: res.outcome.is_found(),
                    cap_abort: matches!(res.outcome, Outcome::NotFound { cap_abort: true }),
                    samples_used: res.samples_used,
                    searches_triggered: res.searches_triggered,
                    promising: res.promising,
                    clause_evaluations: res.clause_evaluations,
                    search_nodes: res.search_nodes,
                    formula_scans: res.formula_scans(),
                    predicted_scans,
                    wall_ms: res.wall_time_ms,
                });
            }
        }
    }
    Ok(rows)
}
