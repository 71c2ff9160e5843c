//! Deterministic Hamming-ball searches and the small-k fallback solver.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::combinatorics::ln_ball_size;
use crate::distributions::sample_assignment_uniform;
use crate::error::{Error, Result};
use crate::oracle;

/// Work counters for one search call.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Assignments visited (branching search) or tested (ball scan).
    pub nodes: u64,
    /// Single-clause evaluations performed.
    pub clause_evaluations: u64,
}

impl SearchStats {
    pub fn absorb(&mut self, other: SearchStats) {
        self.nodes += other.nodes;
        self.clause_evaluations += other.clause_evaluations;
    }
}

/// Worst-case node count `sum_{j<=radius} k^j` of the branching search,
/// saturating at `u64::MAX`.
pub fn branching_node_bound(k: usize, radius: usize) -> u64 {
    let mut total: u64 = 0;
    let mut term: u64 = 1;
    for _ in 0..=radius {
        total = total.saturating_add(term);
        term = term.saturating_mul(k as u64);
    }
    total
}

fn first_unsat_counted(f: &Formula, a: &Assignment, evals: &mut u64) -> Option<usize> {
    for (i, c) in f.clauses().enumerate() {
        *evals += 1;
        if !c.iter().any(|l| l.is_true_under(a)) {
            return Some(i);
        }
    }
    None
}

/// Branching search for a satisfying assignment within `radius` flips of `v`.
///
/// At each node the lowest-indexed falsified clause is selected and each of
/// its literals' variables is flipped in clause order, recursing with one
/// less flip available. Complete and sound for the ball of radius `radius`.
pub fn sat_from_small_hd(f: &Formula, v: &Assignment, radius: usize) -> Option<Assignment> {
    sat_from_small_hd_with_stats(f, v, radius).0
}

pub fn sat_from_small_hd_with_stats(
    f: &Formula,
    v: &Assignment,
    radius: usize,
) -> (Option<Assignment>, SearchStats) {
    assert_eq!(v.len(), f.n(), "assignment length must match formula");
    let mut work = v.clone();
    let mut stats = SearchStats::default();
    let found = branch(f, &mut work, radius, &mut stats);
    (found.then_some(work), stats)
}

fn branch(f: &Formula, a: &mut Assignment, radius: usize, stats: &mut SearchStats) -> bool {
    stats.nodes += 1;
    let Some(ci) = first_unsat_counted(f, a, &mut stats.clause_evaluations) else {
        return true;
    };
    if radius == 0 {
        return false;
    }
    for &lit in f.clause(ci) {
        a.flip(lit.var());
        if branch(f, a, radius - 1, stats) {
            return true;
        }
        a.flip(lit.var());
    }
    false
}

/// Tests every assignment within `radius` of `v`, by increasing distance and
/// lexicographic flip set, returning the first satisfying one.
pub fn exhaustive_ball_search(
    f: &Formula,
    v: &Assignment,
    radius: usize,
) -> Result<Option<Assignment>> {
    exhaustive_ball_search_with_stats(f, v, radius).map(|(a, _)| a)
}

pub fn exhaustive_ball_search_with_stats(
    f: &Formula,
    v: &Assignment,
    radius: usize,
) -> Result<(Option<Assignment>, SearchStats)> {
    let n = f.n();
    if radius > n {
        return Err(Error::RadiusTooLarge { radius, n });
    }
    if v.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let mut stats = SearchStats::default();
    let mut found = None;
    for_each_in_ball(v, radius, |a| {
        stats.nodes += 1;
        if first_unsat_counted(f, a, &mut stats.clause_evaluations).is_none() {
            found = Some(a.clone());
            return false;
        }
        true
    });
    Ok((found, stats))
}

/// Visits every assignment within `radius` of `center`, by increasing
/// distance and then lexicographic flip set. Stops when `visit` returns
/// `false`. Requires `radius <= center.len()`.
pub fn for_each_in_ball(
    center: &Assignment,
    radius: usize,
    mut visit: impl FnMut(&Assignment) -> bool,
) {
    for_each_at_distances(center, 0..=radius, &mut visit);
}

/// Like [`for_each_in_ball`] but only at distance exactly `d`.
pub fn for_each_in_shell(
    center: &Assignment,
    d: usize,
    mut visit: impl FnMut(&Assignment) -> bool,
) {
    for_each_at_distances(center, d..=d, &mut visit);
}

fn for_each_at_distances(
    center: &Assignment,
    distances: std::ops::RangeInclusive<usize>,
    visit: &mut impl FnMut(&Assignment) -> bool,
) {
    let n = center.len();
    assert!(*distances.end() <= n, "radius exceeds assignment length");
    let mut work = center.clone();
    for d in distances {
        // Positions of the current d-subset, in increasing order.
        let mut pos: Vec<usize> = (0..d).collect();
        loop {
            for &p in &pos {
                work.flip(p);
            }
            let keep_going = visit(&work);
            for &p in &pos {
                work.flip(p);
            }
            if !keep_going {
                return;
            }
            if !next_combination(&mut pos, n) {
                break;
            }
        }
    }
}

/// Advances `pos` to the next d-subset of `0..n` in lexicographic order.
fn next_combination(pos: &mut [usize], n: usize) -> bool {
    let d = pos.len();
    let mut i = d;
    while i > 0 {
        i -= 1;
        if pos[i] < n - d + i {
            pos[i] += 1;
            for j in i + 1..d {
                pos[j] = pos[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallKConfig {
    /// Number of random restarts; `None` picks `n 2^n / |ball|`, capped at
    /// `max_restarts`.
    pub restarts: Option<u64>,
    pub max_restarts: u64,
    /// Largest `n` for the final exhaustive sweep.
    pub brute_force_bound: usize,
}

impl Default for SmallKConfig {
    fn default() -> Self {
        SmallKConfig {
            restarts: None,
            max_restarts: 100_000,
            brute_force_bound: oracle::DEFAULT_BRUTE_FORCE_BOUND,
        }
    }
}

impl SmallKConfig {
    /// Search radius `ceil(n / (k + 1))` used by each restart.
    pub fn radius(n: usize, k: usize) -> usize {
        n.div_ceil(k + 1)
    }

    pub fn restarts_for(&self, n: usize, k: usize) -> u64 {
        if let Some(r) = self.restarts {
            return r;
        }
        let radius = Self::radius(n, k);
        let ln_ball = ln_ball_size(n, radius);
        let ln_r = (n.max(1) as f64).ln() + n as f64 * std::f64::consts::LN_2 - ln_ball;
        let r = ln_r.exp().ceil();
        if r.is_finite() {
            (r as u64).clamp(1, self.max_restarts)
        } else {
            self.max_restarts
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmallKOutcome {
    Satisfiable(Assignment),
    Unsatisfiable,
    /// Restarts exhausted and `n` above the exhaustive bound. Says nothing
    /// about satisfiability.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallKReport {
    pub outcome: SmallKOutcome,
    pub restarts_used: u64,
    pub exhaustive_sweep: bool,
    pub stats: SearchStats,
}

/// Fallback solver for widths below `k*`: random restarts, each followed by
/// a branching search of radius `ceil(n/(k+1))`, then an exhaustive sweep
/// when `n` is within the configured bound.
pub fn solve_small_k<R: Rng + ?Sized>(
    f: &Formula,
    cfg: &SmallKConfig,
    rng: &mut R,
) -> SmallKReport {
    let n = f.n();
    let radius = SmallKConfig::radius(n, f.k());
    let restarts = cfg.restarts_for(n, f.k());
    let mut stats = SearchStats::default();
    for r in 0..restarts {
        let start = sample_assignment_uniform(n, rng);
        let (found, s) = sat_from_small_hd_with_stats(f, &start, radius);
        stats.absorb(s);
        if let Some(a) = found {
            return SmallKReport {
                outcome: SmallKOutcome::Satisfiable(a),
                restarts_used: r + 1,
                exhaustive_sweep: false,
                stats,
            };
        }
    }
    let outcome = match oracle::brute_force_solve_bounded(f, cfg.brute_force_bound) {
        Ok(Some(a)) => SmallKOutcome::Satisfiable(a),
        Ok(None) => SmallKOutcome::Unsatisfiable,
        Err(_) => SmallKOutcome::Inconclusive,
    };
    let swept = !matches!(outcome, SmallKOutcome::Inconclusive);
    SmallKReport {
        outcome,
        restarts_used: restarts,
        exhaustive_sweep: swept,
        stats,
    }
}
