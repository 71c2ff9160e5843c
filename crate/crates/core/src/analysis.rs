//! Closed-form predictions and exhaustive measurements that the solver's
//! behaviour is checked against: planted solution counts, planted-clause
//! falsification, confusion rates of the threshold test, satisfied-clause
//! histograms and the promising/stuffed/standard classification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Formula};
use crate::combinatorics::{compensated_sum, ln_ball_size, ln_binomial, ln_sum_exp};
use crate::distributions::{sample_assignment_uniform, sample_in_ball_exact};
use crate::error::{Error, Result};
use crate::oracle::{self, for_each_assignment, IndexSet};
use crate::rng::RandomStream;
use crate::search::{for_each_in_ball, for_each_in_shell};
use crate::solver::RateEstimates;

/// Probability that an assignment at relative distance `alpha` from the
/// planted assignment falsifies a planted clause: `(1 - (1-alpha)^k) / (2^k - 1)`.
pub fn planted_unsat_prob(alpha: f64, k: usize) -> f64 {
    (1.0 - (1.0 - alpha).powi(k as i32)) / ((k as f64).exp2() - 1.0)
}

/// Mean satisfied-clause count of a planted formula over the radius-`r` ball
/// around the planted assignment, averaging the falsification probability over
/// distances. With `r = n` this is the mean over all assignments.
pub fn planted_mean_satisfied(n: usize, k: usize, m: usize, r: usize) -> f64 {
    let r = r.min(n);
    let shift = ln_binomial(n, r.min(n / 2));
    let weight = |d: usize| (ln_binomial(n, d) - shift).exp();
    let num =
        compensated_sum((0..=r).map(|d| weight(d) * planted_unsat_prob(d as f64 / n as f64, k)));
    let den = compensated_sum((0..=r).map(weight));
    m as f64 * (1.0 - num / den)
}

/// `ln` of the expected satisfying-assignment count of a planted formula.
pub fn ln_expected_count_planted(n: usize, k: usize, m: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let p = planted_unsat_prob(i as f64 / n as f64, k);
            let survive = if m == 0 {
                0.0
            } else if p >= 1.0 {
                f64::NEG_INFINITY
            } else {
                m as f64 * (-p).ln_1p()
            };
            ln_binomial(n, i) + survive
        })
        .collect();
    ln_sum_exp(&terms)
}

/// Expected number of satisfying assignments of a planted formula,
/// `sum_i C(n,i) (1 - (1 - (1 - i/n)^k) / (2^k - 1))^m`.
pub fn expected_count_planted(n: usize, k: usize, m: usize) -> f64 {
    ln_expected_count_planted(n, k, m).exp()
}

/// `ln` of `2^n (1 - 2^-k)^m`.
pub fn ln_support_ratio(m: usize, n: usize, k: usize) -> f64 {
    n as f64 * std::f64::consts::LN_2 + m as f64 * (-(-(k as f64)).exp2()).ln_1p()
}

/// Ratio of planted-support size to random-support size,
/// `2^n (1 - 2^-k)^m`.
pub fn support_ratio(m: usize, n: usize, k: usize) -> f64 {
    ln_support_ratio(m, n, k).exp()
}

/// How the "close to a solution" label is obtained.
#[derive(Clone, Debug)]
pub enum RateMode {
    /// Every assignment, labelled against the full solution set.
    Exhaustive { bound: usize },
    /// `samples` uniform assignments, labelled by distance to one known
    /// planted solution. Undercounts true positives.
    MonteCarlo {
        planted: Assignment,
        samples: u64,
        stream: RandomStream,
    },
}

/// Confusion rates of the test "satisfies at least `threshold` clauses"
/// against "within `alpha_n` of a satisfying assignment".
pub fn estimate_rates(
    f: &Formula,
    alpha_n: usize,
    threshold: f64,
    mode: &RateMode,
) -> Result<RateEstimates> {
    let mut counts = [0u64; 4]; // tp, fp, fn, tn
    let mut tally = |positive: bool, close: bool| {
        let idx = match (positive, close) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        counts[idx] += 1;
    };
    match mode {
        RateMode::Exhaustive { bound } => {
            let close = oracle::satisfying_set(f, *bound)?.dilate(alpha_n);
            for_each_assignment(f.n(), |idx, a| {
                tally(
                    f.count_satisfied(a) as f64 >= threshold,
                    close.contains(idx),
                );
                true
            });
            let [tp, fp, fn_, tn] = counts;
            Ok(RateEstimates::from_counts(tp, fp, fn_, tn, true, false))
        }
        RateMode::MonteCarlo {
            planted,
            samples,
            stream,
        } => {
            if planted.len() != f.n() {
                return Err(Error::LengthMismatch {
                    expected: f.n(),
                    found: planted.len(),
                });
            }
            let mut rng = stream.rng();
            for _ in 0..*samples {
                let a = sample_assignment_uniform(f.n(), &mut rng);
                tally(
                    f.count_satisfied(&a) as f64 >= threshold,
                    a.distance_to(planted) <= alpha_n,
                );
            }
            let [tp, fp, fn_, tn] = counts;
            Ok(RateEstimates::from_counts(tp, fp, fn_, tn, false, true))
        }
    }
}

/// Satisfied-clause counts, bucketed `0..=m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramData {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub alpha_n: usize,
    pub threshold: Option<f64>,
    pub seed: Option<u64>,
    /// Counts over uniform assignments.
    pub uniform: Vec<u64>,
    pub uniform_exhaustive: bool,
    /// Counts over the radius-`alpha_n` ball around the planted assignment.
    pub ball: Option<Vec<u64>>,
    pub ball_exhaustive: bool,
}

/// Mean bucket index of a histogram series.
pub fn series_mean(series: &[u64]) -> f64 {
    let total: u64 = series.iter().sum();
    if total == 0 {
        return f64::NAN;
    }
    series
        .iter()
        .enumerate()
        .map(|(i, &c)| i as f64 * c as f64)
        .sum::<f64>()
        / total as f64
}

impl HistogramData {
    pub fn uniform_mean(&self) -> f64 {
        series_mean(&self.uniform)
    }

    pub fn ball_mean(&self) -> Option<f64> {
        self.ball.as_deref().map(series_mean)
    }

    pub fn uniform_total(&self) -> u64 {
        self.uniform.iter().sum()
    }

    pub fn ball_total(&self) -> Option<u64> {
        self.ball.as_ref().map(|b| b.iter().sum())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HistogramConfig {
    /// Largest `n` whose uniform series is enumerated exactly.
    pub exhaustive_bound: usize,
    /// Largest ball enumerated exactly.
    pub ball_limit: u64,
    /// Draws per sampled series.
    pub samples: u64,
    pub stream: RandomStream,
    pub threshold: Option<f64>,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            exhaustive_bound: 24,
            ball_limit: 1 << 24,
            samples: 1 << 20,
            stream: RandomStream::new(0, 0),
            threshold: None,
        }
    }
}

/// Histogram of satisfied-clause counts over uniform assignments and, when
/// `planted` is given, over the ball of radius `alpha_n` around it.
pub fn histogram_num_sat(
    f: &Formula,
    planted: Option<&Assignment>,
    alpha_n: usize,
    cfg: &HistogramConfig,
) -> Result<HistogramData> {
    let n = f.n();
    let m = f.num_clauses();
    if alpha_n > n {
        return Err(Error::RadiusTooLarge { radius: alpha_n, n });
    }
    let mut uniform = vec![0u64; m + 1];
    let uniform_exhaustive = n <= cfg.exhaustive_bound && n <= 63;
    if uniform_exhaustive {
        for_each_assignment(n, |_, a| {
            uniform[f.count_satisfied(a)] += 1;
            true
        });
    } else {
        let mut rng = cfg.stream.rng();
        for _ in 0..cfg.samples {
            uniform[f.count_satisfied(&sample_assignment_uniform(n, &mut rng))] += 1;
        }
    }

    let mut ball_exhaustive = false;
    let ball = match planted {
        None => None,
        Some(p) => {
            if p.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
            let mut series = vec![0u64; m + 1];
            let ln_size = ln_ball_size(n, alpha_n);
            if ln_size <= (cfg.ball_limit as f64).ln() {
                ball_exhaustive = true;
                for_each_in_ball(p, alpha_n, |a| {
                    series[f.count_satisfied(a)] += 1;
                    true
                });
            } else {
                let mut rng = cfg.stream.child(1).rng();
                for _ in 0..cfg.samples {
                    let a = sample_in_ball(p, alpha_n, &mut rng);
                    series[f.count_satisfied(&a)] += 1;
                }
            }
            Some(series)
        }
    };

    Ok(HistogramData {
        n,
        k: f.k(),
        m,
        alpha_n,
        threshold: cfg.threshold,
        seed: Some(cfg.stream.seed),
        uniform,
        uniform_exhaustive,
        ball,
        ball_exhaustive,
    })
}

/// Uniform member of the radius-`r` ball: distance `i` with probability
/// `C(n,i) / |ball|`, then a uniform point at that distance.
fn sample_in_ball<R: Rng + ?Sized>(center: &Assignment, r: usize, rng: &mut R) -> Assignment {
    let n = center.len();
    let ln_total = ln_ball_size(n, r);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut d = r;
    for i in 0..=r {
        acc += (ln_binomial(n, i) - ln_total).exp();
        if u < acc {
            d = i;
            break;
        }
    }
    sample_in_ball_exact(center, d, rng).expect("distance within range")
}

/// Neighbourhood used when deciding whether a solution is standard.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Neighborhood {
    /// All assignments within distance `alpha_n`.
    #[default]
    Ball,
    /// Only assignments at distance exactly `alpha_n`.
    Shell,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormulaClassification {
    /// Assignments satisfying at least `T` clauses.
    pub promising_count: u64,
    /// `4 n^3 2^n / (C(n, alpha_n) k^alpha_n)`.
    pub stuffing_cap: f64,
    pub is_stuffed: bool,
    /// Satisfying assignments with at least half their neighbourhood promising.
    pub standard_satisfying_assignments: Vec<Assignment>,
    /// Number of satisfying assignments.
    pub f_count: u64,
    pub neighborhood: Neighborhood,
}

impl FormulaClassification {
    pub fn is_hollow(&self) -> bool {
        !self.is_stuffed
    }
}

/// `4 n^3 2^n / (C(n, alpha_n) k^alpha_n)`, the promising-count limit that
/// separates stuffed from hollow formulas.
pub fn stuffing_cap(n: usize, k: usize, alpha_n: usize) -> f64 {
    let nf = n as f64;
    (4f64.ln() + 3.0 * nf.ln() + nf * std::f64::consts::LN_2
        - ln_binomial(n, alpha_n)
        - alpha_n as f64 * (k as f64).ln())
    .exp()
}

pub fn classify_formula(
    f: &Formula,
    alpha_n: usize,
    threshold: f64,
    neighborhood: Neighborhood,
    bound: usize,
) -> Result<FormulaClassification> {
    let n = f.n();
    if alpha_n > n {
        return Err(Error::RadiusTooLarge { radius: alpha_n, n });
    }
    let solutions = oracle::satisfying_set(f, bound)?;
    let mut promising = IndexSet::new(n);
    for_each_assignment(n, |idx, a| {
        if f.count_satisfied(a) as f64 >= threshold {
            promising.insert(idx);
        }
        true
    });
    let promising_count = promising.len();
    let cap = stuffing_cap(n, f.k(), alpha_n);

    let mut standard = Vec::new();
    for idx in solutions.iter() {
        let center = Assignment::from_index(idx, n);
        let (mut hits, mut size) = (0u64, 0u64);
        let mut visit = |a: &Assignment| {
            size += 1;
            hits += promising.contains(a.to_index().expect("n <= 63")) as u64;
            true
        };
        match neighborhood {
            Neighborhood::Ball => for_each_in_ball(&center, alpha_n, &mut visit),
            Neighborhood::Shell => for_each_in_shell(&center, alpha_n, &mut visit),
        }
        if 2 * hits >= size {
            standard.push(center);
        }
    }

    Ok(FormulaClassification {
        promising_count,
        stuffing_cap: cap,
        is_stuffed: promising_count as f64 > cap,
        standard_satisfying_assignments: standard,
        f_count: solutions.len(),
        neighborhood,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_formula_fixed_m, sample_planted_formula};

    #[test]
    fn planted_mean_satisfied_values() {
        assert!((planted_mean_satisfied(16, 4, 163, 4) - 156.034_506_837_877_44).abs() < 1e-9);
        assert!((planted_mean_satisfied(16, 4, 163, 16) - 153.074_814_860_026_04).abs() < 1e-9);
        assert!((planted_mean_satisfied(16, 4, 163, 0) - 163.0).abs() < 1e-12);
    }

    #[test]
    fn planted_unsat_prob_values() {
        assert_eq!(planted_unsat_prob(0.0, 4), 0.0);
        assert!((planted_unsat_prob(0.25, 4) - 0.045_572_916_666_666_664).abs() < 1e-15);
        for k in 1..10 {
            assert!((planted_unsat_prob(1.0, k) - 1.0 / ((1u64 << k) - 1) as f64).abs() < 1e-15);
        }
        for k in 2..8 {
            let mut prev = -1.0;
            for i in 0..=20 {
                let p = planted_unsat_prob(i as f64 / 20.0, k);
                assert!(p > prev);
                prev = p;
                if i > 0 {
                    assert!(planted_unsat_prob(i as f64 / 20.0, k + 1) < p);
                }
            }
        }
    }

    #[test]
    fn expected_count_values() {
        assert!((expected_count_planted(10, 3, 0) - 1024.0).abs() < 1e-9);
        assert!((expected_count_planted(1, 1, 1) - 1.0).abs() < 1e-12);
        // Direct-space sum in f64 as an independent evaluation.
        let direct: f64 = (0..=12)
            .map(|i| {
                let p = planted_unsat_prob(i as f64 / 12.0, 3);
                crate::combinatorics::binomial_exact(12, i).unwrap() as f64 * (1.0 - p).powi(20)
            })
            .sum();
        assert!((expected_count_planted(12, 3, 20) - direct).abs() < 1e-9 * direct);
        assert!((direct - 344.529_983_318_642_85).abs() < 1e-6);
        let mut prev = f64::INFINITY;
        for m in 0..200 {
            let v = expected_count_planted(16, 4, m);
            assert!(v <= prev + 1e-9);
            prev = v;
        }
        // Stays finite where the direct form overflows.
        assert!(ln_expected_count_planted(2000, 5, 60_000).is_finite());
    }

    #[test]
    fn support_ratio_values() {
        assert!((support_ratio(0, 7, 3) - 128.0).abs() < 1e-9);
        assert!((support_ratio(1, 2, 2) - 3.0).abs() < 1e-12);
        let mut rng = RandomStream::new(1, 0).rng();
        for _ in 0..100 {
            let m = rng.random_range(0..5000);
            let n = rng.random_range(1..300);
            let k = rng.random_range(1..12);
            let bound = n as f64 * std::f64::consts::LN_2 - m as f64 / (k as f64).exp2();
            assert!(ln_support_ratio(m, n, k) <= bound + 1e-9);
        }
    }

    #[test]
    fn support_ratio_by_enumeration() {
        // n=2, k=2: all 16 clauses, 4 assignments. Planted pairs (a, clause)
        // with a satisfying the clause, over all clauses.
        let n = 2;
        let mut pairs = 0;
        for c0 in 0..4u32 {
            for c1 in 0..4u32 {
                let clause = [
                    crate::cnf::Literal::from_code(c0),
                    crate::cnf::Literal::from_code(c1),
                ];
                for idx in 0..4 {
                    let a = Assignment::from_index(idx, n);
                    if clause.iter().any(|l| l.is_true_under(&a)) {
                        pairs += 1;
                    }
                }
            }
        }
        assert!((pairs as f64 / 16.0 - support_ratio(1, 2, 2)).abs() < 1e-12);
    }

    #[test]
    fn rate_extremes() {
        let mut rng = RandomStream::new(2, 0).rng();
        let a = sample_assignment_uniform(10, &mut rng);
        let f = sample_planted_formula(&a, 40, 3, &mut rng);
        let mode = RateMode::Exhaustive { bound: 20 };
        let all_pos = estimate_rates(&f, 2, 0.0, &mode).unwrap();
        assert_eq!(
            all_pos.false_negative.count + all_pos.true_negative.count,
            0
        );
        let none_pos = estimate_rates(&f, 2, 41.0, &mode).unwrap();
        assert_eq!(
            none_pos.true_positive.count + none_pos.false_positive.count,
            0
        );
        for r in [all_pos, none_pos] {
            assert_eq!(r.total, 1024);
            let s = r.p_tp() + r.p_fp() + r.p_fn() + r.p_tn();
            assert_eq!(s, 1.0);
        }
        let mc = estimate_rates(
            &f,
            2,
            35.0,
            &RateMode::MonteCarlo {
                planted: a,
                samples: 5000,
                stream: RandomStream::new(2, 1),
            },
        )
        .unwrap();
        assert!(mc.surrogate_labels && !mc.exhaustive);
        assert_eq!(mc.total, 5000);
        assert!(matches!(
            estimate_rates(
                &Formula::new(30, 3),
                1,
                0.0,
                &RateMode::Exhaustive { bound: 26 }
            ),
            Err(Error::OverBound { .. })
        ));
    }

    #[test]
    fn histogram_empty_formula() {
        let f = Formula::new(6, 3);
        let h = histogram_num_sat(&f, None, 1, &HistogramConfig::default()).unwrap();
        assert_eq!(h.uniform, vec![64]);
        assert!(h.ball.is_none());
    }

    #[test]
    fn histogram_totals() {
        let mut rng = RandomStream::new(3, 0).rng();
        let a = sample_assignment_uniform(16, &mut rng);
        let f = sample_planted_formula(&a, 163, 4, &mut rng);
        let h = histogram_num_sat(&f, Some(&a), 4, &HistogramConfig::default()).unwrap();
        assert_eq!(h.uniform_total(), 65_536);
        assert_eq!(h.ball_total(), Some(2517));
        assert!(h.ball.as_ref().unwrap()[163] >= 1);
    }

    #[test]
    fn sampled_histogram_paths() {
        let mut rng = RandomStream::new(4, 0).rng();
        let a = sample_assignment_uniform(40, &mut rng);
        let f = sample_planted_formula(&a, 100, 3, &mut rng);
        let cfg = HistogramConfig {
            samples: 2000,
            ball_limit: 100,
            ..HistogramConfig::default()
        };
        let h = histogram_num_sat(&f, Some(&a), 5, &cfg).unwrap();
        assert!(!h.uniform_exhaustive && !h.ball_exhaustive);
        assert_eq!(h.uniform_total(), 2000);
        assert_eq!(h.ball_total(), Some(2000));
        assert!(h.ball_mean().unwrap() > h.uniform_mean());
    }

    #[test]
    fn ball_sampler_distance_law() {
        // n=6, r=2: distance 0,1,2 with weights 1, 6, 15.
        let c = Assignment::new(6);
        let mut rng = RandomStream::new(5, 0).rng();
        let mut counts = [0u64; 3];
        let draws = 44_000;
        for _ in 0..draws {
            counts[sample_in_ball(&c, 2, &mut rng).count_ones()] += 1;
        }
        for (d, w) in [(0usize, 1.0), (1, 6.0), (2, 15.0)] {
            let p = w / 22.0;
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((counts[d] as f64 / draws as f64 - p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn classification_extremes() {
        let f = sample_formula_fixed_m(8, 3, 10, &mut RandomStream::new(6, 0).rng());
        let all = classify_formula(&f, 1, 0.0, Neighborhood::Ball, 20).unwrap();
        assert_eq!(all.promising_count, 256);
        assert_eq!(all.f_count, oracle::count_satisfying(&f).unwrap());
        assert_eq!(
            all.standard_satisfying_assignments.len() as u64,
            all.f_count
        );
        let none = classify_formula(&f, 1, 11.0, Neighborhood::Shell, 20).unwrap();
        assert_eq!(none.promising_count, 0);
        assert!(none.is_hollow());
        assert!(none.standard_satisfying_assignments.is_empty());
    }

    #[test]
    fn stuffed_when_everything_promising() {
        // n=16, k=4, radius 4: cap ~2304.6, far below 2^16. Unit clauses
        // (written as repeated literals) pin 12 variables.
        assert!((stuffing_cap(16, 4, 4) - 2_304.562_637_362_637).abs() < 1e-6);
        let units = (0..12).map(|v| [crate::cnf::Literal::positive(v); 4]);
        let f = Formula::from_clauses(16, 4, units).unwrap();
        let c = classify_formula(&f, 4, 0.0, Neighborhood::Ball, 20).unwrap();
        assert!(c.is_stuffed);
    }
}
