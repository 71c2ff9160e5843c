//! Samplers for the random, at-threshold and planted k-CNF distributions,
//! plus the threshold-density model used to size `m`.
//!
//! Every sampler takes an explicit generator; pass `RandomStream::rng()` to
//! get draws that are a pure function of `(parameters, seed, stream id)`.

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::cnf::{Assignment, Clause, Formula, Literal};
use crate::error::{Error, Result};
use crate::oracle;

/// Default `k*` cutoff below which the sample-and-test solver delegates to
/// the small-k fallback.
pub const DEFAULT_K_STAR: usize = 60;

/// Closed-form approximation of the satisfiability threshold density,
/// `2^k ln 2 - (1 + ln 2) / 2` clauses per variable.
pub fn threshold_density(k: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    (k as f64).exp2() * ln2 - 0.5 * (1.0 + ln2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdModel {
    pub k: usize,
    pub d_k_approx: f64,
    pub k_star: usize,
}

impl ThresholdModel {
    pub fn new(k: usize) -> Self {
        ThresholdModel {
            k,
            d_k_approx: threshold_density(k),
            k_star: DEFAULT_K_STAR,
        }
    }

    pub fn with_k_star(mut self, k_star: usize) -> Self {
        self.k_star = k_star;
        self
    }

    /// Mean clause count `d_k n` at the threshold.
    pub fn mean_clauses(&self, n: usize) -> f64 {
        self.d_k_approx * n as f64
    }

    /// `[(d_k - 1) n, (d_k + 1) n]`, the clause-count window the analysis
    /// works inside.
    pub fn clause_window(&self, n: usize) -> (f64, f64) {
        let n = n as f64;
        ((self.d_k_approx - 1.0) * n, (self.d_k_approx + 1.0) * n)
    }

    /// Upper bound `2 * 2^(-n / (3 ln2 2^k))` on the probability that a
    /// Poisson clause count falls outside [`Self::clause_window`].
    pub fn window_miss_bound(&self, n: usize) -> f64 {
        let denom = 3.0 * std::f64::consts::LN_2 * (self.k as f64).exp2();
        2.0 * (-(n as f64) / denom).exp2()
    }
}

/// One clause with each of its `k` literals drawn independently and
/// uniformly from the `2n` literals.
pub fn sample_clause_replace<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Clause {
    assert!(n >= 1 || k == 0, "cannot draw literals over zero variables");
    let codes = 2 * n as u32;
    (0..k)
        .map(|_| Literal::from_code(rng.random_range(0..codes)))
        .collect()
}

/// `m` independent with-replacement clauses.
pub fn sample_formula_fixed_m<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    m: usize,
    rng: &mut R,
) -> Formula {
    let mut f = Formula::with_capacity(n, k, m);
    for _ in 0..m {
        let c = sample_clause_replace(n, k, rng);
        f.push(&c).expect("sampled clause is well formed");
    }
    f
}

/// Poisson draw with mean `d_k n`.
pub fn sample_m_at_threshold<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> usize {
    let mean = threshold_density(k) * n as f64;
    sample_poisson(mean, rng)
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    dist.sample(rng) as usize
}

/// A formula at the threshold: Poisson clause count, then fixed-`m` draw.
pub fn sample_formula_at_threshold<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Formula {
    let m = sample_m_at_threshold(n, k, rng);
    sample_formula_fixed_m(n, k, m, rng)
}

/// Uniform clause among those satisfied by `a`, by rejection from the
/// with-replacement distribution.
pub fn sample_planted_clause<R: Rng + ?Sized>(a: &Assignment, k: usize, rng: &mut R) -> Clause {
    assert!(k >= 1, "width-0 clauses cannot be satisfied");
    let n = a.len();
    loop {
        let c = sample_clause_replace(n, k, rng);
        if c.iter().any(|l| l.is_true_under(a)) {
            return c;
        }
    }
}

/// Uniform clause among those falsified by `a`: each literal is drawn
/// uniformly from the `n` literals that `a` makes false.
pub fn sample_falsified_clause<R: Rng + ?Sized>(a: &Assignment, k: usize, rng: &mut R) -> Clause {
    let n = a.len();
    (0..k)
        .map(|_| {
            let var = rng.random_range(0..n);
            Literal::new(var, a.get(var))
        })
        .collect()
}

/// `m` independent planted clauses; `a` satisfies the result.
pub fn sample_planted_formula<R: Rng + ?Sized>(
    a: &Assignment,
    m: usize,
    k: usize,
    rng: &mut R,
) -> Formula {
    let mut f = Formula::with_capacity(a.len(), k, m);
    for _ in 0..m {
        let c = sample_planted_clause(a, k, rng);
        f.push(&c).expect("sampled clause is well formed");
    }
    f
}

/// Uniform assignment: every bit an independent fair coin.
pub fn sample_assignment_uniform<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Assignment {
    let words = (0..n.div_ceil(64)).map(|_| rng.next_u64()).collect();
    Assignment::from_words(n, words)
}

/// Uniform assignment at Hamming distance exactly `d` from `center`.
pub fn sample_in_ball_exact<R: Rng + ?Sized>(
    center: &Assignment,
    d: usize,
    rng: &mut R,
) -> Result<Assignment> {
    let n = center.len();
    if d > n {
        return Err(Error::RadiusTooLarge { radius: d, n });
    }
    let mut out = center.clone();
    for i in index::sample(rng, n, d) {
        out.flip(i);
    }
    Ok(out)
}

/// Draws from the fixed-`m` distribution until a satisfiable formula appears,
/// using the brute-force oracle as the filter. Only usable at oracle scale.
/// Returns `None` if `max_tries` draws are all unsatisfiable.
pub fn sample_satisfiable_formula<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    m: usize,
    max_tries: usize,
    rng: &mut R,
) -> Result<Option<Formula>> {
    for _ in 0..max_tries {
        let f = sample_formula_fixed_m(n, k, m, rng);
        if oracle::brute_force_solve(&f)?.is_some() {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{eval_clause, hamming_distance, num_clauses_unsat};
    use crate::rng::RandomStream;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::collections::HashMap;

    /// Chi-square goodness-of-fit against a uniform law over `cells` outcomes,
    /// checked at the 0.999 quantile.
    fn assert_uniform(counts: &HashMap<Vec<u32>, u64>, cells: usize, draws: u64) {
        assert_eq!(counts.len(), cells, "support size");
        let expected = draws as f64 / cells as f64;
        let stat: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        let crit = ChiSquared::new((cells - 1) as f64)
            .unwrap()
            .inverse_cdf(0.999);
        assert!(stat < crit, "chi2 {stat} >= {crit}");
    }

    fn codes(c: &[Literal]) -> Vec<u32> {
        c.iter().map(|l| l.code()).collect()
    }

    #[test]
    fn threshold_density_values() {
        // Reference values from the closed form in extended precision.
        assert!((threshold_density(4) - 10.243_781_298_679_153).abs() < 1e-12);
        assert!((threshold_density(3) - 4.698_603_854_199_59).abs() < 1e-12);
        for k in 2..30 {
            assert!(threshold_density(k + 1) > threshold_density(k));
        }
    }

    #[test]
    fn replace_clause_n1_k1() {
        let mut rng = RandomStream::new(1, 0).rng();
        let mut counts = HashMap::new();
        for _ in 0..10_000 {
            *counts
                .entry(codes(&sample_clause_replace(1, 1, &mut rng)))
                .or_insert(0) += 1;
        }
        assert_uniform(&counts, 2, 10_000);
    }

    #[test]
    fn replace_clause_n2_k2() {
        let mut rng = RandomStream::new(2, 0).rng();
        let mut counts = HashMap::new();
        for _ in 0..100_000 {
            *counts
                .entry(codes(&sample_clause_replace(2, 2, &mut rng)))
                .or_insert(0) += 1;
        }
        assert_uniform(&counts, 16, 100_000);
    }

    #[test]
    fn replay_is_deterministic() {
        let s = RandomStream::new(77, 3);
        assert_eq!(
            sample_clause_replace(50, 5, &mut s.rng()),
            sample_clause_replace(50, 5, &mut s.rng())
        );
        assert_eq!(
            sample_assignment_uniform(100, &mut s.rng()),
            sample_assignment_uniform(100, &mut s.rng())
        );
        assert_eq!(
            sample_formula_fixed_m(20, 3, 40, &mut RandomStream::new(5, 0).rng()),
            sample_formula_fixed_m(20, 3, 40, &mut RandomStream::new(5, 0).rng())
        );
        assert_ne!(
            sample_formula_fixed_m(20, 3, 40, &mut RandomStream::new(5, 0).rng()),
            sample_formula_fixed_m(20, 3, 40, &mut RandomStream::new(5, 1).rng())
        );
    }

    #[test]
    fn empty_formulas() {
        let mut rng = RandomStream::new(0, 0).rng();
        assert!(sample_formula_fixed_m(5, 3, 0, &mut rng).is_empty());
        let a = sample_assignment_uniform(5, &mut rng);
        assert!(sample_planted_formula(&a, 0, 3, &mut rng).is_empty());
    }

    #[test]
    fn uniform_clause_falsified_with_prob_two_to_minus_k() {
        // 1000 (clause, assignment) pairs; exact per-pair law: each of the
        // 2^k literal outcomes equally likely, one of them all-false.
        let mut rng = RandomStream::new(3, 0).rng();
        let trials = 1000;
        let mut unsat = 0;
        for _ in 0..trials {
            let c = sample_clause_replace(30, 4, &mut rng);
            let a = sample_assignment_uniform(30, &mut rng);
            if !eval_clause(&c, &a).unwrap() {
                unsat += 1;
            }
        }
        let p = 1.0 / 16.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((unsat as f64 / trials as f64 - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn planted_clauses_satisfy_and_are_uniform() {
        for (n, k) in [(2usize, 2usize), (3, 2)] {
            let mut rng = RandomStream::new(4, n as u64).rng();
            let a = Assignment::all_true(n);
            let draws = 100_000u64;
            let mut counts = HashMap::new();
            for _ in 0..draws {
                let c = sample_planted_clause(&a, k, &mut rng);
                assert!(eval_clause(&c, &a).unwrap());
                *counts.entry(codes(&c)).or_insert(0) += 1;
            }
            let support = ((1usize << k) - 1) * n.pow(k as u32);
            assert_uniform(&counts, support, draws);
        }
    }

    #[test]
    fn independent_assignment_falsifies_planted_clause_at_base_rate() {
        let mut rng = RandomStream::new(5, 0).rng();
        let n = 40;
        let trials = 100_000;
        let mut unsat = 0;
        for _ in 0..trials {
            let a = sample_assignment_uniform(n, &mut rng);
            let c = sample_planted_clause(&a, 4, &mut rng);
            let b = sample_assignment_uniform(n, &mut rng);
            if !eval_clause(&c, &b).unwrap() {
                unsat += 1;
            }
        }
        let p = 1.0 / 16.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((unsat as f64 / trials as f64 - p).abs() <= 3.0 * sigma);
    }

    #[test]
    fn falsified_clause_is_falsified() {
        let mut rng = RandomStream::new(6, 0).rng();
        let a = sample_assignment_uniform(33, &mut rng);
        for _ in 0..1000 {
            let c = sample_falsified_clause(&a, 5, &mut rng);
            assert!(!eval_clause(&c, &a).unwrap());
        }
    }

    #[test]
    fn planted_formula_is_satisfied() {
        let mut rng = RandomStream::new(7, 0).rng();
        for _ in 0..50 {
            let a = sample_assignment_uniform(16, &mut rng);
            let f = sample_planted_formula(&a, 163, 4, &mut rng);
            assert_eq!(num_clauses_unsat(&f, &a).unwrap(), 0);
            assert_eq!(f.num_clauses(), 163);
        }
    }

    #[test]
    fn planted_sat_count_mean_over_instances() {
        // Fresh (instance, assignment) pair per draw. Conditional on the
        // planted assignment agreeing with `a` on x of n variables, a literal is
        // false under both with probability x/(2n), so
        // E = m (1 - (2^-k - E[(x/2n)^k]) / (1 - 2^-k)) with x ~ Bin(n, 1/2).
        let draws = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for i in 0..draws {
            let mut rng = RandomStream::new(8, i).rng();
            let p = sample_assignment_uniform(16, &mut rng);
            let f = sample_planted_formula(&p, 163, 4, &mut rng);
            let a = sample_assignment_uniform(16, &mut rng);
            let s = f.count_satisfied(&a) as f64;
            sum += s;
            sumsq += s * s;
        }
        let n = draws as f64;
        let mean = sum / n;
        let sd = ((sumsq / n - mean * mean) * n / (n - 1.0)).sqrt();
        let both: f64 = (0..=16u64)
            .map(|x| {
                crate::combinatorics::binomial_exact(16, x as usize).unwrap() as f64
                    * (x as f64 / 32.0).powi(4)
            })
            .sum::<f64>()
            / 65536.0;
        let expected = 163.0 * (1.0 - (1.0 / 16.0 - both) / (15.0 / 16.0));
        assert!((expected - 153.074_814_860_026).abs() < 1e-9);
        assert!(
            (mean - expected).abs() <= 3.0 * sd / n.sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn fixed_m_mean_satisfying_count() {
        // E[#solutions] = 2^n (1 - 2^-k)^m by linearity over assignments.
        let (n, k, m) = (12, 3, 10);
        let formulas = 2000u64;
        let mut counts = Vec::with_capacity(formulas as usize);
        for i in 0..formulas {
            let f = sample_formula_fixed_m(n, k, m, &mut RandomStream::new(9, i).rng());
            counts.push(oracle::count_satisfying(&f).unwrap() as f64);
        }
        let mean = counts.iter().sum::<f64>() / formulas as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (formulas - 1) as f64;
        let expected = 4096.0 * (7.0f64 / 8.0).powi(10);
        assert!((expected - 1_077.557_559_967_041).abs() < 1e-9);
        assert!(
            (mean - expected).abs() <= 3.0 * (var / formulas as f64).sqrt(),
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn poisson_clause_count() {
        let (n, k) = (100, 4);
        let lambda = threshold_density(k) * n as f64;
        let mut rng = RandomStream::new(10, 0).rng();
        let draws = 10_000;
        let mean = (0..draws)
            .map(|_| sample_m_at_threshold(n, k, &mut rng) as f64)
            .sum::<f64>()
            / draws as f64;
        assert!((mean - lambda).abs() <= 3.0 * (lambda / draws as f64).sqrt());

        let draws = 100_000;
        let xs: Vec<f64> = (0..draws)
            .map(|_| sample_m_at_threshold(n, k, &mut rng) as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / draws as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((var / mean - 1.0).abs() < 0.05);
    }

    #[test]
    fn poisson_window_bound_holds() {
        let (n, k) = (200, 4);
        let model = ThresholdModel::new(k);
        let (lo, hi) = model.clause_window(n);
        let mut rng = RandomStream::new(11, 0).rng();
        let draws = 10_000;
        let inside = (0..draws)
            .map(|_| sample_m_at_threshold(n, k, &mut rng) as f64)
            .filter(|&m| m >= lo && m <= hi)
            .count();
        assert!(inside as f64 / draws as f64 >= 1.0 - model.window_miss_bound(n));
    }

    #[test]
    fn uniform_assignment_bits() {
        let n = 32;
        let draws = 100_000;
        let mut rng = RandomStream::new(12, 0).rng();
        let mut ones = vec![0u64; n];
        let mut both = vec![0u64; n - 1];
        for _ in 0..draws {
            let a = sample_assignment_uniform(n, &mut rng);
            for i in 0..n {
                if a.get(i) {
                    ones[i] += 1;
                    if i + 1 < n && a.get(i + 1) {
                        both[i] += 1;
                    }
                }
            }
        }
        let sigma = (0.25 / draws as f64).sqrt();
        for &c in &ones {
            assert!((c as f64 / draws as f64 - 0.5).abs() <= 3.0 * sigma);
        }
        // Adjacent-pair joint frequency: 1/4 under independence.
        let sigma_pair = (0.25 * 0.75 / draws as f64).sqrt();
        let worst = both
            .iter()
            .map(|&c| (c as f64 / draws as f64 - 0.25).abs() / sigma_pair)
            .fold(0.0, f64::max);
        // 31 pairs tested; 4 sigma keeps the family-wise error small.
        assert!(worst <= 4.0, "max pair deviation {worst} sigma");
    }

    #[test]
    fn ball_exact_edges() {
        let mut rng = RandomStream::new(13, 0).rng();
        let c = sample_assignment_uniform(20, &mut rng);
        assert_eq!(sample_in_ball_exact(&c, 0, &mut rng).unwrap(), c);
        assert_eq!(
            sample_in_ball_exact(&c, 20, &mut rng).unwrap(),
            c.complement()
        );
        assert!(sample_in_ball_exact(&c, 21, &mut rng).is_err());
        for d in 0..=20 {
            let h = sample_in_ball_exact(&c, d, &mut rng).unwrap();
            assert_eq!(hamming_distance(&c, &h).unwrap(), d);
        }
    }

    #[test]
    fn ball_exact_uniform_n6_d2() {
        let mut rng = RandomStream::new(14, 0).rng();
        let c = Assignment::new(6);
        let draws = 100_000;
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        for _ in 0..draws {
            let h = sample_in_ball_exact(&c, 2, &mut rng).unwrap();
            *counts
                .entry(vec![h.to_index().unwrap() as u32])
                .or_insert(0) += 1;
        }
        assert_uniform(&counts, 15, draws);
    }

    #[test]
    fn satisfiable_filter() {
        let mut rng = RandomStream::new(15, 0).rng();
        let f = sample_satisfiable_formula(10, 3, 40, 1000, &mut rng)
            .unwrap()
            .unwrap();
        assert!(oracle::brute_force_solve(&f).unwrap().is_some());
    }
}
