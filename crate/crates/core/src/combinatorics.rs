//! Log-domain combinatorics with compensated summation.

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    compensated_sum((1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()))
}

/// `ln sum_i exp(xs[i])`, stable for large magnitudes.
pub fn ln_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    max + compensated_sum(xs.iter().map(|x| (x - max).exp())).ln()
}

/// Exact `C(n, k)` when it fits the intermediate arithmetic (`n <= 120`).
pub fn binomial_exact(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    if n > 120 {
        return None;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    Some(c)
}

/// Size of the Hamming ball `sum_{i<=r} C(n, i)`, exact for `n <= 120`.
pub fn ball_size_exact(n: usize, r: usize) -> Option<u128> {
    (0..=r.min(n)).try_fold(0u128, |acc, i| binomial_exact(n, i).map(|c| acc + c))
}

/// `ln sum_{i<=r} C(n, i)`.
pub fn ln_ball_size(n: usize, r: usize) -> f64 {
    let terms: Vec<f64> = (0..=r.min(n)).map(|i| ln_binomial(n, i)).collect();
    ln_sum_exp(&terms)
}
