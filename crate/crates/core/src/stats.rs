//! Summaries, goodness-of-fit tests and the moving-block bootstrap.

use alloc::vec::Vec;

use libm::{ceil, sqrt};
use rand::RngCore;

use crate::special::{chi_square_sf, kolmogorov_sf};
use crate::{Error, Result};

/// Pairwise (cascade) summation; the result does not depend on how the caller
/// chunked its work.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 128;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Linear-interpolated quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let w = pos - lo as f64;
    sorted[lo] * (1.0 - w) + sorted[hi] * w
}

/// Mean with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Estimate {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// Standard error (bootstrap or normal theory).
    pub std_error: f64,
}

impl Estimate {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    /// i.i.d. normal-theory 95% interval.
    pub fn iid_mean(xs: &[f64]) -> Self {
        let m = mean(xs);
        let se = sqrt(variance(xs) / xs.len() as f64);
        Estimate {
            value: m,
            lower: m - 1.959_963_984_540_054 * se,
            upper: m + 1.959_963_984_540_054 * se,
            std_error: se,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    /// `None` picks `⌈√N⌉` with `N` the length of the longest series.
    pub block_len: Option<usize>,
    pub resamples: usize,
    /// Two-sided coverage of the percentile interval.
    pub level: f64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { block_len: None, resamples: 1000, level: 0.95 }
    }
}

/// Moving-block bootstrap of the mean of one or several stationary series.
///
/// Blocks never straddle two series. Each resample concatenates uniformly
/// chosen blocks until the total length is reached; the interval is the
/// percentile interval of the resampled means. The point estimate is the pooled
/// sample mean.
pub fn moving_block_bootstrap(series: &[&[f64]], config: &BootstrapConfig, rng: &mut dyn RngCore) -> Result<Estimate> {
    let total: usize = series.iter().map(|s| s.len()).sum();
    if total == 0 {
        return Err(Error::Empty);
    }
    let longest = series.iter().map(|s| s.len()).max().unwrap_or(0);
    let block = config.block_len.unwrap_or_else(|| ceil(sqrt(longest as f64)) as usize).clamp(1, longest);

    // prefix sums turn each block mean into O(1) work
    let mut prefix: Vec<Vec<f64>> = Vec::with_capacity(series.len());
    let mut starts: Vec<(usize, usize)> = Vec::new();
    for (k, s) in series.iter().enumerate() {
        let mut p = Vec::with_capacity(s.len() + 1);
        let mut acc = 0.0;
        let mut comp = 0.0;
        p.push(0.0);
        for &x in s.iter() {
            let y = x - comp;
            let t = acc + y;
            comp = (t - acc) - y;
            acc = t;
            p.push(acc);
        }
        prefix.push(p);
        if s.len() >= block {
            starts.push((k, s.len() - block + 1));
        }
    }
    let n_starts: usize = starts.iter().map(|(_, c)| c).sum();
    if n_starts == 0 {
        return Err(Error::Empty);
    }
    let blocks_per_resample = total.div_ceil(block);

    let mut means = Vec::with_capacity(config.resamples);
    for _ in 0..config.resamples {
        let mut sum = 0.0;
        let mut len = 0usize;
        for _ in 0..blocks_per_resample {
            let mut pick = (rng.next_u64() % n_starts as u64) as usize;
            let mut chosen = 0;
            for (k, count) in &starts {
                if pick < *count {
                    chosen = *k;
                    break;
                }
                pick -= count;
            }
            let take = block.min(total - len);
            let p = &prefix[chosen];
            sum += p[pick + take] - p[pick];
            len += take;
        }
        means.push(sum / len as f64);
    }
    means.sort_by(f64::total_cmp);
    let alpha = 0.5 * (1.0 - config.level);
    let pooled: f64 = prefix.iter().map(|p| p[p.len() - 1]).sum::<f64>() / total as f64;
    Ok(Estimate {
        value: pooled,
        lower: quantile_sorted(&means, alpha).min(pooled),
        upper: quantile_sorted(&means, 1.0 - alpha).max(pooled),
        std_error: sqrt(variance(&means)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value (Stephens'
/// small-sample correction applied to the effective size).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty);
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let v = if x[i] <= y[j] { x[i] } else { y[j] };
        while i < x.len() && x[i] <= v {
            i += 1;
        }
        while j < y.len() && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let z = (sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) * d;
    Ok(TestResult { statistic: d, p_value: kolmogorov_sf(z) })
}

/// One-sample Kolmogorov–Smirnov test against a continuous CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestResult> {
    if sample.is_empty() {
        return Err(Error::Empty);
    }
    let mut x = sample.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in x.iter().enumerate() {
        let f = cdf(*v);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let z = (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * d;
    Ok(TestResult { statistic: d, p_value: kolmogorov_sf(z) })
}

/// Pearson chi-square goodness of fit; `expected` holds probabilities summing to one.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<TestResult> {
    if observed.len() != expected.len() {
        return Err(Error::DimensionMismatch { expected: expected.len(), actual: observed.len() });
    }
    if observed.len() < 2 {
        return Err(Error::Empty);
    }
    let total: u64 = observed.iter().sum();
    let n = total as f64;
    let statistic: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * n;
            (o as f64 - e) * (o as f64 - e) / e
        })
        .sum();
    let dof = (observed.len() - 1) as f64;
    Ok(TestResult { statistic, p_value: chi_square_sf(statistic, dof) })
}
