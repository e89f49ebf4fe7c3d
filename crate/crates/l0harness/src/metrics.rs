//! Accuracy metrics for repeated sampling trials.

use std::collections::BTreeMap;

/// Per-group hit counts across repeated trials.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalDistribution {
    pub hits: BTreeMap<u64, u64>,
    pub trials: u64,
    /// Ground-truth group count; groups never hit still enter the metrics
    /// with frequency zero.
    pub n_groups: usize,
}

impl EmpiricalDistribution {
    pub fn total_hits(&self) -> u64 {
        self.hits.values().sum()
    }
}

/// Normalized deviation of the empirical sampling distribution from uniform.
///
/// With target frequency `f* = 1/n_groups` and empirical frequencies
/// `f_i = hits_i / trials` (zero-filled), returns
/// `(stddev({f_i}) / f*, max_i |f_i - f*| / f*)` using the population
/// standard deviation.
pub fn deviation_metrics(dist: &EmpiricalDistribution) -> (f64, f64) {
    assert!(dist.trials > 0, "trials must be positive");
    assert!(dist.n_groups > 0, "group count must be positive");
    let n = dist.n_groups as f64;
    let f_star = 1.0 / n;
    let freqs: Vec<f64> = dist
        .hits
        .values()
        .map(|&h| h as f64 / dist.trials as f64)
        .chain(std::iter::repeat(0.0).take(dist.n_groups - dist.hits.len()))
        .collect();
    let mean = freqs.iter().sum::<f64>() / n;
    let var = freqs.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
    let max_dev = freqs
        .iter()
        .map(|f| (f - f_star).abs())
        .fold(0.0f64, f64::max);
    (var.sqrt() / f_star, max_dev / f_star)
}
