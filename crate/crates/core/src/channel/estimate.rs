//! Empirical statistics of simulated series.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub num_trials: u64,
}

impl McEstimate {
    /// Proportion estimate with the binomial standard error.
    ///
    /// With zero trials the mean and error are NaN.
    pub fn bernoulli(successes: u64, trials: u64) -> Self {
        if trials == 0 {
            return Self { mean: f64::NAN, std_error: f64::NAN, num_trials: 0 };
        }
        let p = successes as f64 / trials as f64;
        Self { mean: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), num_trials: trials }
    }

    /// Mean and standard error of the mean of i.i.d. batch values, with
    /// `num_trials` recording the underlying sample count.
    pub(crate) fn from_batches(values: &[f64], num_trials: u64) -> Self {
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)
        } else {
            0.0
        };
        Self { mean, std_error: (var / k).sqrt(), num_trials }
    }

    /// Distance to `target` in units of standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target) / self.std_error
    }
}

/// Fraction of `values` strictly below `threshold`.
pub fn estimate_cdf(values: &[f64], threshold: f64) -> Result<McEstimate> {
    if values.is_empty() {
        return Err(Error::Empty("estimate_cdf needs at least one value"));
    }
    let below = values.iter().filter(|&&v| v < threshold).count() as u64;
    Ok(McEstimate::bernoulli(below, values.len() as u64))
}

/// Number of indices `t` with `series[t] >= threshold > series[t + 1]`.
pub fn count_down_crossings(series: &[f64], threshold: f64) -> u64 {
    series.windows(2).filter(|w| w[0] >= threshold && w[1] < threshold).count() as u64
}

/// Blocks used by [`estimate_lcr`] for its standard error.
pub const LCR_BLOCKS: usize = 20;

/// Down-crossing rate of `series` through `threshold`, per second.
///
/// The series spans `(len - 1) * sample_period_s` seconds. The standard
/// error is the batch-means (non-overlapping block bootstrap) estimate over
/// [`LCR_BLOCKS`] contiguous blocks, or one block per transition when the
/// series is shorter than that.
pub fn estimate_lcr(series: &[f64], sample_period_s: f64, threshold: f64) -> Result<McEstimate> {
    if series.len() < 2 {
        return Err(Error::Empty("estimate_lcr needs at least two samples"));
    }
    if !(sample_period_s.is_finite() && sample_period_s > 0.0) {
        return Err(crate::error::config(format!("sample period must be > 0, got {sample_period_s}")));
    }
    let transitions = series.len() - 1;
    let blocks = LCR_BLOCKS.min(transitions);
    let mut rates = Vec::with_capacity(blocks);
    let mut total = 0;
    for b in 0..blocks {
        let start = b * transitions / blocks;
        let end = (b + 1) * transitions / blocks;
        let crossings = count_down_crossings(&series[start..=end], threshold);
        total += crossings;
        rates.push(crossings as f64 / ((end - start) as f64 * sample_period_s));
    }
    let mut est = McEstimate::from_batches(&rates, transitions as u64);
    // Blocks may differ in length by one sample; report the exact pooled rate.
    est.mean = total as f64 / (transitions as f64 * sample_period_s);
    Ok(est)
}

/// Normalized ensemble autocorrelation `Re E[x(t + k) x*(t)] / E[|x|^2]`
/// for lags `0..=max_lag`, pooled over every series in `paths`.
///
/// Each series is one independent realization; pooling many short
/// realizations is what makes the estimate converge for a sum-of-sinusoids
/// process.
pub fn autocorrelation(paths: &[Vec<Complex64>], max_lag: usize) -> Result<Vec<f64>> {
    let mut power = 0.0;
    let mut power_count = 0usize;
    for x in paths {
        power += x.iter().map(|v| v.norm_sqr()).sum::<f64>();
        power_count += x.len();
    }
    if power_count == 0 {
        return Err(Error::Empty("autocorrelation needs at least one sample"));
    }
    let power = power / power_count as f64;
    let mut out = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut acc = 0.0;
        let mut count = 0usize;
        for x in paths.iter().filter(|x| x.len() > lag) {
            acc += x[lag..].iter().zip(x.iter()).map(|(a, b)| (a * b.conj()).re).sum::<f64>();
            count += x.len() - lag;
        }
        if count == 0 {
            return Err(Error::Shape(format!("no series is longer than lag {lag}")));
        }
        out.push(acc / count as f64 / power);
    }
    Ok(out)
}
