//! Normal-approximation summaries. Aggregation works on integer tallies so
//! results do not depend on the order in which parallel trials finish.

use serde::Serialize;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.5758293035489;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`.
    pub stderr: f64,
    pub ci99: [f64; 2],
}

impl Estimate {
    /// A value computed exactly.
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            stderr: 0.0,
            ci99: [value, value],
        }
    }

    pub fn with_stderr(mean: f64, stderr: f64) -> Self {
        Self {
            mean,
            stderr,
            ci99: [mean - Z99 * stderr, mean + Z99 * stderr],
        }
    }

    /// Proportion of `hits` among `trials` 0/1 samples.
    pub fn bernoulli(hits: u64, trials: u64) -> Self {
        assert!(trials > 0 && hits <= trials);
        let n = trials as f64;
        let p = hits as f64 / n;
        let var = if trials > 1 { p * (1.0 - p) * n / (n - 1.0) } else { 0.0 };
        Self::with_stderr(p, (var / n).sqrt())
    }
}
