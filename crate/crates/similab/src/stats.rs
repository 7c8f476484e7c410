//! Streaming moment accumulators and least-squares rate fits.
//!
//! Ensemble statistics are folded path by path in a fixed order, so results
//! are independent of how paths were scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Streaming mean/variance accumulator (Welford form, mergeable).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one sample.
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Merges another accumulator into this one. Associative up to the
    /// usual floating-point reassociation; the crate always merges in
    /// path order so results stay deterministic.
    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64) * (other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean.
    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}

/// Ordinary least squares line through (x, y): returns (slope, intercept).
///
/// Panics in debug builds on mismatched lengths; requires at least two
/// distinct abscissae for a meaningful slope.
pub fn ls_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    debug_assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Percentile of a sorted slice by linear interpolation, `p` in [0, 1].
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "percentile of empty slice");
    let pos = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Percentile bootstrap confidence interval for the least-squares slope of
/// y against x. Resamples the points with replacement `n_resamples` times
/// with a dedicated deterministic stream; returns the (lo, hi) quantiles at
/// the given two-sided level (e.g. 0.95).
pub fn bootstrap_slope_ci(
    x: &[f64],
    y: &[f64],
    n_resamples: usize,
    level: f64,
    seed: u64,
) -> (f64, f64) {
    assert!(x.len() >= 3, "bootstrap needs at least 3 points");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut slopes = Vec::with_capacity(n_resamples);
    let mut rx = vec![0.0; x.len()];
    let mut ry = vec![0.0; y.len()];
    for _ in 0..n_resamples {
        loop {
            for j in 0..x.len() {
                let i = rng.gen_range(0..x.len());
                rx[j] = x[i];
                ry[j] = y[i];
            }
            // a resample that collapses onto one abscissa has no slope
            let spread = rx.iter().any(|&v| v != rx[0]);
            if spread {
                break;
            }
        }
        slopes.push(ls_line(&rx, &ry).0);
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).expect("finite slopes"));
    let tail = (1.0 - level) / 2.0;
    (percentile(&slopes, tail), percentile(&slopes, 1.0 - tail))
}
