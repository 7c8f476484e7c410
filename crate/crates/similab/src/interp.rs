//! Monotone piecewise-cubic resampling.
//!
//! Fields changing frames are resampled with a shape-preserving cubic
//! interpolant (Fritsch-Carlson slope limiting). The interpolant never
//! overshoots the data, which matters when positive profiles are mapped
//! between grids. Query points outside the fitted range evaluate to zero,
//! matching the convention that simulated fields vanish off their grid.

use crate::{Error, Result};

/// Shape-preserving piecewise-cubic interpolant on a strictly increasing grid.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    /// Fits the interpolant. Requires at least two nodes, strictly
    /// increasing finite abscissae, and finite values.
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() < 2 || x.len() != y.len() {
            return Err(Error::InvalidSpec(format!(
                "interpolation needs matching grids with at least 2 nodes, got {} and {}",
                x.len(),
                y.len()
            )));
        }
        for w in x.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidSpec(
                    "interpolation grid must be strictly increasing".into(),
                ));
            }
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "interpolation data must be finite".into(),
            ));
        }

        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();

        let mut slope = vec![0.0; n];
        if n == 2 {
            slope[0] = delta[0];
            slope[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    slope[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    slope[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            slope[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slope[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }

        Ok(Self {
            x: x.to_vec(),
            y: y.to_vec(),
            slope,
        })
    }

    /// Evaluates the interpolant; zero outside the fitted range.
    pub fn eval(&self, xq: f64) -> f64 {
        let n = self.x.len();
        if !(xq >= self.x[0]) || !(xq <= self.x[n - 1]) {
            return 0.0;
        }
        let i = match self
            .x
            .binary_search_by(|v| v.partial_cmp(&xq).expect("finite grid"))
        {
            Ok(j) => return self.y[j],
            Err(j) => j.saturating_sub(1).min(n - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }

    /// Evaluates at many query points.
    pub fn eval_many(&self, xq: &[f64]) -> Vec<f64> {
        xq.iter().map(|&q| self.eval(q)).collect()
    }
}

/// One-sided three-point end slope with the standard monotonicity clamps.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        m = 0.0;
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        m = 3.0 * d0;
    }
    m
}
