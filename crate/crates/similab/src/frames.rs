//! Transforms between physical and similarity coordinates.
//!
//! The static frame rescales a decaying field onto the diffusive
//! self-similar variables
//!
//! ```text
//! tau = log t,    xi = x / sqrt(t),    u = sqrt(t) * phys_u,
//! ```
//!
//! under which a spreading Gaussian release becomes a stationary profile.
//! The moving frame generalizes this with a stochastic origin `X(T)` and a
//! pseudo-time `T` related to real time by a stored path `t(T)`:
//!
//! ```text
//! tau = log T,    xi = (x - X(T)) / sqrt(T),    u = sqrt(T) * phys_u.
//! ```
//!
//! Because `t(T)` is itself random it may fluctuate backwards; looking up
//! the frame time for a given real time then uses the last passage (the
//! largest `T` whose stored segment reaches `t`), and crossings of
//! reversed segments are counted and reported.
//!
//! Transforms onto the natural image grid are exact scalings; resampling
//! onto a requested grid uses monotone cubic interpolation with fields
//! treated as zero outside their grid.

use crate::interp::MonotoneCubic;
use crate::{Error, Result};

/// A field 𝔲(t, x) on a uniform x-grid at one physical time.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    pub t: f64,
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// A field u(tau, xi) on a uniform xi-grid at one log-time.
#[derive(Debug, Clone)]
pub struct SimilarityField {
    pub tau: f64,
    pub xi: Vec<f64>,
    pub values: Vec<f64>,
}

/// A moving similarity frame: origin path and real-time path sampled on a
/// strictly increasing pseudo-time grid.
#[derive(Debug, Clone)]
pub struct MovingFrame {
    pub big_t: Vec<f64>,
    pub origin: Vec<f64>,
    pub t_of_big_t: Vec<f64>,
}

/// A moving-frame transform result with its lookup diagnostics.
#[derive(Debug, Clone)]
pub struct MovingView {
    pub field: SimilarityField,
    /// The frame time `T` matched to the physical time.
    pub frame_time: f64,
    /// Number of backwards-running `t(T)` segments at or before the lookup
    /// segment. Zero when the stored real-time path is monotone up to the
    /// match.
    pub reversals_crossed: usize,
}

fn check_uniform_grid(grid: &[f64], what: &str) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "{what} grid needs at least 2 nodes"
        )));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSpec(format!("{what} grid must be finite")));
    }
    let h = grid[1] - grid[0];
    if !(h > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "{what} grid must be strictly increasing"
        )));
    }
    for w in grid.windows(2) {
        let hi = w[1] - w[0];
        if (hi - h).abs() > 1e-9 * h.abs() {
            return Err(Error::InvalidSpec(format!(
                "{what} grid must be uniformly spaced"
            )));
        }
    }
    Ok(())
}

impl PhysicalField {
    /// Validates time positivity, grid uniformity, and matching lengths.
    pub fn new(t: f64, x: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!(
                "physical time must be positive, got {t}"
            )));
        }
        check_uniform_grid(&x, "x")?;
        if x.len() != values.len() {
            return Err(Error::InvalidSpec(format!(
                "grid and values length mismatch: {} vs {}",
                x.len(),
                values.len()
            )));
        }
        Ok(Self { t, x, values })
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    /// Trapezoid mass of the field.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.dx())
    }
}

impl SimilarityField {
    /// Validates grid uniformity and matching lengths.
    pub fn new(tau: f64, xi: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Domain(format!("log-time must be finite, got {tau}")));
        }
        check_uniform_grid(&xi, "xi")?;
        if xi.len() != values.len() {
            return Err(Error::InvalidSpec(format!(
                "grid and values length mismatch: {} vs {}",
                xi.len(),
                values.len()
            )));
        }
        Ok(Self { tau, xi, values })
    }

    /// Grid spacing.
    pub fn dxi(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }

    /// Trapezoid mass of the field.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.values, self.dxi())
    }

    /// The physical time `t = exp(tau)` of this snapshot.
    pub fn time(&self) -> f64 {
        self.tau.exp()
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let inner: f64 = values[1..values.len() - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
}

impl MovingFrame {
    /// Validates a frame path. The pseudo-time grid must be strictly
    /// increasing and positive; the real-time path may reverse.
    pub fn new(big_t: Vec<f64>, origin: Vec<f64>, t_of_big_t: Vec<f64>) -> Result<Self> {
        if big_t.len() < 2 || big_t.len() != origin.len() || big_t.len() != t_of_big_t.len() {
            return Err(Error::InvalidSpec(
                "frame paths need matching lengths of at least 2".into(),
            ));
        }
        if big_t
            .iter()
            .chain(origin.iter())
            .chain(t_of_big_t.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidSpec("frame paths must be finite".into()));
        }
        if !(big_t[0] > 0.0) || big_t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpec(
                "pseudo-time grid must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self {
            big_t,
            origin,
            t_of_big_t,
        })
    }

    /// The identity frame on a pseudo-time grid: origin zero, `t(T) = T`.
    pub fn identity(big_t: Vec<f64>) -> Result<Self> {
        let origin = vec![0.0; big_t.len()];
        let t = big_t.clone();
        Self::new(big_t, origin, t)
    }

    /// Last-passage lookup of the frame time for a real time `t`: scans the
    /// stored segments from the latest backwards and returns the first
    /// (i.e. largest-`T`) segment whose endpoints bracket `t`, linearly
    /// interpolated, together with the count of reversed segments at or
    /// before the match.
    pub fn frame_time(&self, t: f64) -> Result<(f64, usize)> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("physical time must be finite, got {t}")));
        }
        let tt = &self.t_of_big_t;
        let n = tt.len();
        let mut hit = None;
        for i in (0..n - 1).rev() {
            let (a, b) = (tt[i], tt[i + 1]);
            let inside = (a <= t && t <= b) || (b <= t && t <= a);
            if inside {
                hit = Some(i);
                break;
            }
        }
        let i = hit.ok_or_else(|| {
            Error::Domain(format!(
                "physical time {t} is outside the range reached by the frame"
            ))
        })?;
        let (a, b) = (tt[i], tt[i + 1]);
        let frac = if b == a { 1.0 } else { (t - a) / (b - a) };
        let big_t = self.big_t[i] + frac * (self.big_t[i + 1] - self.big_t[i]);
        let reversals = tt[..=i + 1]
            .windows(2)
            .filter(|w| w[1] < w[0])
            .count();
        Ok((big_t, reversals))
    }

    /// Origin position at a frame time, linearly interpolated on the stored
    /// path (clamped to the path's endpoints outside the grid).
    pub fn origin_at(&self, big_t: f64) -> f64 {
        let n = self.big_t.len();
        if big_t <= self.big_t[0] {
            return self.origin[0];
        }
        if big_t >= self.big_t[n - 1] {
            return self.origin[n - 1];
        }
        let i = match self
            .big_t
            .binary_search_by(|v| v.partial_cmp(&big_t).expect("finite grid"))
        {
            Ok(j) => return self.origin[j],
            Err(j) => j - 1,
        };
        let frac = (big_t - self.big_t[i]) / (self.big_t[i + 1] - self.big_t[i]);
        self.origin[i] + frac * (self.origin[i + 1] - self.origin[i])
    }
}

/// Maps a physical field onto similarity variables on the natural image
/// grid `xi_i = x_i / sqrt(t)`. This is an exact rescaling: no
/// interpolation is involved.
pub fn to_similarity(phys: &PhysicalField) -> Result<SimilarityField> {
    let rt = phys.t.sqrt();
    let xi: Vec<f64> = phys.x.iter().map(|&x| x / rt).collect();
    let values: Vec<f64> = phys.values.iter().map(|&v| rt * v).collect();
    SimilarityField::new(phys.t.ln(), xi, values)
}

/// Maps a physical field onto similarity variables, resampled onto a
/// requested uniform xi-grid (zero outside the source grid).
pub fn to_similarity_on(phys: &PhysicalField, xi_grid: &[f64]) -> Result<SimilarityField> {
    check_uniform_grid(xi_grid, "xi")?;
    let natural = to_similarity(phys)?;
    let interp = MonotoneCubic::fit(&natural.xi, &natural.values)?;
    let values = interp.eval_many(xi_grid);
    SimilarityField::new(natural.tau, xi_grid.to_vec(), values)
}

/// Maps a similarity field back to physical variables at time `t`, on the
/// natural image grid `x_i = xi_i * sqrt(t)`. Exact inverse of
/// [`to_similarity`] when `t = exp(tau)`.
pub fn from_similarity(sim: &SimilarityField, t: f64) -> Result<PhysicalField> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!(
            "physical time must be positive, got {t}"
        )));
    }
    let rt = t.sqrt();
    let x: Vec<f64> = sim.xi.iter().map(|&xi| xi * rt).collect();
    let values: Vec<f64> = sim.values.iter().map(|&v| v / rt).collect();
    PhysicalField::new(t, x, values)
}

/// Maps a similarity field back to physical variables at time `t`,
/// resampled onto a requested uniform x-grid.
pub fn from_similarity_on(sim: &SimilarityField, t: f64, x_grid: &[f64]) -> Result<PhysicalField> {
    check_uniform_grid(x_grid, "x")?;
    let natural = from_similarity(sim, t)?;
    let interp = MonotoneCubic::fit(&natural.x, &natural.values)?;
    let values = interp.eval_many(x_grid);
    PhysicalField::new(t, x_grid.to_vec(), values)
}

/// Maps a physical field into a moving similarity frame on the natural
/// image grid `xi_i = (x_i - X(T)) / sqrt(T)`, where `T` is located from
/// the field's time by last-passage lookup on the stored `t(T)` path.
pub fn to_similarity_moving(phys: &PhysicalField, frame: &MovingFrame) -> Result<MovingView> {
    let (big_t, reversals_crossed) = frame.frame_time(phys.t)?;
    let origin = frame.origin_at(big_t);
    let rt = big_t.sqrt();
    let xi: Vec<f64> = phys.x.iter().map(|&x| (x - origin) / rt).collect();
    let values: Vec<f64> = phys.values.iter().map(|&v| rt * v).collect();
    let field = SimilarityField::new(big_t.ln(), xi, values)?;
    Ok(MovingView {
        field,
        frame_time: big_t,
        reversals_crossed,
    })
}

/// Moving-frame transform resampled onto a requested uniform xi-grid.
pub fn to_similarity_moving_on(
    phys: &PhysicalField,
    frame: &MovingFrame,
    xi_grid: &[f64],
) -> Result<MovingView> {
    check_uniform_grid(xi_grid, "xi")?;
    let natural = to_similarity_moving(phys, frame)?;
    let interp = MonotoneCubic::fit(&natural.field.xi, &natural.field.values)?;
    let values = interp.eval_many(xi_grid);
    let field = SimilarityField::new(natural.field.tau, xi_grid.to_vec(), values)?;
    Ok(MovingView {
        field,
        frame_time: natural.frame_time,
        reversals_crossed: natural.reversals_crossed,
    })
}

/// Uniform grid helper: `n` nodes from `min` to `max` inclusive.
pub fn uniform_grid(min: f64, max: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && max > min);
    let h = (max - min) / (n - 1) as f64;
    (0..n).map(|i| min + h * i as f64).collect()
}
