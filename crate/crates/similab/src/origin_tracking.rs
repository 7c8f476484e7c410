//! Dynamically chosen space origin and fluctuating real-time/pseudo-time
//! relation, with modal verification that the compensated modes vanish.
//!
//! Forcing on the first two nonconstant modes can be absorbed into the
//! frame itself: a stochastically moving origin cancels the odd forcing,
//! and a fluctuating reparametrization of real time against pseudo-time
//! cancels the even one. Both compensations are built from the very same
//! Wiener increments that force the modes, so the cancellation is exact
//! per step in the discrete system, not merely in distribution.

use crate::frames::MovingFrame;
use crate::noise::{mode_rng, standard_normal, ModeStream, NoiseSpectrum};
use crate::{Error, Result};
use rand_chacha::ChaCha12Rng;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn validate_big_t_grid(big_t: &[f64]) -> Result<()> {
    if big_t.len() < 2 {
        return Err(Error::InvalidSpec(
            "pseudo-time grid needs at least two nodes".into(),
        ));
    }
    if big_t.iter().any(|v| !v.is_finite()) || big_t.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec(
            "pseudo-time grid must be finite and strictly increasing".into(),
        ));
    }
    if big_t[0] < 0.0 {
        return Err(Error::InvalidSpec(
            "pseudo-time grid must start at or above zero".into(),
        ));
    }
    Ok(())
}

fn draw_increments(rng: &mut ChaCha12Rng, big_t: &[f64]) -> Vec<f64> {
    big_t
        .windows(2)
        .map(|w| (w[1] - w[0]).sqrt() * standard_normal(rng))
        .collect()
}

/// A sampled moving-origin path `X(T)` driven by the mode-1 noise.
#[derive(Debug, Clone)]
pub struct OriginPath {
    pub big_t: Vec<f64>,
    pub x: Vec<f64>,
    /// Wiener increments of the driving noise, one per grid interval.
    pub dw: Vec<f64>,
    pub a: f64,
    pub b1: f64,
}

/// Builds the moving origin `X(T) = X(0) + (sqrt(2) b_1 / a) w_1(T)` on
/// the given grid. The construction divides by the slow amplitude, so a
/// vanishing amplitude is a degenerate request.
pub fn build_origin_path(
    a: f64,
    b1: f64,
    x0: f64,
    big_t: &[f64],
    seed: u64,
    path: u64,
) -> Result<OriginPath> {
    if a == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    if !(a.is_finite() && b1.is_finite() && x0.is_finite()) {
        return Err(Error::InvalidSpec("origin parameters must be finite".into()));
    }
    validate_big_t_grid(big_t)?;
    let mut rng = mode_rng(seed, path, 1);
    let dw = draw_increments(&mut rng, big_t);
    let c = SQRT_2 * b1 / a;
    let mut x = Vec::with_capacity(big_t.len());
    x.push(x0);
    let mut cur = x0;
    for d in &dw {
        cur += c * d;
        x.push(cur);
    }
    Ok(OriginPath {
        big_t: big_t.to_vec(),
        x,
        dw,
        a,
        b1,
    })
}

/// A sampled real-time path `t(T)` against pseudo-time, driven by the
/// mode-2 noise through a midpoint-sampled stochastic integral.
#[derive(Debug, Clone)]
pub struct PseudoTimePath {
    pub big_t: Vec<f64>,
    pub t: Vec<f64>,
    /// Wiener increments of the driving noise, one per grid interval.
    pub dw: Vec<f64>,
    pub t0: f64,
    pub a: f64,
    pub b2: f64,
}

impl PseudoTimePath {
    /// Number of grid intervals on which real time runs backwards.
    pub fn reversals(&self) -> usize {
        self.t.windows(2).filter(|w| w[1] < w[0]).count()
    }

    /// The centered fluctuation `t(T) - t0 - T` at each node.
    pub fn fluctuations(&self) -> Vec<f64> {
        self.t
            .iter()
            .zip(&self.big_t)
            .map(|(t, big)| t - self.t0 - big)
            .collect()
    }
}

/// Builds `t(T) = t0 + T + (2 b_2 / a) int_0^T sqrt(T') dw_2`, with the
/// stochastic integral discretized by midpoint sampling of sqrt(T'). The
/// midpoint rule makes the discrete second moment telescope to T^2/2
/// exactly, matching the continuous isometry.
pub fn build_pseudotime_path(
    t0: f64,
    a: f64,
    b2: f64,
    big_t: &[f64],
    seed: u64,
    path: u64,
) -> Result<PseudoTimePath> {
    if a == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    if !(t0.is_finite() && a.is_finite() && b2.is_finite()) {
        return Err(Error::InvalidSpec(
            "pseudo-time parameters must be finite".into(),
        ));
    }
    validate_big_t_grid(big_t)?;
    if big_t[0] != 0.0 {
        return Err(Error::InvalidSpec(
            "pseudo-time grid must start at zero".into(),
        ));
    }
    let mut rng = mode_rng(seed, path, 2);
    let dw = draw_increments(&mut rng, big_t);
    let c = 2.0 * b2 / a;
    let mut t = Vec::with_capacity(big_t.len());
    t.push(t0);
    let mut integral = 0.0;
    for (w, d) in big_t.windows(2).zip(&dw) {
        let mid = 0.5 * (w[0] + w[1]);
        integral += mid.sqrt() * d;
        t.push(t0 + w[1] + c * integral);
    }
    Ok(PseudoTimePath {
        big_t: big_t.to_vec(),
        t,
        dw,
        t0,
        a,
        b2,
    })
}

/// Bundles an origin path and a pseudo-time path over the same grid into
/// a moving frame for field transforms. A leading node at pseudo-time
/// zero is dropped: similarity variables are defined for positive frame
/// times only.
pub fn moving_frame(origin: &OriginPath, pseudo: &PseudoTimePath) -> Result<MovingFrame> {
    if origin.big_t != pseudo.big_t {
        return Err(Error::InvalidSpec(
            "origin and pseudo-time paths live on different grids".into(),
        ));
    }
    let skip = usize::from(origin.big_t.first() == Some(&0.0));
    MovingFrame::new(
        origin.big_t[skip..].to_vec(),
        origin.x[skip..].to_vec(),
        pseudo.t[skip..].to_vec(),
    )
}

/// Integrates the first three modes of the conservative system in
/// log-pseudo-time, with the frame compensations either active or frozen
/// (origin at rest, real time equal to pseudo-time).
///
/// The slow mode is held at the constant amplitude `a`. With compensation
/// on and the fast modes starting at zero, both stay at exactly zero: the
/// compensating drift is assembled from the same increments that force
/// them. With compensation off, each fast mode is an independent decaying
/// noisy mode.
pub fn simulate_compensated_modes(
    a: f64,
    spectrum: &NoiseSpectrum,
    horizon: f64,
    dtau: f64,
    seed: u64,
    path: u64,
    compensation: bool,
) -> Result<Vec<[f64; 3]>> {
    if spectrum.n_modes() < 3 {
        return Err(Error::InvalidSpec(
            "compensation experiments use three modes".into(),
        ));
    }
    if spectrum.amplitude(0) != 0.0 {
        return Err(Error::InvalidSpec(
            "compensation experiments require conservative noise (no mass mode forcing)".into(),
        ));
    }
    if compensation && a == 0.0 {
        return Err(Error::DegenerateAmplitude);
    }
    if !(dtau > 0.0 && horizon > 0.0 && dtau.is_finite() && horizon.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "need positive horizon and step, got horizon {horizon}, step {dtau}"
        )));
    }
    let n_steps = (horizon / dtau).round().max(1.0) as usize;
    let b1 = spectrum.amplitude(1);
    let b2 = spectrum.amplitude(2);
    let mut s1 = ModeStream::new(seed, path, 1, dtau)?;
    let mut s2 = ModeStream::new(seed, path, 2, dtau)?;

    let mut u1 = 0.0f64;
    let mut u2 = 0.0f64;
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push([a, u1, u2]);
    for step in 0..n_steps {
        let dw1 = s1.next_increment();
        let dw2 = s2.next_increment();
        let f1 = b1 * dw1;
        let f2 = b2 * dw2;
        // frame-induced terms: the origin drift couples down one mode, the
        // time reparametrization couples down two; both are scaled by the
        // current amplitude relative to the compensating amplitude
        let (comp1, cross12, comp2) = if compensation {
            (-f1 * (a / a), -f1 * (u1 / a), -f2 * (a / a))
        } else {
            (0.0, 0.0, 0.0)
        };
        // Heun on the linear decay; additive pieces enter once
        let p1 = u1 - 0.5 * u1 * dtau + f1 + comp1;
        let next1 = u1 - 0.25 * dtau * (u1 + p1) + f1 + comp1;
        let cross_pred = if compensation { -f1 * (p1 / a) } else { 0.0 };
        let p2 = u2 - u2 * dtau + f2 + comp2 + cross12;
        let next2 =
            u2 - 0.5 * dtau * (u2 + p2) + f2 + comp2 + 0.5 * (cross12 + cross_pred);
        if !(next1.is_finite() && next2.is_finite()) {
            return Err(Error::Aborted {
                step,
                context: "compensated mode became non-finite".into(),
            });
        }
        u1 = next1;
        u2 = next2;
        out.push([a, u1, u2]);
    }
    Ok(out)
}
