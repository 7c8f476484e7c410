//! Two-pipe stochastic advection-exchange model and its pseudo-time
//! similarity frame, used to measure emergent eddy diffusion.
//!
//! Two co-located pipes carry concentrations advected by a common white
//! velocity with opposite signs, and exchange material at rate 1/2. The
//! pair is reduced to mean and difference fields in a stochastic frame
//! (T, eta) driven by the same noise: T is the pseudo-time whose square
//! root sets the similarity length, eta the velocity memory. On long runs
//! the mean concentration spreads diffusively and its profile in the
//! stretched variable approaches the self-similar Gaussian, while the
//! difference field is slaved to the gradient of the mean.

use crate::frames::{to_similarity, PhysicalField, SimilarityField};
use crate::noise::ModeStream;
use crate::stats::ls_line;
use crate::{Error, Result};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Default half-width of the periodic domain [-L, L).
pub const DEFAULT_HALF_WIDTH: f64 = 60.0;
/// Default number of grid points.
pub const DEFAULT_N_POINTS: usize = 512;
/// Default time step.
pub const DEFAULT_DT: f64 = 0.01;

/// Exact periodic translation by Fourier phase shifts.
///
/// A shift never touches the zero wavenumber, so the mass of the shifted
/// field is preserved exactly; smooth fields keep all their Lp norms to
/// spectral accuracy.
pub struct SpectralShifter {
    n: usize,
    half_width: f64,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
    buf: Vec<Complex64>,
}

impl SpectralShifter {
    /// Plans transforms for `n` points on [-half_width, half_width).
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::InvalidSpec(format!(
                "periodic grid needs at least 16 points, got {n}"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let mut planner = FftPlanner::new();
        let length = 2.0 * half_width;
        let wavenumbers = (0..n)
            .map(|j| {
                let f = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * f / length
            })
            .collect();
        Ok(Self {
            n,
            half_width,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            wavenumbers,
            buf: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    /// Translates the field by `s` in place: `u(x) <- u(x - s)`. A shift of
    /// zero is the exact identity. Shifts beyond half the domain alias and
    /// are refused.
    pub fn shift(&mut self, field: &mut [f64], s: f64) -> Result<()> {
        if field.len() != self.n {
            return Err(Error::InvalidSpec(format!(
                "field length {} does not match planned {}",
                field.len(),
                self.n
            )));
        }
        if !s.is_finite() || s.abs() > self.half_width {
            return Err(Error::Aborted {
                step: 0,
                context: format!(
                    "requested shift {s} exceeds half the periodic domain ({})",
                    self.half_width
                ),
            });
        }
        if s == 0.0 {
            return Ok(());
        }
        for (b, v) in self.buf.iter_mut().zip(field.iter()) {
            *b = Complex64::new(*v, 0.0);
        }
        self.fwd.process(&mut self.buf);
        for (b, k) in self.buf.iter_mut().zip(&self.wavenumbers) {
            *b *= Complex64::from_polar(1.0, -k * s);
        }
        self.inv.process(&mut self.buf);
        let scale = 1.0 / self.n as f64;
        for (v, b) in field.iter_mut().zip(&self.buf) {
            *v = b.re * scale;
        }
        Ok(())
    }
}

/// Two pipe concentrations on a shared uniform periodic grid.
#[derive(Debug, Clone)]
pub struct PipePair {
    pub t: f64,
    x: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    half_width: f64,
}

impl PipePair {
    /// Builds the pair at time zero on the grid `x_i = -L + 2L i/n`.
    pub fn new(half_width: f64, u1: Vec<f64>, u2: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        let n = u1.len();
        if n < 16 || u2.len() != n {
            return Err(Error::InvalidSpec(format!(
                "pipes need matching grids of at least 16 points, got {} and {}",
                n,
                u2.len()
            )));
        }
        if u1.iter().chain(&u2).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("pipe fields must be finite".into()));
        }
        let x = periodic_grid(half_width, n);
        Ok(Self {
            t: 0.0,
            x,
            u1,
            u2,
            half_width,
        })
    }

    /// The shared spatial grid.
    pub fn x_grid(&self) -> &[f64] {
        &self.x
    }

    /// Grid spacing.
    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.x.len() as f64
    }

    /// Half-width of the periodic domain.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Total mass of both pipes by the periodic rectangle rule, which is
    /// exact for the trapezoid on a periodic grid.
    pub fn mass(&self) -> f64 {
        let sum: f64 = self.u1.iter().zip(&self.u2).map(|(a, b)| a + b).sum();
        self.dx() * sum
    }

    /// Mean concentration `(u1 + u2)/2` per node.
    pub fn mean(&self) -> Vec<f64> {
        self.u1.iter().zip(&self.u2).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Half-difference `(u1 - u2)/2` per node.
    pub fn half_difference(&self) -> Vec<f64> {
        self.u1.iter().zip(&self.u2).map(|(a, b)| 0.5 * (a - b)).collect()
    }

    /// Second spatial moment of the mean concentration about the origin.
    pub fn second_moment(&self) -> Result<f64> {
        let m = self.mean();
        let total: f64 = m.iter().sum();
        if total.abs() < 1e-300 {
            return Err(Error::ContractViolation(
                "second moment of an empty concentration".into(),
            ));
        }
        let weighted: f64 = m.iter().zip(&self.x).map(|(v, x)| v * x * x).sum();
        Ok(weighted / total)
    }
}

/// The uniform periodic grid on [-L, L) with the right endpoint excluded.
pub fn periodic_grid(half_width: f64, n: usize) -> Vec<f64> {
    let h = 2.0 * half_width / n as f64;
    (0..n).map(|i| -half_width + i as f64 * h).collect()
}

/// A normalized Gaussian bump of the given total mass and variance.
pub fn gaussian_release(x: &[f64], center: f64, variance: f64, mass: f64) -> Vec<f64> {
    let norm = mass / (2.0 * PI * variance).sqrt();
    x.iter()
        .map(|&xi| norm * (-(xi - center) * (xi - center) / (2.0 * variance)).exp())
        .collect()
}

/// One advection-exchange step by operator splitting: exact opposite
/// spectral shifts of the pipes by the velocity increment, then the exact
/// exchange relaxation `(m + d e^{-dt}, m - d e^{-dt})` of the mean m and
/// half-difference d.
pub fn step_pipes(
    pair: &mut PipePair,
    shifter: &mut SpectralShifter,
    dt: f64,
    dw: f64,
) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "time step must be positive, got {dt}"
        )));
    }
    shifter.shift(&mut pair.u1, dw)?;
    shifter.shift(&mut pair.u2, -dw)?;
    let decay = (-dt).exp();
    for (a, b) in pair.u1.iter_mut().zip(pair.u2.iter_mut()) {
        let m = 0.5 * (*a + *b);
        let d = 0.5 * (*a - *b) * decay;
        *a = m + d;
        *b = m - d;
    }
    pair.t += dt;
    Ok(())
}

/// One Heun step of the Stratonovich frame system `dT = eta o dw`,
/// `d eta = -eta dt + dw`: the noise coefficient of T is averaged between
/// the state and the Euler predictor.
pub fn frame_heun_step(big_t: f64, eta: f64, dt: f64, dw: f64) -> (f64, f64) {
    let eta_pred = eta - eta * dt + dw;
    let eta_avg = 0.5 * (eta + eta_pred);
    (big_t + eta_avg * dw, eta - eta_avg * dt + dw)
}

/// A sampled pseudo-time frame path (T, eta) with its driving increments.
#[derive(Debug, Clone)]
pub struct PseudoFrame {
    pub t_grid: Vec<f64>,
    pub big_t: Vec<f64>,
    pub eta: Vec<f64>,
    pub dw: Vec<f64>,
    /// First node at which the pseudo-time was nonpositive, if any; such a
    /// path has no log-time there and is excluded from frame statistics.
    pub first_nonpositive: Option<usize>,
}

impl PseudoFrame {
    /// Whether the path ever lost its log-time.
    pub fn flagged(&self) -> bool {
        self.first_nonpositive.is_some()
    }

    /// Fraction of grid intervals on which the pseudo-time ran backwards.
    pub fn reversal_fraction(&self) -> f64 {
        let n = self.big_t.len() - 1;
        let back = self.big_t.windows(2).filter(|w| w[1] < w[0]).count();
        back as f64 / n as f64
    }

    /// Indices at which the pseudo-time strictly exceeds its running
    /// maximum. Similarity-frame statistics are evaluated only at these
    /// record times, where the log-time is advancing.
    pub fn record_indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut best = f64::NEG_INFINITY;
        for (i, &v) in self.big_t.iter().enumerate() {
            if v > best {
                best = v;
                if v > 0.0 {
                    out.push(i);
                }
            }
        }
        out
    }
}

/// Integrates the frame over a uniform time grid with its own increments
/// drawn from the shared-velocity stream convention (mode 0 of the seed
/// and path), so a pipe pair driven with the same keys sees the same
/// velocity realization.
pub fn evolve_pseudo_frame(
    t_grid: &[f64],
    seed: u64,
    path: u64,
    big_t0: f64,
    eta0: f64,
) -> Result<PseudoFrame> {
    if !(big_t0 > 0.0 && big_t0.is_finite() && eta0.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "frame start needs positive pseudo-time, got T = {big_t0}, eta = {eta0}"
        )));
    }
    if t_grid.len() < 2 || t_grid[0] != 0.0 {
        return Err(Error::InvalidSpec(
            "frame time grid must start at zero with at least two nodes".into(),
        ));
    }
    let dt = t_grid[1] - t_grid[0];
    if !(dt > 0.0)
        || t_grid
            .windows(2)
            .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt)
    {
        return Err(Error::InvalidSpec(
            "frame time grid must be uniform and increasing".into(),
        ));
    }
    let mut stream = ModeStream::new(seed, path, 0, dt)?;
    let n = t_grid.len() - 1;
    let mut big_t = Vec::with_capacity(n + 1);
    let mut eta = Vec::with_capacity(n + 1);
    let mut dw = Vec::with_capacity(n);
    big_t.push(big_t0);
    eta.push(eta0);
    let mut first_nonpositive = None;
    let (mut t_cur, mut e_cur) = (big_t0, eta0);
    for i in 0..n {
        let inc = stream.next_increment();
        let (t_next, e_next) = frame_heun_step(t_cur, e_cur, dt, inc);
        if t_next <= 0.0 && first_nonpositive.is_none() {
            first_nonpositive = Some(i + 1);
        }
        big_t.push(t_next);
        eta.push(e_next);
        dw.push(inc);
        t_cur = t_next;
        e_cur = e_next;
    }
    Ok(PseudoFrame {
        t_grid: t_grid.to_vec(),
        big_t,
        eta,
        dw,
        first_nonpositive,
    })
}

/// A pipe pair reduced to similarity variables at one frame point.
#[derive(Debug, Clone)]
pub struct MeanDiff {
    /// The stretched mean field `u(xi) = sqrt(T) (u1 + u2)/2` at
    /// `xi = x/sqrt(T)`.
    pub u: SimilarityField,
    /// The raw half-difference `(u1 - u2)/2` on the spatial grid. It is
    /// deliberately not divided by eta/T, which crosses zero; slaving is
    /// checked only on windows where eta is bounded away from zero.
    pub diff: Vec<f64>,
    pub big_t: f64,
    pub eta: f64,
}

/// Transforms a pipe pair to mean and difference variables at the frame
/// point (T, eta). The mean is rescaled exactly onto its similarity grid;
/// the difference is returned raw.
pub fn mean_diff_transform(pair: &PipePair, big_t: f64, eta: f64) -> Result<MeanDiff> {
    if !(big_t > 0.0 && big_t.is_finite()) {
        return Err(Error::Domain(format!(
            "similarity reduction needs positive pseudo-time, got {big_t}"
        )));
    }
    let phys = PhysicalField::new(big_t, pair.x.clone(), pair.mean())?;
    let u = to_similarity(&phys)?;
    Ok(MeanDiff {
        u,
        diff: pair.half_difference(),
        big_t,
        eta,
    })
}

/// Deviation series of the slaving relation along a trajectory of
/// similarity snapshots.
#[derive(Debug, Clone)]
pub struct SlavingReport {
    /// Log-pseudo-times of the accepted snapshots.
    pub taus: Vec<f64>,
    /// L2 deviation `|| (T/eta) d + du/dxi ||` per accepted snapshot.
    pub deviations: Vec<f64>,
    /// Snapshots skipped because eta was too close to zero.
    pub skipped: usize,
    /// Least-squares decay rate of log deviation against tau, when at
    /// least two accepted snapshots with positive deviation exist.
    pub rate: Option<f64>,
}

/// Measures how closely the difference field tracks minus the gradient of
/// the stretched mean. Snapshots with |eta| <= 0.1 are skipped and
/// counted: there the reported raw difference cannot be rescaled stably.
pub fn check_slaving(trajectory: &[MeanDiff]) -> SlavingReport {
    let mut taus = Vec::new();
    let mut deviations = Vec::new();
    let mut skipped = 0usize;
    for snap in trajectory {
        if snap.eta.abs() <= 0.1 {
            skipped += 1;
            continue;
        }
        let n = snap.u.values.len();
        let h = snap.u.xi[1] - snap.u.xi[0];
        let scale = snap.big_t / snap.eta;
        let mut sq = 0.0;
        for i in 0..n {
            let grad = if i == 0 {
                (snap.u.values[1] - snap.u.values[0]) / h
            } else if i == n - 1 {
                (snap.u.values[n - 1] - snap.u.values[n - 2]) / h
            } else {
                (snap.u.values[i + 1] - snap.u.values[i - 1]) / (2.0 * h)
            };
            let dev = scale * snap.diff[i] + grad;
            sq += dev * dev;
        }
        taus.push(snap.big_t.ln());
        deviations.push((h * sq).sqrt());
    }
    let rate = if taus.len() >= 2 && deviations.iter().all(|d| *d > 0.0) {
        let log_dev: Vec<f64> = deviations.iter().map(|d| d.ln()).collect();
        Some(ls_line(&taus, &log_dev).0)
    } else {
        None
    };
    SlavingReport {
        taus,
        deviations,
        skipped,
        rate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{heat_kernel, project_field, BasisSpec};
    use crate::stats::Welford;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn default_pair_with_release(variance: f64) -> PipePair {
        let x = periodic_grid(DEFAULT_HALF_WIDTH, DEFAULT_N_POINTS);
        let u1 = gaussian_release(&x, 0.0, variance, 1.0);
        let u2 = vec![0.0; x.len()];
        PipePair::new(DEFAULT_HALF_WIDTH, u1, u2).unwrap()
    }

    #[test]
    fn spectral_shift_translates_and_preserves_norms() {
        let x = periodic_grid(DEFAULT_HALF_WIDTH, DEFAULT_N_POINTS);
        let mut field = gaussian_release(&x, 0.0, 1.5, 1.0);
        let reference = field.clone();
        let mut shifter = SpectralShifter::new(field.len(), DEFAULT_HALF_WIDTH).unwrap();
        shifter.shift(&mut field, 7.3).unwrap();
        let expect = gaussian_release(&x, 7.3, 1.5, 1.0);
        for (got, want) in field.iter().zip(&expect) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
        let lp = |f: &[f64], p: f64| f.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        for p in [1.0, 2.0] {
            assert_relative_eq!(lp(&field, p), lp(&reference, p), max_relative = 1e-12);
        }
        // the shifted peak falls between nodes, so the sampled sup norm is
        // preserved only to interpolation accuracy
        let sup = |f: &[f64]| f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_relative_eq!(sup(&field), sup(&reference), max_relative = 1e-3);
        // round trip back to the start
        shifter.shift(&mut field, -7.3).unwrap();
        for (got, want) in field.iter().zip(&reference) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
        // an aliasing shift is refused
        assert!(matches!(
            shifter.shift(&mut field, 60.5),
            Err(Error::Aborted { .. })
        ));
    }

    #[test]
    fn quiet_exchange_decays_the_difference_exactly() {
        let mut pair = default_pair_with_release(2.0);
        let mean0 = pair.mean();
        let d0 = pair.half_difference();
        let mut shifter = SpectralShifter::new(DEFAULT_N_POINTS, DEFAULT_HALF_WIDTH).unwrap();
        let n_steps = 150;
        for _ in 0..n_steps {
            step_pipes(&mut pair, &mut shifter, DEFAULT_DT, 0.0).unwrap();
        }
        let total = -(n_steps as f64) * DEFAULT_DT;
        // zero shifts are the exact identity; the mean only moves by the
        // rounding of recombining it with the shrinking difference
        for (m, m_start) in pair.mean().iter().zip(&mean0) {
            assert_abs_diff_eq!(m, m_start, epsilon = 1e-13);
        }
        for (d, d_start) in pair.half_difference().iter().zip(&d0) {
            assert_relative_eq!(*d, d_start * total.exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved_under_advection_and_exchange() {
        let x = periodic_grid(DEFAULT_HALF_WIDTH, DEFAULT_N_POINTS);
        let u1 = gaussian_release(&x, -3.0, 2.0, 1.0);
        let u2 = gaussian_release(&x, 4.0, 1.0, 0.5);
        let mut pair = PipePair::new(DEFAULT_HALF_WIDTH, u1, u2).unwrap();
        let mass0 = pair.mass();
        let mut shifter = SpectralShifter::new(DEFAULT_N_POINTS, DEFAULT_HALF_WIDTH).unwrap();
        let mut stream = ModeStream::new(11, 0, 0, DEFAULT_DT).unwrap();
        for _ in 0..500 {
            let dw = stream.next_increment();
            step_pipes(&mut pair, &mut shifter, DEFAULT_DT, dw).unwrap();
        }
        assert_relative_eq!(pair.mass(), mass0, max_relative = 1e-10);
    }

    #[test]
    fn quiet_frame_freezes_pseudotime_and_relaxes_memory() {
        let (mut big_t, mut eta) = (4.0, 0.5);
        let dt = DEFAULT_DT;
        for _ in 0..100 {
            let (t_next, e_next) = frame_heun_step(big_t, eta, dt, 0.0);
            big_t = t_next;
            eta = e_next;
        }
        assert_eq!(big_t, 4.0, "pseudo-time must not move without noise");
        assert_relative_eq!(eta, 0.5 * (-1.0f64).exp(), max_relative = 1e-4);
        // start validation
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 * dt).collect();
        assert!(evolve_pseudo_frame(&grid, 0, 0, 0.0, 0.0).is_err());
        assert!(evolve_pseudo_frame(&[1.0, 2.0], 0, 0, 1.0, 0.0).is_err());
    }

    #[test]
    fn memory_variance_and_mean_drift_match_theory() {
        let horizon = 6.0;
        let n_steps = (horizon / DEFAULT_DT).round() as usize;
        let grid: Vec<f64> = (0..=n_steps).map(|i| i as f64 * DEFAULT_DT).collect();
        let mut eta_end = Welford::new();
        let mut t_end = Welford::new();
        for path in 0..1500u64 {
            let frame = evolve_pseudo_frame(&grid, 29, path, 1.0, 0.0).unwrap();
            eta_end.push(*frame.eta.last().unwrap());
            t_end.push(*frame.big_t.last().unwrap());
        }
        // long-run memory variance 1/2; mean pseudo-time advances at 1/2
        assert_relative_eq!(eta_end.variance(), 0.5, max_relative = 0.1);
        assert_relative_eq!(t_end.mean() - 1.0, 0.5 * horizon, max_relative = 0.1);
    }

    #[test]
    fn fragile_start_gets_flagged_and_reversals_counted() {
        let n_steps = 400;
        let grid: Vec<f64> = (0..=n_steps).map(|i| i as f64 * DEFAULT_DT).collect();
        let mut flagged = 0usize;
        let mut any_reversals = false;
        for path in 0..40u64 {
            let frame = evolve_pseudo_frame(&grid, 7, path, 0.005, 0.3).unwrap();
            if frame.flagged() {
                flagged += 1;
                assert!(frame.big_t[frame.first_nonpositive.unwrap()] <= 0.0);
            }
            if frame.reversal_fraction() > 0.0 {
                any_reversals = true;
            }
        }
        assert!(flagged > 0, "a near-zero start should lose log-time sometimes");
        assert!(any_reversals, "backward pseudo-time intervals should occur");
    }

    #[test]
    fn record_indices_are_strictly_increasing_maxima() {
        let n_steps = 600;
        let grid: Vec<f64> = (0..=n_steps).map(|i| i as f64 * DEFAULT_DT).collect();
        let frame = evolve_pseudo_frame(&grid, 3, 1, 1.0, 0.0).unwrap();
        let recs = frame.record_indices();
        assert!(!recs.is_empty());
        for pair in recs.windows(2) {
            assert!(frame.big_t[pair[1]] > frame.big_t[pair[0]]);
        }
        let max_before_last = frame.big_t[..*recs.last().unwrap()]
            .iter()
            .fold(f64::NEG_INFINITY, |m, v| m.max(*v));
        assert!(frame.big_t[*recs.last().unwrap()] > max_before_last);
    }

    #[test]
    fn matched_gaussian_reduces_to_the_fixed_point_profile() {
        let big_t = 4.0;
        let x = periodic_grid(DEFAULT_HALF_WIDTH, DEFAULT_N_POINTS);
        let g = gaussian_release(&x, 0.0, 2.0 * big_t, 1.0);
        let pair = PipePair::new(DEFAULT_HALF_WIDTH, g.clone(), g).unwrap();
        let snap = mean_diff_transform(&pair, big_t, 0.3).unwrap();
        for (u, &xi) in snap.u.values.iter().zip(&snap.u.xi) {
            assert_abs_diff_eq!(*u, heat_kernel(xi), epsilon = 1e-12);
        }
        assert!(snap.diff.iter().all(|d| *d == 0.0));
        // antisymmetric pipes have a vanishing mean
        let neg: Vec<f64> = pair.u1.iter().map(|v| -v).collect();
        let anti = PipePair::new(DEFAULT_HALF_WIDTH, pair.u1.clone(), neg).unwrap();
        let snap = mean_diff_transform(&anti, big_t, 0.3).unwrap();
        assert!(snap.u.values.iter().all(|u| *u == 0.0));
        assert!(mean_diff_transform(&pair, 0.0, 0.3).is_err());
    }

    #[test]
    fn consistent_start_keeps_the_slaving_deviation_at_discretization_level() {
        let (big_t0, eta0) = (4.0, 0.5);
        let x = periodic_grid(DEFAULT_HALF_WIDTH, DEFAULT_N_POINTS);
        let m = gaussian_release(&x, 0.0, 2.0 * big_t0, 1.0);
        let h = x[1] - x[0];
        let n = x.len();
        // difference field slaved to the mean gradient: d = -eta m_x
        let mut d0 = vec![0.0; n];
        for i in 0..n {
            let grad = (m[(i + 1) % n] - m[(i + n - 1) % n]) / (2.0 * h);
            d0[i] = -eta0 * grad;
        }
        let u1: Vec<f64> = m.iter().zip(&d0).map(|(a, b)| a + b).collect();
        let u2: Vec<f64> = m.iter().zip(&d0).map(|(a, b)| a - b).collect();
        let mut pair = PipePair::new(DEFAULT_HALF_WIDTH, u1, u2).unwrap();
        let mut shifter = SpectralShifter::new(n, DEFAULT_HALF_WIDTH).unwrap();
        let (mut big_t, mut eta) = (big_t0, eta0);
        let mut traj = vec![mean_diff_transform(&pair, big_t, eta).unwrap()];
        for step in 1..=140 {
            step_pipes(&mut pair, &mut shifter, DEFAULT_DT, 0.0).unwrap();
            let (t_next, e_next) = frame_heun_step(big_t, eta, DEFAULT_DT, 0.0);
            big_t = t_next;
            eta = e_next;
            if step % 35 == 0 {
                traj.push(mean_diff_transform(&pair, big_t, eta).unwrap());
            }
        }
        let report = check_slaving(&traj);
        assert_eq!(report.skipped, 0);
        // reference scale: the gradient norm of the stretched mean
        let grad_norm = {
            let snap = &traj[0];
            let hx = snap.u.xi[1] - snap.u.xi[0];
            let sq: f64 = snap
                .u
                .values
                .windows(3)
                .map(|w| {
                    let g = (w[2] - w[0]) / (2.0 * hx);
                    g * g
                })
                .sum();
            (hx * sq).sqrt()
        };
        for dev in &report.deviations {
            assert!(
                *dev <= 1e-4 * grad_norm,
                "deviation {dev} above discretization level {}",
                1e-4 * grad_norm
            );
        }
    }

    #[test]
    fn generic_starts_fall_onto_the_slaved_difference() {
        // common-noise pairs: the pipes and the frame consume the same
        // increments; deviations are compared across 2 units of log-time
        let mut ratios = Vec::new();
        let mut skipped_total = 0usize;
        for path in 0..10u64 {
            let mut pair = default_pair_with_release(2.0);
            let n = pair.x_grid().len();
            let mut shifter = SpectralShifter::new(n, DEFAULT_HALF_WIDTH).unwrap();
            let mut stream = ModeStream::new(41, path, 0, DEFAULT_DT).unwrap();
            let (mut big_t, mut eta) = (1.0, 0.0);
            let mut best = f64::NEG_INFINITY;
            let mut traj = Vec::new();
            for step in 0..3000 {
                let dw = stream.next_increment();
                step_pipes(&mut pair, &mut shifter, DEFAULT_DT, dw).unwrap();
                let (t_next, e_next) = frame_heun_step(big_t, eta, DEFAULT_DT, dw);
                big_t = t_next;
                eta = e_next;
                if big_t > best && big_t > 0.0 {
                    best = big_t;
                    if step % 20 == 0 {
                        traj.push(mean_diff_transform(&pair, big_t, eta).unwrap());
                    }
                }
            }
            let report = check_slaving(&traj);
            skipped_total += report.skipped;
            let first = report
                .taus
                .iter()
                .zip(&report.deviations)
                .next();
            let (tau0, dev0) = match first {
                Some((t, d)) => (*t, *d),
                None => continue,
            };
            if let Some((_, dev_late)) = report
                .taus
                .iter()
                .zip(&report.deviations)
                .find(|(t, _)| **t >= tau0 + 2.0)
            {
                ratios.push(dev0 / dev_late);
            }
        }
        assert!(
            ratios.len() >= 3,
            "too few paths reached 2 units of log-time"
        );
        ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = ratios[ratios.len() / 2];
        assert!(
            median >= 5.0,
            "median deviation drop {median} below the slaving bound"
        );
        assert!(skipped_total > 0, "memory zero crossings should skip samples");
    }

    #[test]
    fn spread_grows_with_unit_effective_diffusivity() {
        let horizon = 16.0;
        let n_steps = (horizon / DEFAULT_DT).round() as usize;
        let sample_every = 100;
        let n_samples = n_steps / sample_every;
        let mut acc: Vec<Welford> = (0..n_samples).map(|_| Welford::new()).collect();
        let mut t_final = Welford::new();
        for path in 0..120u64 {
            let mut pair = default_pair_with_release(1.0);
            let mut shifter =
                SpectralShifter::new(DEFAULT_N_POINTS, DEFAULT_HALF_WIDTH).unwrap();
            let mut stream = ModeStream::new(57, path, 0, DEFAULT_DT).unwrap();
            let (mut big_t, mut eta) = (1.0, 0.0);
            for step in 1..=n_steps {
                let dw = stream.next_increment();
                step_pipes(&mut pair, &mut shifter, DEFAULT_DT, dw).unwrap();
                let (t_next, e_next) = frame_heun_step(big_t, eta, DEFAULT_DT, dw);
                big_t = t_next;
                eta = e_next;
                if step % sample_every == 0 {
                    acc[step / sample_every - 1].push(pair.second_moment().unwrap());
                }
            }
            t_final.push(big_t);
        }
        let times: Vec<f64> = (1..=n_samples)
            .map(|j| (j * sample_every) as f64 * DEFAULT_DT)
            .collect();
        let means: Vec<f64> = acc.iter().map(|w| w.mean()).collect();
        let (slope, _) = ls_line(&times, &means);
        assert!(
            (0.85..=1.15).contains(&slope),
            "spread slope {slope} outside unit diffusivity band"
        );
        // the frame tracks half the elapsed time on average
        assert_relative_eq!(t_final.mean() - 1.0, 0.5 * horizon, max_relative = 0.1);
    }

    #[test]
    fn late_profiles_are_gaussian_in_the_path_frame() {
        let horizon = 60.0;
        let n_steps = (horizon / DEFAULT_DT).round() as usize;
        let spec = BasisSpec::auto(4).unwrap();
        let mut per_mode: Vec<Vec<f64>> = vec![Vec::new(); 4];
        for path in 0..48u64 {
            let mut pair = default_pair_with_release(2.0);
            let mut shifter =
                SpectralShifter::new(DEFAULT_N_POINTS, DEFAULT_HALF_WIDTH).unwrap();
            let mut stream = ModeStream::new(73, path, 0, DEFAULT_DT).unwrap();
            let (mut big_t, mut eta) = (1.0, 0.0);
            let mut lost_log_time = false;
            let mut best = f64::NEG_INFINITY;
            let mut last_record: Option<(PipePair, f64, f64)> = None;
            for _ in 0..n_steps {
                let dw = stream.next_increment();
                step_pipes(&mut pair, &mut shifter, DEFAULT_DT, dw).unwrap();
                let (t_next, e_next) = frame_heun_step(big_t, eta, DEFAULT_DT, dw);
                big_t = t_next;
                eta = e_next;
                if big_t <= 0.0 {
                    lost_log_time = true;
                }
                if big_t > best {
                    best = big_t;
                    last_record = Some((pair.clone(), big_t, eta));
                }
            }
            if lost_log_time {
                continue;
            }
            let (pair, big_t, eta) = last_record.unwrap();
            let snap = mean_diff_transform(&pair, big_t, eta).unwrap();
            let proj = project_field(&snap.u.xi, &snap.u.values, &spec).unwrap();
            for k in 1..=4 {
                per_mode[k - 1].push((proj.coeffs[k] / proj.coeffs[0]).abs());
            }
        }
        for (k, ratios) in per_mode.iter_mut().enumerate() {
            assert!(ratios.len() >= 24, "too many flagged paths");
            ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = ratios[ratios.len() / 2];
            assert!(
                median < 0.1,
                "mode {} median ratio {median} too large for a Gaussian limit",
                k + 1
            );
        }
    }
}
