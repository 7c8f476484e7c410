//! Grid solvers for the stochastic Burgers and cubic reaction-diffusion
//! equations, in both the physical frame and the similarity frame.
//!
//! All solvers share one numerical idiom: second-order central stencils in
//! conservative (flux) form on a uniform grid with homogeneous Dirichlet
//! ends, stepped by the Heun predictor-corrector with additive spectral
//! noise. Flux-form differences make the rectangle-sum mass telescope to
//! pure boundary terms, so mass bookkeeping is exact for compactly
//! supported fields. The exponential weight that controls the similarity
//! analysis makes boundary contamination catastrophic, so compact support
//! is monitored rather than absorbed by the scheme.

use crate::noise::{ModeStream, NoiseSpectrum, SpectralNoise};
use crate::{Error, Result};

/// Which frame a grid configuration discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Log-time and scaled space; fields live on a xi-grid.
    Similarity,
    /// Plain time and space; fields live on an x-grid.
    Physical,
}

/// Uniform-grid discretization parameters with the diffusive stability
/// bound baked into validation.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub half_width: f64,
    pub n_points: usize,
    pub dt: f64,
    pub scheme: Scheme,
}

impl GridConfig {
    pub fn new(half_width: f64, n_points: usize, dt: f64, scheme: Scheme) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        if n_points < 64 {
            return Err(Error::InvalidSpec(format!(
                "need at least 64 grid points, got {n_points}"
            )));
        }
        let h = 2.0 * half_width / (n_points - 1) as f64;
        let bound = 0.4 * h * h;
        if !(dt > 0.0 && dt.is_finite()) || dt > bound * (1.0 + 1e-12) {
            return Err(Error::InvalidSpec(format!(
                "time step {dt} violates the diffusive bound {bound:.3e} at spacing {h:.3e}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
            dt,
            scheme,
        })
    }

    /// Similarity-frame default: xi in [-12, 12] at spacing 1/32.
    pub fn similarity_default() -> Self {
        Self::new(12.0, 769, 3.75e-4, Scheme::Similarity).expect("valid default")
    }

    /// Physical-frame default: x in [-60, 60] at spacing 1/16.
    pub fn physical_default() -> Self {
        Self::new(60.0, 1921, 1.5e-3, Scheme::Physical).expect("valid default")
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points)
            .map(|i| -self.half_width + i as f64 * h)
            .collect()
    }
}

/// A gridded field at one frame time, with its running line integral.
#[derive(Debug, Clone)]
pub struct BurgersState {
    /// Frame time: t on a physical grid, tau on a similarity grid.
    pub time: f64,
    pub values: Vec<f64>,
    /// Rectangle-sum line integral of the field.
    pub mass: f64,
}

impl BurgersState {
    pub fn from_values(time: f64, cfg: &GridConfig, values: Vec<f64>) -> Result<Self> {
        if values.len() != cfg.n_points {
            return Err(Error::InvalidSpec(format!(
                "field has {} samples for a {}-point grid",
                values.len(),
                cfg.n_points
            )));
        }
        if !time.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("field entries must be finite".into()));
        }
        let mass = cfg.spacing() * values.iter().sum::<f64>();
        Ok(Self { time, values, mass })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// True when the boundary values sit below 1e-6 of the interior peak
    /// (compact support maintained). A zero field passes.
    pub fn boundary_ok(&self) -> bool {
        let peak = self.max_abs();
        if peak == 0.0 {
            return true;
        }
        let edge = self.values[0]
            .abs()
            .max(self.values[self.values.len() - 1].abs());
        edge <= 1e-6 * peak
    }
}

/// Drift of the similarity-frame equations in flux form:
/// diffusion + half the scaled-transport divergence, minus the Burgers
/// flux and/or the cubic reaction.
fn similarity_drift(
    u: &[f64],
    xi: &[f64],
    h: f64,
    advection: bool,
    cubic: bool,
    out: &mut [f64],
) {
    let n = u.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    let inv_h2 = 1.0 / (h * h);
    let inv_4h = 1.0 / (4.0 * h);
    for i in 1..n - 1 {
        let diff = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2;
        let transport = (xi[i + 1] * u[i + 1] - xi[i - 1] * u[i - 1]) * inv_4h;
        let mut rhs = diff + transport;
        if advection {
            rhs -= (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) * inv_4h;
        }
        if cubic {
            rhs -= u[i] * u[i] * u[i];
        }
        out[i] = rhs;
    }
}

/// Drift of the physical-frame Burgers equation in flux form.
fn physical_drift(u: &[f64], h: f64, out: &mut [f64]) {
    let n = u.len();
    out[0] = 0.0;
    out[n - 1] = 0.0;
    let inv_h2 = 1.0 / (h * h);
    let inv_4h = 1.0 / (4.0 * h);
    for i in 1..n - 1 {
        out[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv_h2
            - (u[i + 1] * u[i + 1] - u[i - 1] * u[i - 1]) * inv_4h;
    }
}

fn check_advective_cfl(state: &BurgersState, cfg: &GridConfig) -> Result<()> {
    let peak = state.max_abs();
    let courant = peak * cfg.dt / cfg.spacing();
    if courant > 0.5 {
        return Err(Error::Aborted {
            step: 0,
            context: format!(
                "advective Courant number {courant:.3} exceeds 0.5 at amplitude {peak:.3e}"
            ),
        });
    }
    Ok(())
}

fn heun_grid_step<F>(state: &BurgersState, cfg: &GridConfig, dw: &[f64], drift: F) -> Result<BurgersState>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = cfg.n_points;
    if state.values.len() != n || dw.len() != n {
        return Err(Error::InvalidSpec(
            "state, grid, and noise sizes must agree".into(),
        ));
    }
    check_advective_cfl(state, cfg)?;
    let dt = cfg.dt;
    let u = &state.values;
    let mut f0 = vec![0.0; n];
    let mut f1 = vec![0.0; n];
    drift(u, &mut f0);
    let mut pred = vec![0.0; n];
    for i in 1..n - 1 {
        pred[i] = u[i] + f0[i] * dt + dw[i];
    }
    drift(&pred, &mut f1);
    let mut next = vec![0.0; n];
    for i in 1..n - 1 {
        next[i] = u[i] + 0.5 * dt * (f0[i] + f1[i]) + dw[i];
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Aborted {
            step: 0,
            context: "field became non-finite".into(),
        });
    }
    BurgersState::from_values(state.time + dt, cfg, next)
}

/// One Heun step of the similarity-frame Burgers equation. `dw` is the
/// synthesized additive noise increment on the grid (zero for the
/// deterministic equation).
pub fn step_burgers_similarity(
    state: &BurgersState,
    cfg: &GridConfig,
    dw: &[f64],
) -> Result<BurgersState> {
    let xi = cfg.grid();
    let h = cfg.spacing();
    heun_grid_step(state, cfg, dw, |u, out| {
        similarity_drift(u, &xi, h, true, false, out)
    })
}

/// One Heun step of the similarity-frame cubic reaction-diffusion
/// equation.
pub fn step_rd_similarity(
    state: &BurgersState,
    cfg: &GridConfig,
    dw: &[f64],
) -> Result<BurgersState> {
    let xi = cfg.grid();
    let h = cfg.spacing();
    heun_grid_step(state, cfg, dw, |u, out| {
        similarity_drift(u, &xi, h, false, true, out)
    })
}

/// One Heun step of the physical-frame Burgers equation.
pub fn step_burgers_physical(
    state: &BurgersState,
    cfg: &GridConfig,
    dw: &[f64],
) -> Result<BurgersState> {
    let h = cfg.spacing();
    heun_grid_step(state, cfg, dw, |u, out| physical_drift(u, h, out))
}

/// Which similarity-frame equation a trajectory run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    Burgers,
    ReactionDiffusion,
}

/// Integrates a similarity-frame trajectory with spectral noise drawn
/// from per-mode streams of the given (seed, path) pair. Snapshots are
/// recorded every `sample_every` steps (the initial and final states are
/// always included). Aborts carry the offending step index, and a field
/// that loses compact support aborts rather than silently polluting the
/// weighted analysis.
pub fn run_similarity(
    u0: &BurgersState,
    cfg: &GridConfig,
    spectrum: &NoiseSpectrum,
    kind: SimilarityKind,
    n_steps: usize,
    sample_every: usize,
    seed: u64,
    path: u64,
) -> Result<Vec<BurgersState>> {
    if cfg.scheme != Scheme::Similarity {
        return Err(Error::InvalidSpec(
            "similarity run needs a similarity-frame grid".into(),
        ));
    }
    let every = sample_every.max(1);
    let xi = cfg.grid();
    let h = cfg.spacing();
    let advection = kind == SimilarityKind::Burgers;
    let cubic = kind == SimilarityKind::ReactionDiffusion;
    let synth = SpectralNoise::new(spectrum, &xi);
    let n_modes = spectrum.n_modes();
    let mut streams: Vec<ModeStream> = (0..n_modes)
        .map(|mode| ModeStream::new(seed, path, mode as u64, cfg.dt))
        .collect::<Result<_>>()?;
    let mut dw_modes = vec![0.0; n_modes];
    let mut dw_field = vec![0.0; cfg.n_points];

    let mut cur = u0.clone();
    let mut out = Vec::new();
    out.push(cur.clone());
    for step in 0..n_steps {
        for (s, d) in streams.iter_mut().zip(dw_modes.iter_mut()) {
            *d = s.next_increment();
        }
        synth.increment_into(&dw_modes, &mut dw_field);
        let next = heun_grid_step(&cur, cfg, &dw_field, |u, o| {
            similarity_drift(u, &xi, h, advection, cubic, o)
        })
        .map_err(|e| at_step(e, step))?;
        if !next.boundary_ok() {
            return Err(Error::Aborted {
                step,
                context: "field lost compact support at the grid boundary".into(),
            });
        }
        cur = next;
        if (step + 1) % every == 0 || step + 1 == n_steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

/// Integrates a physical-frame Burgers trajectory. The forcing is the
/// similarity-frame spectral noise pushed to the x-grid: increments
/// (1/sqrt(t)) sum_k b_k dw_k e_k(x/sqrt(t)) with Var(dw_k) = dt/t, i.e.
/// a forcing rate proportional to 1/t. The scaled basis is re-evaluated
/// as t advances.
pub fn run_physical(
    u0: &BurgersState,
    cfg: &GridConfig,
    spectrum: &NoiseSpectrum,
    n_steps: usize,
    sample_every: usize,
    seed: u64,
    path: u64,
) -> Result<Vec<BurgersState>> {
    if cfg.scheme != Scheme::Physical {
        return Err(Error::InvalidSpec(
            "physical run needs a physical-frame grid".into(),
        ));
    }
    if !(u0.time > 0.0) {
        return Err(Error::InvalidSpec(
            "physical runs start at a positive time".into(),
        ));
    }
    let every = sample_every.max(1);
    let x = cfg.grid();
    let h = cfg.spacing();
    let n_modes = spectrum.n_modes();
    let amps = spectrum.amplitudes();
    // unit-variance draws; the t-dependent scaling is applied per step
    let mut streams: Vec<ModeStream> = (0..n_modes)
        .map(|mode| ModeStream::new(seed, path, mode as u64, 1.0))
        .collect::<Result<_>>()?;
    let noisy = amps.iter().any(|b| *b != 0.0);
    let mut dw_field = vec![0.0; cfg.n_points];

    let mut cur = u0.clone();
    let mut out = Vec::new();
    out.push(cur.clone());
    for step in 0..n_steps {
        let t = cur.time;
        if noisy {
            let scale = (cfg.dt / t).sqrt() / t.sqrt();
            let root_t = t.sqrt();
            dw_field.fill(0.0);
            let draws: Vec<f64> = streams.iter_mut().map(|s| s.next_increment()).collect();
            for (i, &xi) in x.iter().enumerate() {
                let e = crate::hermite::eval_basis(n_modes - 1, xi / root_t);
                let mut acc = 0.0;
                for k in 0..n_modes {
                    acc += amps[k] * draws[k] * e[k];
                }
                dw_field[i] = scale * acc;
            }
            dw_field[0] = 0.0;
            dw_field[cfg.n_points - 1] = 0.0;
        }
        let next = heun_grid_step(&cur, cfg, &dw_field, |u, o| physical_drift(u, h, o))
            .map_err(|e| at_step(e, step))?;
        cur = next;
        if (step + 1) % every == 0 || step + 1 == n_steps {
            out.push(cur.clone());
        }
    }
    Ok(out)
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::Aborted { context, .. } => Error::Aborted { step, context },
        other => other,
    }
}

/// The similarity-frame transform that linearizes the Burgers flow:
/// `V(xi) = U(xi) exp(-1/2 int_{-inf}^{xi} U dy)`, with the cumulative
/// integral taken by trapezoid from the left end of the grid.
pub fn cole_hopf(xi: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(xi.len(), values.len(), "grid/value size mismatch");
    let n = values.len();
    let mut out = vec![0.0; n];
    if n == 0 {
        return out;
    }
    let mut cum = 0.0;
    out[0] = values[0];
    for i in 1..n {
        let h = xi[i] - xi[i - 1];
        cum += 0.5 * h * (values[i - 1] + values[i]);
        out[i] = values[i] * (-0.5 * cum).exp();
    }
    out
}

/// Norms available for gridded similarity-frame fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Weighted L2 with weight exp(xi^2/4).
    L2K,
    /// Weighted H1: field plus central-difference gradient, both weighted.
    H1K,
    /// Plain sup norm.
    Linf,
}

/// Weighted norm of a gridded field. The exponential weight is clipped
/// to zero wherever the field has already decayed below 1e-6 of its peak,
/// so an unresolved tail cannot multiply roundoff into the diagnostic.
pub fn weighted_norm(xi: &[f64], values: &[f64], kind: NormKind) -> f64 {
    assert_eq!(xi.len(), values.len(), "grid/value size mismatch");
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    match kind {
        NormKind::Linf => peak,
        NormKind::L2K => weighted_l2(xi, values, peak).sqrt(),
        NormKind::H1K => {
            let grad = central_gradient(xi, values);
            (weighted_l2(xi, values, peak) + weighted_l2(xi, &grad, peak)).sqrt()
        }
    }
}

fn weighted_l2(xi: &[f64], values: &[f64], clip_peak: f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for i in 0..n {
        if values[i].abs() < 1e-6 * clip_peak {
            continue;
        }
        let h = if i == 0 {
            xi[1] - xi[0]
        } else if i == n - 1 {
            xi[n - 1] - xi[n - 2]
        } else {
            0.5 * (xi[i + 1] - xi[i - 1])
        };
        acc += h * crate::hermite::k_weight(xi[i]) * values[i] * values[i];
    }
    acc
}

fn central_gradient(xi: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut g = vec![0.0; n];
    if n < 2 {
        return g;
    }
    g[0] = (values[1] - values[0]) / (xi[1] - xi[0]);
    g[n - 1] = (values[n - 1] - values[n - 2]) / (xi[n - 1] - xi[n - 2]);
    for i in 1..n - 1 {
        g[i] = (values[i + 1] - values[i - 1]) / (xi[i + 1] - xi[i - 1]);
    }
    g
}

/// Pointwise-difference line integral along two paired trajectories with
/// equal initial mass: `phi(tau) = int |u1 - u2| dxi` at each recorded
/// snapshot. The equal-mass precondition is enforced to 1e-8.
pub fn contraction_diagnostic(
    path1: &[BurgersState],
    path2: &[BurgersState],
    cfg: &GridConfig,
) -> Result<Vec<f64>> {
    if path1.len() != path2.len() || path1.is_empty() {
        return Err(Error::InvalidSpec(
            "need two equal-length non-empty trajectories".into(),
        ));
    }
    let dm = (path1[0].mass - path2[0].mass).abs();
    if dm > 1e-8 {
        return Err(Error::ContractViolation(format!(
            "initial masses differ by {dm:.3e}, beyond 1e-8"
        )));
    }
    let h = cfg.spacing();
    let mut out = Vec::with_capacity(path1.len());
    for (a, b) in path1.iter().zip(path2) {
        if a.values.len() != b.values.len() {
            return Err(Error::InvalidSpec("trajectory grids differ".into()));
        }
        let phi = h * a
            .values
            .iter()
            .zip(&b.values)
            .map(|(x, y)| (x - y).abs())
            .sum::<f64>();
        out.push(phi);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{eval_eigenfunction, heat_kernel, normalizations};
    use crate::stats::ls_line;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian_state(cfg: &GridConfig, amp: f64) -> BurgersState {
        let vals: Vec<f64> = cfg.grid().iter().map(|&x| amp * heat_kernel(x)).collect();
        BurgersState::from_values(0.0, cfg, vals).unwrap()
    }

    fn small_grid() -> GridConfig {
        GridConfig::new(12.0, 385, 1.5e-3, Scheme::Similarity).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(GridConfig::new(12.0, 63, 1e-4, Scheme::Similarity).is_err());
        assert!(GridConfig::new(12.0, 385, 2e-3, Scheme::Similarity).is_err());
        assert!(GridConfig::new(-1.0, 385, 1e-4, Scheme::Similarity).is_err());
        let cfg = GridConfig::similarity_default();
        assert_relative_eq!(cfg.spacing(), 1.0 / 32.0, max_relative = 1e-14);
        let phys = GridConfig::physical_default();
        assert_relative_eq!(phys.spacing(), 1.0 / 16.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_field_stays_zero() {
        let cfg = small_grid();
        let zero = BurgersState::from_values(0.0, &cfg, vec![0.0; cfg.n_points]).unwrap();
        let dw = vec![0.0; cfg.n_points];
        let a = step_burgers_similarity(&zero, &cfg, &dw).unwrap();
        let b = step_rd_similarity(&zero, &cfg, &dw).unwrap();
        assert!(a.values.iter().all(|v| *v == 0.0));
        assert!(b.values.iter().all(|v| *v == 0.0));
        let pcfg = GridConfig::physical_default();
        let pzero =
            BurgersState::from_values(1.0, &pcfg, vec![0.0; pcfg.n_points]).unwrap();
        let c = step_burgers_physical(&pzero, &pcfg, &vec![0.0; pcfg.n_points]).unwrap();
        assert!(c.values.iter().all(|v| *v == 0.0));
        assert_relative_eq!(c.time, 1.0 + pcfg.dt, max_relative = 1e-14);
    }

    #[test]
    fn conservative_noise_keeps_mass() {
        let cfg = small_grid();
        let u0 = gaussian_state(&cfg, 0.6);
        let spectrum =
            NoiseSpectrum::new(vec![0.0, 0.2, 0.15, 0.1, 0.05], true).unwrap();
        let traj = run_similarity(
            &u0,
            &cfg,
            &spectrum,
            SimilarityKind::Burgers,
            800,
            100,
            21,
            0,
        )
        .unwrap();
        let m0 = traj[0].mass;
        for s in &traj {
            assert_abs_diff_eq!(s.mass, m0, epsilon = 1e-9);
        }
    }

    #[test]
    fn burgers_profile_converges_at_half_rate() {
        // an odd perturbation on top of a small Gaussian decays at the
        // slowest nonzero similarity rate, giving a fitted rate near 1/2
        let cfg = small_grid();
        let xi = cfg.grid();
        let vals: Vec<f64> = xi
            .iter()
            .map(|&x| 0.5 * heat_kernel(x) + 0.1 * eval_eigenfunction(1, x))
            .collect();
        let u0 = BurgersState::from_values(0.0, &cfg, vals).unwrap();
        let spectrum = NoiseSpectrum::new(vec![0.0], true).unwrap();
        let n_steps = (16.0 / cfg.dt).round() as usize;
        let every = (0.5 / cfg.dt).round() as usize;
        let traj = run_similarity(
            &u0,
            &cfg,
            &spectrum,
            SimilarityKind::Burgers,
            n_steps,
            every,
            0,
            0,
        )
        .unwrap();
        let reference = traj.last().unwrap();
        let mut taus = Vec::new();
        let mut lognorm = Vec::new();
        for s in &traj {
            if s.time < 2.0 - 1e-9 || s.time > 8.0 + 1e-9 {
                continue;
            }
            let diff: Vec<f64> = s
                .values
                .iter()
                .zip(&reference.values)
                .map(|(a, b)| a - b)
                .collect();
            let nrm = weighted_norm(&xi, &diff, NormKind::L2K);
            taus.push(s.time);
            lognorm.push(nrm.ln());
        }
        let (slope, _) = ls_line(&taus, &lognorm);
        let rate = -slope;
        assert!(
            (0.4..=0.6).contains(&rate),
            "fitted decay rate {rate} outside [0.4, 0.6]"
        );
    }

    #[test]
    fn doubling_resolution_quarters_the_error() {
        let run = |n: usize, dt: f64| -> BurgersState {
            let cfg = GridConfig::new(12.0, n, dt, Scheme::Similarity).unwrap();
            let u0 = gaussian_state(&cfg, 0.8);
            let spectrum = NoiseSpectrum::new(vec![0.0], true).unwrap();
            let n_steps = (1.0 / dt).round() as usize;
            run_similarity(
                &u0,
                &cfg,
                &spectrum,
                SimilarityKind::Burgers,
                n_steps,
                n_steps,
                0,
                0,
            )
            .unwrap()
            .pop()
            .unwrap()
        };
        // nested grids: every node of the coarse grid is a node of the
        // fine one, and every step count divides the horizon exactly
        let fine = run(1537, 6.25e-5);
        let coarse = run(193, 5.0e-3);
        let mid = run(385, 1.25e-3);
        let err = |s: &BurgersState, stride: usize| -> f64 {
            s.values
                .iter()
                .enumerate()
                .map(|(i, v)| (v - fine.values[i * stride]).abs())
                .fold(0.0, f64::max)
        };
        let e_coarse = err(&coarse, 8);
        let e_mid = err(&mid, 4);
        assert!(
            e_coarse / e_mid >= 3.5,
            "error ratio {} below second-order expectation",
            e_coarse / e_mid
        );
    }

    #[test]
    fn physical_solver_tracks_similarity_solver() {
        // identical release at t = 1, evolved in each frame and compared
        // through the static frame change at a later time
        let sim_cfg = small_grid();
        let phys_cfg = GridConfig::new(60.0, 1921, 1.25e-3, Scheme::Physical).unwrap();
        let amp = 0.8;
        let u0_sim = gaussian_state(&sim_cfg, amp);
        let x = phys_cfg.grid();
        let phys_vals: Vec<f64> = x.iter().map(|&xx| amp * heat_kernel(xx)).collect();
        let u0_phys = BurgersState::from_values(1.0, &phys_cfg, phys_vals).unwrap();
        let spectrum = NoiseSpectrum::new(vec![0.0], true).unwrap();

        let t_end = 2.25f64;
        let tau_end = t_end.ln();
        let n_sim = (tau_end / sim_cfg.dt).ceil() as usize;
        let sim_cfg = GridConfig::new(12.0, 385, tau_end / n_sim as f64, Scheme::Similarity).unwrap();
        let sim = run_similarity(
            &u0_sim,
            &sim_cfg,
            &spectrum,
            SimilarityKind::Burgers,
            n_sim,
            n_sim,
            0,
            0,
        )
        .unwrap();
        let n_phys = ((t_end - 1.0) / phys_cfg.dt).round() as usize;
        let phys = run_physical(&u0_phys, &phys_cfg, &spectrum, n_phys, n_phys, 0, 0).unwrap();

        let sim_final = sim.last().unwrap();
        let phys_final = phys.last().unwrap();
        assert_relative_eq!(phys_final.time, t_end, max_relative = 1e-12);
        let field = crate::frames::PhysicalField::new(
            phys_final.time,
            x.clone(),
            phys_final.values.clone(),
        )
        .unwrap();
        let xi = sim_cfg.grid();
        let on_xi = crate::frames::to_similarity_on(&field, &xi).unwrap();
        let peak = sim_final.max_abs();
        let worst = xi
            .iter()
            .enumerate()
            .map(|(i, _)| (on_xi.values[i] - sim_final.values[i]).abs())
            .fold(0.0, f64::max);
        assert!(
            worst / peak <= 1e-3,
            "relative frame mismatch {} above 1e-3",
            worst / peak
        );
    }

    #[test]
    fn physical_mass_matches_forcing_accumulation() {
        let cfg = GridConfig::new(60.0, 961, 1.5e-3, Scheme::Physical).unwrap();
        let u0 = {
            let vals: Vec<f64> = cfg.grid().iter().map(|&x| 0.5 * heat_kernel(x)).collect();
            BurgersState::from_values(1.0, &cfg, vals).unwrap()
        };
        // non-conservative: mode 0 carries mass in and out
        let spectrum = NoiseSpectrum::new(vec![0.2, 0.1, 0.1], false).unwrap();
        let n_steps = 400;
        let traj = run_physical(&u0, &cfg, &spectrum, n_steps, 1, 3, 0).unwrap();
        // replay the same draws and accumulate the forcing integral
        let x = cfg.grid();
        let h = cfg.spacing();
        let mut streams: Vec<ModeStream> = (0..3)
            .map(|m| ModeStream::new(3, 0, m, 1.0).unwrap())
            .collect();
        let mut t = 1.0;
        let mut forced = 0.0;
        for _ in 0..n_steps {
            let draws: Vec<f64> = streams.iter_mut().map(|s| s.next_increment()).collect();
            let scale = (cfg.dt / t).sqrt() / t.sqrt();
            let root_t = t.sqrt();
            let mut sum = 0.0;
            for (i, &xx) in x.iter().enumerate() {
                if i == 0 || i == x.len() - 1 {
                    continue;
                }
                let e = crate::hermite::eval_basis(2, xx / root_t);
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += spectrum.amplitudes()[k] * draws[k] * e[k];
                }
                sum += scale * acc;
            }
            forced += h * sum;
            t += cfg.dt;
        }
        let drift = traj.last().unwrap().mass - traj[0].mass;
        assert_abs_diff_eq!(drift, forced, epsilon = 1e-6);
    }

    #[test]
    fn transform_vanishes_with_the_field_and_stays_first_order_close() {
        let cfg = small_grid();
        let xi = cfg.grid();
        let zeros = vec![0.0; cfg.n_points];
        assert!(cole_hopf(&xi, &zeros).iter().all(|v| *v == 0.0));

        let u: Vec<f64> = xi.iter().map(|&x| 0.1 * heat_kernel(x)).collect();
        let v = cole_hopf(&xi, &u);
        let h = cfg.spacing();
        let l1 = h * u.iter().map(|x| x.abs()).sum::<f64>();
        let sup = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        // first order: V - U = -U c/2 with c the running integral, so the
        // sup deviation is below sup|U| l1 / 2 everywhere, and at the
        // symmetry point (c = l1/2) it is sup|U| l1 / 4
        let worst = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 0.5 * sup * l1 * (1.0 + 1e-6));
        let mid = xi.len() / 2;
        assert_relative_eq!(
            (u[mid] - v[mid]).abs(),
            0.25 * sup * l1,
            max_relative = 0.03
        );
    }

    #[test]
    fn weighted_norms_of_known_fields() {
        let cfg = GridConfig::similarity_default();
        let xi = cfg.grid();
        let e0: Vec<f64> = xi.iter().map(|&x| eval_eigenfunction(0, x)).collect();
        assert_abs_diff_eq!(weighted_norm(&xi, &e0, NormKind::L2K), 1.0, epsilon = 1e-6);
        let a = -0.37;
        let ag: Vec<f64> = xi.iter().map(|&x| a * heat_kernel(x)).collect();
        let c0 = normalizations(0)[0];
        assert_relative_eq!(
            weighted_norm(&xi, &ag, NormKind::L2K),
            a.abs() / c0,
            max_relative = 1e-6
        );
        assert!(weighted_norm(&xi, &vec![0.0; xi.len()], NormKind::H1K) == 0.0);
        assert_relative_eq!(
            weighted_norm(&xi, &ag, NormKind::Linf),
            a.abs() * heat_kernel(0.0),
            max_relative = 1e-12
        );
        // H1 dominates L2
        assert!(
            weighted_norm(&xi, &ag, NormKind::H1K) > weighted_norm(&xi, &ag, NormKind::L2K)
        );
    }

    #[test]
    fn paired_zero_noise_flows_contract_strictly() {
        let cfg = small_grid();
        let xi = cfg.grid();
        let u1: Vec<f64> = xi.iter().map(|&x| 0.6 * heat_kernel(x)).collect();
        let u2: Vec<f64> = xi
            .iter()
            .map(|&x| 0.6 * heat_kernel(x) + 0.2 * eval_eigenfunction(2, x))
            .collect();
        let s1 = BurgersState::from_values(0.0, &cfg, u1).unwrap();
        let s2 = BurgersState::from_values(0.0, &cfg, u2).unwrap();
        let spectrum = NoiseSpectrum::new(vec![0.0], true).unwrap();
        let every = (0.5 / cfg.dt).round() as usize;
        let n_steps = 6 * every;
        let run = |s: &BurgersState| {
            run_similarity(
                s,
                &cfg,
                &spectrum,
                SimilarityKind::Burgers,
                n_steps,
                every,
                0,
                0,
            )
            .unwrap()
        };
        let t1 = run(&s1);
        let t2 = run(&s2);
        let phi = contraction_diagnostic(&t1, &t2, &cfg).unwrap();
        for w in phi.windows(2) {
            assert!(w[1] < w[0], "pointwise gap failed to contract: {w:?}");
        }
        // the linearizing transform contracts as well
        let mut prev = f64::INFINITY;
        for (a, b) in t1.iter().zip(&t2) {
            let diff: Vec<f64> = a
                .values
                .iter()
                .zip(&b.values)
                .map(|(x, y)| x - y)
                .collect();
            let psi = weighted_norm(&xi, &cole_hopf(&xi, &diff), NormKind::L2K);
            assert!(psi < prev);
            prev = psi;
        }
    }

    #[test]
    fn contraction_rejects_unequal_mass() {
        let cfg = small_grid();
        let s1 = gaussian_state(&cfg, 0.5);
        let s2 = gaussian_state(&cfg, 0.6);
        let err = contraction_diagnostic(&[s1.clone()], &[s2], &cfg).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
        assert!(contraction_diagnostic(&[s1.clone()], &[s1], &cfg).is_ok());
    }

    #[test]
    fn cubic_amplitude_follows_slow_decay() {
        let cfg = small_grid();
        let u0 = gaussian_state(&cfg, 1.0);
        let spectrum = NoiseSpectrum::new(vec![0.0], true).unwrap();
        let n_steps = (2.0 / cfg.dt).round() as usize;
        let traj = run_similarity(
            &u0,
            &cfg,
            &spectrum,
            SimilarityKind::ReactionDiffusion,
            n_steps,
            n_steps,
            0,
            0,
        )
        .unwrap();
        let xi = cfg.grid();
        let spec = crate::hermite::BasisSpec::new(8, 24).unwrap();
        let a0 = crate::hermite::project_field(&xi, &traj[0].values, &spec)
            .unwrap()
            .coeffs[0];
        let a2 = crate::hermite::project_field(&xi, &traj.last().unwrap().values, &spec)
            .unwrap()
            .coeffs[0];
        let predicted = crate::slow_manifold::cubic_decay(a0, 2.0);
        assert_relative_eq!(a2, predicted, max_relative = 0.02);
    }

    #[test]
    fn sup_norm_bounded_by_initial_peak_plus_noise_envelope() {
        let cfg = small_grid();
        let u0 = gaussian_state(&cfg, 0.5);
        let amps = vec![0.0, 0.1, 0.1, 0.05, 0.05];
        let spectrum = NoiseSpectrum::new(amps.clone(), true).unwrap();
        let n_steps = (3.0 / cfg.dt).round() as usize;
        let every = 40;
        let seed = 8;
        let traj = run_similarity(
            &u0,
            &cfg,
            &spectrum,
            SimilarityKind::Burgers,
            n_steps,
            every,
            seed,
            0,
        )
        .unwrap();

        // rebuild the linear noise envelope from the identical draws
        let probe: Vec<f64> = (0..193).map(|i| -12.0 + i as f64 * (24.0 / 192.0)).collect();
        let basis: Vec<Vec<f64>> = probe
            .iter()
            .map(|&x| crate::hermite::eval_basis(4, x))
            .collect();
        let mut streams: Vec<ModeStream> = (0..5)
            .map(|m| ModeStream::new(seed, 0, m, cfg.dt).unwrap())
            .collect();
        let mut z = vec![0.0f64; 5];
        let factors: Vec<(f64, f64)> = (0..5)
            .map(|k| crate::noise::ou_exact_factors(k as f64 / 2.0, cfg.dt))
            .collect();
        let mut envelope = 0.0f64;
        let mut max_by_step = vec![0.0f64; n_steps + 1];
        for step in 0..n_steps {
            for k in 0..5 {
                let dw = streams[k].next_increment();
                let (dec, gam) = factors[k];
                z[k] = dec * z[k] + gam * dw;
            }
            let eta_max = probe
                .iter()
                .enumerate()
                .map(|(i, _)| {
                    let mut acc = 0.0;
                    for k in 0..5 {
                        acc += amps[k] * z[k] * basis[i][k];
                    }
                    acc.abs()
                })
                .fold(0.0, f64::max);
            envelope = envelope.max(eta_max);
            max_by_step[step + 1] = envelope;
        }
        let peak0 = u0.max_abs();
        for (j, s) in traj.iter().enumerate().skip(1) {
            let step = (j * every).min(n_steps);
            let bound = peak0 + max_by_step[step];
            // small slack absorbs spatial discretization of the envelope
            assert!(
                s.max_abs() <= bound + 1e-3,
                "sup {} above envelope bound {} at sample {}",
                s.max_abs(),
                bound,
                j
            );
        }
    }
}
