//! Experiment configs, deterministic batch runners, and result bundles.
//!
//! Every capability of the crate is exposed as a named experiment driven
//! by one declarative TOML config. A run validates the config, distributes
//! paths over a worker pool, folds statistics in canonical path order so
//! the output is independent of the thread count, and writes one metadata
//! file plus plain CSV series. Rerunning the echoed config reproduces all
//! series bit-identically.

use crate::frames::to_similarity;
use crate::galerkin::{cubic_projection_tensor, integrate_modal, CubicTensor, ModalState};
use crate::hermite::{
    eval_basis, eval_eigenfunction, normalizations, similarity_generator, BasisSpec,
};
use crate::mixing::{
    check_slaving, frame_heun_step, gaussian_release, mean_diff_transform, periodic_grid,
    step_pipes, MeanDiff, PipePair, SpectralShifter,
};
use crate::noise::{ModeStream, NoiseSpectrum};
use crate::origin_tracking::{build_origin_path, build_pseudotime_path, simulate_compensated_modes};
use crate::pde_sim::{
    run_similarity, weighted_norm, BurgersState, GridConfig, NormKind, Scheme, SimilarityKind,
};
use crate::slow_manifold::{
    cubic_decay, integrate_transformed, residual_identity_control, residual_order_check,
    residual_slope, Memory, MemoryScheme, NormalFormState, SlowModel,
};
use crate::stats::{bootstrap_slope_ci, ls_line, Welford};
use crate::{pde_sim, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Registered experiments with one-line descriptions.
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "burgers-similarity",
        "stochastic Burgers flow in similarity variables, profile convergence rate",
    ),
    (
        "burgers-physical",
        "stochastic Burgers flow in physical variables with decaying forcing",
    ),
    (
        "rd-similarity",
        "cubic reaction-diffusion flow in similarity variables, amplitude decay",
    ),
    (
        "modal-linear",
        "linear mode system: spectral gap and stationary mode variances",
    ),
    (
        "modal-cubic",
        "cubic mode system: nonlinear amplitude decay of the truncated flow",
    ),
    (
        "slow-model",
        "one-mode slow model with noise-induced drift correction",
    ),
    (
        "normal-form-residual",
        "fourth-order residual of the near-identity mode transformation",
    ),
    (
        "origin-compensation",
        "moving-origin and time-reparametrization compensation of forced modes",
    ),
    (
        "pseudotime-moments",
        "real-time vs pseudo-time moments, fluctuation growth, reversals",
    ),
    (
        "mixing-spread",
        "two-pipe mixing: eddy-diffusive spreading and pseudo-time growth",
    ),
    (
        "mixing-slaving",
        "two-pipe mixing: difference field slaving to the mean gradient",
    ),
];

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

/// Optional per-experiment parameters. Unknown keys are rejected at parse
/// time; keys that an experiment does not use are rejected at validation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Noise mode amplitudes `b_0, b_1, ...`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<f64>>,
    /// Whether the noise must conserve mass (forces `b_0 = 0`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conservative: Option<bool>,
    /// Initial slow amplitude or mass coefficient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    /// Initial mode coefficients for mode-system experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<f64>>,
    /// Integration horizon (log-time, physical duration, or pseudo-time,
    /// depending on the experiment).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Time step of the integrator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Half-width of the spatial domain.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    /// Number of spatial grid points.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// Record every this many steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_every: Option<usize>,
    /// Start time (physical solver) or pseudo-time offset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    /// Index of the perturbed mode in the initial field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb_mode: Option<usize>,
    /// Amplitude of the initial perturbation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb_amp: Option<f64>,
    /// Lower edge of the rate-fit window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_start: Option<f64>,
    /// Upper edge of the rate-fit window.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_end: Option<f64>,
    /// Scale ladder for the residual order check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    /// Origin-drift noise amplitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b1: Option<f64>,
    /// Time-reparametrization noise amplitude.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b2: Option<f64>,
    /// Whether frame compensation is active.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compensation: Option<bool>,
    /// Variance of the initial release in mixing experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub release_variance: Option<f64>,
}

impl Params {
    /// Names of the fields that are set, for per-experiment screening.
    fn set_keys(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        macro_rules! track {
            ($field:ident) => {
                if self.$field.is_some() {
                    keys.push(stringify!($field));
                }
            };
        }
        track!(amplitudes);
        track!(conservative);
        track!(a0);
        track!(initial);
        track!(horizon);
        track!(dt);
        track!(half_width);
        track!(n_points);
        track!(sample_every);
        track!(t0);
        track!(perturb_mode);
        track!(perturb_amp);
        track!(fit_start);
        track!(fit_end);
        track!(scales);
        track!(b1);
        track!(b2);
        track!(compensation);
        track!(release_variance);
        keys
    }

    /// Checks the generic value constraints of every set field.
    fn validate_values(&self) -> Result<()> {
        fn positive(name: &str, v: Option<f64>) -> Result<()> {
            if let Some(x) = v {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::Config(format!("{name} must be positive, got {x}")));
                }
            }
            Ok(())
        }
        fn finite(name: &str, v: Option<f64>) -> Result<()> {
            if let Some(x) = v {
                if !x.is_finite() {
                    return Err(Error::Config(format!("{name} must be finite, got {x}")));
                }
            }
            Ok(())
        }
        fn nonnegative(name: &str, v: Option<f64>) -> Result<()> {
            if let Some(x) = v {
                if !(x >= 0.0 && x.is_finite()) {
                    return Err(Error::Config(format!(
                        "{name} must be finite and nonnegative, got {x}"
                    )));
                }
            }
            Ok(())
        }
        if let Some(b) = &self.amplitudes {
            if b.is_empty() || b.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::Config(
                    "amplitudes must be a nonempty list of finite nonnegative values".into(),
                ));
            }
        }
        if let Some(u) = &self.initial {
            if u.is_empty() || u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(
                    "initial must be a nonempty list of finite values".into(),
                ));
            }
        }
        finite("a0", self.a0)?;
        positive("horizon", self.horizon)?;
        positive("dt", self.dt)?;
        positive("half_width", self.half_width)?;
        positive("t0", self.t0)?;
        finite("perturb_amp", self.perturb_amp)?;
        finite("fit_start", self.fit_start)?;
        finite("fit_end", self.fit_end)?;
        if let (Some(a), Some(b)) = (self.fit_start, self.fit_end) {
            if !(a < b) {
                return Err(Error::Config(format!(
                    "fit window must be increasing, got [{a}, {b}]"
                )));
            }
        }
        if let Some(s) = &self.scales {
            if s.is_empty() || s.iter().any(|v| !(*v > 0.0 && *v <= 0.3)) {
                return Err(Error::Config(
                    "scales must be a nonempty list inside (0, 0.3]".into(),
                ));
            }
        }
        nonnegative("b1", self.b1)?;
        nonnegative("b2", self.b2)?;
        positive("release_variance", self.release_variance)?;
        if self.n_points == Some(0) {
            return Err(Error::Config("n_points must be positive".into()));
        }
        if self.sample_every == Some(0) {
            return Err(Error::Config("sample_every must be positive".into()));
        }
        Ok(())
    }
}

/// A fully declarative experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registered experiment name.
    pub experiment: String,
    /// Base seed of all noise streams.
    #[serde(default)]
    pub seed: u64,
    /// Ensemble size; each experiment has its own default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    /// Worker threads; the pool default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Directory that receives the result bundle.
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Experiment parameters.
    #[serde(default)]
    pub params: Params,
}

fn allowed_params(experiment: &str) -> &'static [&'static str] {
    match experiment {
        "burgers-similarity" | "rd-similarity" => &[
            "amplitudes",
            "conservative",
            "a0",
            "horizon",
            "dt",
            "half_width",
            "n_points",
            "sample_every",
            "perturb_mode",
            "perturb_amp",
            "fit_start",
            "fit_end",
        ],
        "burgers-physical" => &[
            "amplitudes",
            "conservative",
            "a0",
            "horizon",
            "dt",
            "half_width",
            "n_points",
            "sample_every",
            "t0",
            "perturb_mode",
            "perturb_amp",
        ],
        "modal-linear" | "modal-cubic" => &[
            "amplitudes",
            "conservative",
            "initial",
            "horizon",
            "dt",
            "sample_every",
        ],
        "slow-model" => &[
            "amplitudes",
            "a0",
            "horizon",
            "dt",
            "sample_every",
            "fit_start",
            "fit_end",
        ],
        "normal-form-residual" => &["scales"],
        "origin-compensation" => &["a0", "amplitudes", "horizon", "dt", "sample_every", "compensation"],
        "pseudotime-moments" => &["t0", "a0", "b1", "b2", "horizon", "dt"],
        "mixing-spread" => &[
            "half_width",
            "n_points",
            "dt",
            "horizon",
            "release_variance",
            "sample_every",
            "fit_start",
            "fit_end",
        ],
        "mixing-slaving" => &[
            "half_width",
            "n_points",
            "dt",
            "horizon",
            "release_variance",
            "sample_every",
        ],
        _ => &[],
    }
}

impl ExperimentConfig {
    /// Parses a config from TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Reads and parses a config file. An unreadable path is a
    /// configuration error, not a runtime abort.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Serializes the config back to TOML.
    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Validates every field before any computation: the experiment must
    /// be registered, counts positive, every set parameter both within its
    /// value constraints and actually used by the experiment.
    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.iter().any(|(name, _)| *name == self.experiment) {
            return Err(Error::Config(format!(
                "unknown experiment '{}'; see `similab list`",
                self.experiment
            )));
        }
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config(
                "seed must fit a signed 64-bit integer so result metadata can echo it".into(),
            ));
        }
        if self.paths == Some(0) {
            return Err(Error::Config("paths must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.params.validate_values()?;
        let allowed = allowed_params(&self.experiment);
        for key in self.params.set_keys() {
            if !allowed.contains(&key) {
                return Err(Error::Config(format!(
                    "parameter '{key}' is not used by experiment '{}'",
                    self.experiment
                )));
            }
        }
        Ok(())
    }
}

/// One named series table; rows are written to `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SeriesTable {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            w.write_record(&fields)?;
        }
        w.flush()?;
        Ok(())
    }

    fn read_csv(name: &str, path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let columns: Vec<String> = r
            .headers()?
            .iter()
            .map(|h| h.to_string())
            .collect();
        let mut rows = Vec::new();
        for record in r.records() {
            let record = record?;
            let row: std::result::Result<Vec<f64>, _> =
                record.iter().map(|f| f.parse::<f64>()).collect();
            rows.push(row.map_err(|e| {
                Error::ContractViolation(format!("malformed float in {name}.csv: {e}"))
            })?);
        }
        Ok(Self {
            name: name.to_string(),
            columns,
            rows,
        })
    }
}

/// A complete experiment result: config echo, series, and summary.
#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub experiment: String,
    pub version: String,
    pub wall_seconds: f64,
    pub config: ExperimentConfig,
    pub series: Vec<SeriesTable>,
    pub summary: Vec<(String, f64)>,
}

#[derive(Serialize, Deserialize)]
struct MetadataFile {
    metadata: MetadataBlock,
    config: ExperimentConfig,
    summary: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct MetadataBlock {
    experiment: String,
    version: String,
    wall_seconds: f64,
    series: Vec<String>,
}

impl ResultBundle {
    /// Writes `metadata.toml` plus one CSV per series into
    /// `<dir>/<experiment>/` and returns that directory.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let bundle_dir = dir.join(&self.experiment);
        std::fs::create_dir_all(&bundle_dir)?;
        let meta = MetadataFile {
            metadata: MetadataBlock {
                experiment: self.experiment.clone(),
                version: self.version.clone(),
                wall_seconds: self.wall_seconds,
                series: self.series.iter().map(|s| s.name.clone()).collect(),
            },
            config: self.config.clone(),
            summary: self.summary.iter().cloned().collect(),
        };
        std::fs::write(
            bundle_dir.join("metadata.toml"),
            toml::to_string_pretty(&meta)?,
        )?;
        for table in &self.series {
            table.write_csv(&bundle_dir.join(format!("{}.csv", table.name)))?;
        }
        Ok(bundle_dir)
    }

    /// Reads a bundle back from a directory written by [`ResultBundle::write`].
    pub fn read(bundle_dir: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(bundle_dir.join("metadata.toml"))?;
        let meta: MetadataFile = toml::from_str(&text)?;
        let mut series = Vec::new();
        for name in &meta.metadata.series {
            series.push(SeriesTable::read_csv(
                name,
                &bundle_dir.join(format!("{name}.csv")),
            )?);
        }
        Ok(Self {
            experiment: meta.metadata.experiment,
            version: meta.metadata.version,
            wall_seconds: meta.metadata.wall_seconds,
            config: meta.config,
            series,
            summary: meta.summary.into_iter().collect(),
        })
    }
}

/// A fitted decay rate with a bootstrap confidence interval.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Least-squares decay rate of `log(values)` against `taus` on a window,
/// with a 95% percentile bootstrap interval from 200 resamples. Refused
/// when the window holds fewer than three samples or any non-positive
/// value.
pub fn fit_rate(taus: &[f64], values: &[f64], window: (f64, f64)) -> Result<RateFit> {
    if taus.len() != values.len() {
        return Err(Error::InvalidSpec(format!(
            "rate fit needs matching lengths, got {} and {}",
            taus.len(),
            values.len()
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (&t, &v) in taus.iter().zip(values) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(v > 0.0) {
            return Err(Error::FitRefused(format!(
                "non-positive value {v} at time {t} inside the fit window"
            )));
        }
        x.push(t);
        y.push(v.ln());
    }
    if x.len() < 3 {
        return Err(Error::FitRefused(format!(
            "only {} samples inside the fit window [{}, {}]",
            x.len(),
            window.0,
            window.1
        )));
    }
    let (rate, _) = ls_line(&x, &y);
    let (ci_lo, ci_hi) = bootstrap_slope_ci(&x, &y, 200, 0.95, 0x5241_5445);
    Ok(RateFit { rate, ci_lo, ci_hi })
}

/// Wall-clock budget of one experiment, enforced between work chunks.
struct Budget {
    start: Instant,
    limit_seconds: f64,
    experiment: String,
}

impl Budget {
    fn new(experiment: &str) -> Self {
        Self {
            start: Instant::now(),
            limit_seconds: 300.0,
            experiment: experiment.to_string(),
        }
    }

    fn check(&self) -> Result<()> {
        let elapsed = self.start.elapsed().as_secs_f64();
        if elapsed > self.limit_seconds {
            return Err(Error::BudgetExceeded {
                experiment: self.experiment.clone(),
                elapsed,
                budget: self.limit_seconds,
            });
        }
        Ok(())
    }
}

/// Runs `f` once per path in parallel chunks, returning results in path
/// order regardless of the thread count, with budget checks between
/// chunks.
fn ensemble<T: Send>(
    n_paths: usize,
    budget: &Budget,
    f: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    const CHUNK: usize = 64;
    let mut out = Vec::with_capacity(n_paths);
    let mut next = 0usize;
    while next < n_paths {
        budget.check()?;
        let hi = (next + CHUNK).min(n_paths);
        let part: Result<Vec<T>> = (next..hi).into_par_iter().map(|p| f(p as u64)).collect();
        out.extend(part?);
        next = hi;
    }
    Ok(out)
}

type Output = (Vec<SeriesTable>, Vec<(String, f64)>);

/// Validates the config, dispatches the experiment onto a worker pool,
/// writes the bundle under the configured output directory, and returns
/// it.
pub fn run(config: &ExperimentConfig) -> Result<ResultBundle> {
    config.validate()?;
    let budget = Budget::new(&config.experiment);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::ContractViolation(format!("worker pool: {e}")))?;
    let (series, summary) = pool.install(|| dispatch(config, &budget))?;
    let bundle = ResultBundle {
        experiment: config.experiment.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_seconds: budget.start.elapsed().as_secs_f64(),
        config: config.clone(),
        series,
        summary,
    };
    bundle.write(&config.out_dir)?;
    Ok(bundle)
}

fn dispatch(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    match config.experiment.as_str() {
        "burgers-similarity" => run_grid_similarity(config, budget, SimilarityKind::Burgers),
        "rd-similarity" => run_grid_similarity(config, budget, SimilarityKind::ReactionDiffusion),
        "burgers-physical" => run_grid_physical(config, budget),
        "modal-linear" => run_modal(config, budget, false),
        "modal-cubic" => run_modal(config, budget, true),
        "slow-model" => run_slow_model(config, budget),
        "normal-form-residual" => run_residual(config),
        "origin-compensation" => run_origin_compensation(config, budget),
        "pseudotime-moments" => run_pseudotime_moments(config, budget),
        "mixing-spread" => run_mixing_spread(config, budget),
        "mixing-slaving" => run_mixing_slaving(config, budget),
        other => Err(Error::Config(format!("unknown experiment '{other}'"))),
    }
}

fn spectrum_from(params: &Params, default_amps: &[f64]) -> Result<NoiseSpectrum> {
    let amps = params
        .amplitudes
        .clone()
        .unwrap_or_else(|| default_amps.to_vec());
    NoiseSpectrum::new(amps, params.conservative.unwrap_or(true))
}

fn mass_coefficient() -> f64 {
    normalizations(0)[0]
}

// ---------------------------------------------------------------- grid

fn initial_profile(xi: &[f64], a0: f64, mode: usize, amp: f64) -> Vec<f64> {
    xi.iter()
        .map(|&x| a0 * eval_eigenfunction(0, x) / mass_coefficient() + amp * eval_eigenfunction(mode, x))
        .collect()
}

fn run_grid_similarity(
    config: &ExperimentConfig,
    budget: &Budget,
    kind: SimilarityKind,
) -> Result<Output> {
    let burgers = kind == SimilarityKind::Burgers;
    let p = &config.params;
    let half_width = p.half_width.unwrap_or(12.0);
    let n_points = p.n_points.unwrap_or(769);
    let dt = p.dt.unwrap_or(3.75e-4);
    let horizon = p.horizon.unwrap_or(if burgers { 10.0 } else { 4.0 });
    let a0 = p.a0.unwrap_or(if burgers { 0.5 } else { 0.3 });
    let perturb_mode = p.perturb_mode.unwrap_or(1);
    let perturb_amp = p.perturb_amp.unwrap_or(0.1);
    let sample_every = p.sample_every.unwrap_or(400);
    let n_paths = config.paths.unwrap_or(if burgers { 1 } else { 4 });
    // quiet by default so the reported rate is the clean spectral one;
    // noisy runs set `amplitudes` explicitly
    let spectrum = spectrum_from(p, &[0.0])?;
    let cfg = GridConfig::new(half_width, n_points, dt, Scheme::Similarity)?;
    let n_steps = (horizon / dt).round().max(1.0) as usize;

    let xi = cfg.grid();
    let u0 = BurgersState::from_values(
        0.0,
        &cfg,
        initial_profile(&xi, a0, perturb_mode, perturb_amp),
    )?;

    let per_path = ensemble(n_paths, budget, |path| {
        let frames = run_similarity(
            &u0,
            &cfg,
            &spectrum,
            kind,
            n_steps,
            sample_every,
            config.seed,
            path,
        )?;
        // the terminal snapshot stands in for the limiting profile; the
        // rate window must end well before it
        let last = frames.last().expect("at least the initial state");
        let rows: Vec<(f64, f64, f64, f64)> = frames
            .iter()
            .map(|s| {
                let dev: Vec<f64> = s
                    .values
                    .iter()
                    .zip(&last.values)
                    .map(|(u, t)| u - t)
                    .collect();
                let dist = weighted_norm(&xi, &dev, NormKind::L2K);
                let amp = s.mass / mass_coefficient();
                (s.time, dist, s.mass, amp)
            })
            .collect();
        Ok(rows)
    })?;

    let n_samples = per_path[0].len();
    let mut table = SeriesTable::new(
        "profile",
        &["tau", "mean_deviation", "mean_mass", "mean_amplitude"],
    );
    let mut taus = Vec::with_capacity(n_samples);
    let mut mean_dev = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let mut dev = Welford::new();
        let mut mass = Welford::new();
        let mut amp = Welford::new();
        for rows in &per_path {
            dev.push(rows[j].1);
            mass.push(rows[j].2);
            amp.push(rows[j].3);
        }
        let tau = per_path[0][j].0;
        taus.push(tau);
        mean_dev.push(dev.mean());
        table.push(vec![tau, dev.mean(), mass.mean(), amp.mean()]);
    }

    let mut summary = Vec::new();
    let final_row = table.rows.last().expect("at least one sample").clone();
    summary.push(("final_mean_mass".into(), final_row[2]));
    summary.push(("final_mean_amplitude".into(), final_row[3]));
    let mass0 = u0.mass;
    let drift = per_path
        .iter()
        .flat_map(|rows| rows.iter().map(|r| (r.2 - mass0).abs()))
        .fold(0.0f64, f64::max);
    summary.push(("max_mass_drift".into(), drift));
    if burgers {
        let window = (p.fit_start.unwrap_or(2.0), p.fit_end.unwrap_or(6.0));
        let fit = fit_rate(&taus, &mean_dev, window)?;
        summary.push(("deviation_rate".into(), fit.rate));
        summary.push(("deviation_rate_ci_lo".into(), fit.ci_lo));
        summary.push(("deviation_rate_ci_hi".into(), fit.ci_hi));
    } else {
        let predicted = cubic_decay(u0.mass / mass_coefficient(), horizon);
        summary.push(("predicted_final_amplitude".into(), predicted));
    }
    Ok((vec![table], summary))
}

fn run_grid_physical(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let half_width = p.half_width.unwrap_or(60.0);
    let n_points = p.n_points.unwrap_or(1921);
    let dt = p.dt.unwrap_or(1.5e-3);
    let t0 = p.t0.unwrap_or(1.0);
    let horizon = p.horizon.unwrap_or(19.0);
    let a0 = p.a0.unwrap_or(0.5);
    let perturb_mode = p.perturb_mode.unwrap_or(1);
    let perturb_amp = p.perturb_amp.unwrap_or(0.1);
    let sample_every = p.sample_every.unwrap_or(500);
    let n_paths = config.paths.unwrap_or(4);
    let spectrum = spectrum_from(p, &[0.0, 0.05, 0.03])?;
    let cfg = GridConfig::new(half_width, n_points, dt, Scheme::Physical)?;
    let n_steps = (horizon / dt).round().max(1.0) as usize;

    // the start profile is the similarity profile carried to time t0
    let x = cfg.grid();
    let values: Vec<f64> = x
        .iter()
        .map(|&xv| {
            let xi = xv / t0.sqrt();
            (a0 * eval_eigenfunction(0, xi) / mass_coefficient()
                + perturb_amp * eval_eigenfunction(perturb_mode, xi))
                / t0.sqrt()
        })
        .collect();
    let u0 = BurgersState::from_values(t0, &cfg, values)?;

    let per_path = ensemble(n_paths, budget, |path| {
        let frames = pde_sim::run_physical(
            &u0,
            &cfg,
            &spectrum,
            n_steps,
            sample_every,
            config.seed,
            path,
        )?;
        let rows: Vec<(f64, f64, f64)> = frames
            .iter()
            .map(|s| {
                let phys =
                    crate::frames::PhysicalField::new(s.time, x.clone(), s.values.clone())?;
                let sim = to_similarity(&phys)?;
                let amp = s.mass / mass_coefficient();
                let sup = sim.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                Ok((s.time, amp, sup))
            })
            .collect::<Result<_>>()?;
        Ok(rows)
    })?;

    let n_samples = per_path[0].len();
    let mut table = SeriesTable::new("physical", &["t", "mean_amplitude", "mean_scaled_sup"]);
    for j in 0..n_samples {
        let mut amp = Welford::new();
        let mut sup = Welford::new();
        for rows in &per_path {
            amp.push(rows[j].1);
            sup.push(rows[j].2);
        }
        table.push(vec![per_path[0][j].0, amp.mean(), sup.mean()]);
    }
    let last = table.rows.last().expect("samples").clone();
    let summary = vec![
        ("final_time".into(), last[0]),
        ("final_mean_amplitude".into(), last[1]),
        ("final_mean_scaled_sup".into(), last[2]),
    ];
    Ok((vec![table], summary))
}

// --------------------------------------------------------------- modal

fn run_modal(config: &ExperimentConfig, budget: &Budget, reaction_on: bool) -> Result<Output> {
    let p = &config.params;
    let spectrum = spectrum_from(
        p,
        if reaction_on {
            &[0.0, 0.3, 0.2]
        } else {
            &[0.0, 1.0, 0.0]
        },
    )?;
    let n_modes = spectrum.n_modes();
    let initial = p.initial.clone().unwrap_or_else(|| {
        if reaction_on {
            let mut u = vec![0.0; n_modes];
            u[0] = 0.8;
            u
        } else {
            vec![0.0; n_modes]
        }
    });
    if initial.len() != n_modes {
        return Err(Error::Config(format!(
            "initial has {} entries but the spectrum has {n_modes} modes",
            initial.len()
        )));
    }
    let dtau = p.dt.unwrap_or(if reaction_on { 0.005 } else { 0.01 });
    let horizon = p.horizon.unwrap_or(if reaction_on { 6.0 } else { 12.0 });
    let sample_every = p.sample_every.unwrap_or(20);
    let n_paths = config.paths.unwrap_or(if reaction_on { 400 } else { 2000 });
    let n_steps = (horizon / dtau).round().max(1.0) as usize;
    let basis = BasisSpec::auto(n_modes - 1)?;
    let tensor = cubic_projection_tensor(&basis)?;
    let state0 = ModalState::new(0.0, initial)?;

    let per_path = ensemble(n_paths, budget, |path| {
        let traj = integrate_modal(
            &state0,
            &spectrum,
            &tensor,
            reaction_on,
            n_steps,
            dtau,
            config.seed,
            path,
        )?;
        let mut idx: Vec<usize> = (0..traj.len()).step_by(sample_every.max(1)).collect();
        if idx.last() != Some(&(traj.len() - 1)) {
            idx.push(traj.len() - 1);
        }
        let sampled: Vec<(f64, Vec<f64>)> =
            idx.iter().map(|&i| (traj[i].tau, traj[i].u.clone())).collect();
        Ok(sampled)
    })?;

    let n_samples = per_path[0].len();
    let mut amp_table = SeriesTable::new("amplitude", &["tau", "mean_amplitude", "var_amplitude"]);
    for j in 0..n_samples {
        let mut acc = Welford::new();
        for rows in &per_path {
            acc.push(rows[j].1[0]);
        }
        amp_table.push(vec![per_path[0][j].0, acc.mean(), acc.variance()]);
    }

    let mut mode_table = SeriesTable::new("mode_stats", &["mode", "final_mean", "final_variance"]);
    let mut summary = Vec::new();
    for k in 0..n_modes {
        let mut acc = Welford::new();
        for rows in &per_path {
            acc.push(rows[n_samples - 1].1[k]);
        }
        mode_table.push(vec![k as f64, acc.mean(), acc.variance()]);
        summary.push((format!("mode_{k}_final_variance"), acc.variance()));
    }
    summary.push((
        "final_mean_amplitude".into(),
        amp_table.rows.last().expect("samples")[1],
    ));
    Ok((vec![amp_table, mode_table], summary))
}

fn run_slow_model(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let spectrum = spectrum_from(p, &[0.0, 0.3])?;
    let a0 = p.a0.unwrap_or(0.05);
    let horizon = p.horizon.unwrap_or(25.0);
    let dtau = p.dt.unwrap_or(0.01);
    let sample_every = p.sample_every.unwrap_or(10).max(1);
    let n_paths = config.paths.unwrap_or(2000);
    let model = SlowModel::new(spectrum)?;
    let alpha = model.alpha();

    let per_path = ensemble(n_paths, budget, |path| {
        let traj = model.simulate_path(a0, horizon, dtau, config.seed, path)?;
        let sampled: Vec<f64> = traj.iter().copied().step_by(sample_every).collect();
        Ok(sampled)
    })?;

    let n_samples = per_path[0].len();
    let mut table = SeriesTable::new("slow", &["tau", "mean_amplitude", "var_amplitude"]);
    let mut taus = Vec::with_capacity(n_samples);
    let mut means = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let mut acc = Welford::new();
        for rows in &per_path {
            acc.push(rows[j]);
        }
        let tau = (j * sample_every) as f64 * dtau;
        taus.push(tau);
        means.push(acc.mean());
        table.push(vec![tau, acc.mean(), acc.variance()]);
    }

    let window = (p.fit_start.unwrap_or(5.0), p.fit_end.unwrap_or(horizon));
    let fit = fit_rate(&taus, &means, window)?;
    let summary = vec![
        ("alpha".into(), alpha),
        ("fitted_decay_rate".into(), -fit.rate),
        ("fitted_decay_ci_lo".into(), -fit.ci_hi),
        ("fitted_decay_ci_hi".into(), -fit.ci_lo),
        ("final_mean_amplitude".into(), *means.last().expect("samples")),
    ];
    Ok((vec![table], summary))
}

fn run_residual(config: &ExperimentConfig) -> Result<Output> {
    let scales = config
        .params
        .scales
        .clone()
        .unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let mut table = SeriesTable::new("residual", &["scale", "residual", "identity_residual"]);
    let mut residuals = Vec::new();
    let mut controls = Vec::new();
    for &eps in &scales {
        let r = residual_order_check(eps)?;
        let c = residual_identity_control(eps)?;
        residuals.push(r);
        controls.push(c);
        table.push(vec![eps, r, c]);
    }
    let slope = residual_slope(&scales, &residuals)?;
    let control_slope = residual_slope(&scales, &controls)?;
    let summary = vec![
        ("residual_slope".into(), slope),
        ("identity_control_slope".into(), control_slope),
    ];
    Ok((vec![table], summary))
}

// --------------------------------------------------------------- frames

fn run_origin_compensation(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let a = p.a0.unwrap_or(0.7);
    let spectrum = spectrum_from(p, &[0.0, 0.4, 0.3])?;
    let horizon = p.horizon.unwrap_or(10.0);
    let dtau = p.dt.unwrap_or(0.01);
    let sample_every = p.sample_every.unwrap_or(10).max(1);
    let compensation = p.compensation.unwrap_or(true);
    let n_paths = config.paths.unwrap_or(200);

    let per_path = ensemble(n_paths, budget, |path| {
        let traj = simulate_compensated_modes(
            a,
            &spectrum,
            horizon,
            dtau,
            config.seed,
            path,
            compensation,
        )?;
        let max1 = traj.iter().fold(0.0f64, |m, s| m.max(s[1].abs()));
        let max2 = traj.iter().fold(0.0f64, |m, s| m.max(s[2].abs()));
        let end = *traj.last().expect("trajectory");
        let sampled: Vec<[f64; 3]> = traj.iter().copied().step_by(sample_every).collect();
        Ok((max1, max2, end, sampled))
    })?;

    let n_samples = per_path[0].3.len();
    let mut table = SeriesTable::new("modes", &["tau", "rms_u1", "rms_u2"]);
    for j in 0..n_samples {
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        for (_, _, _, rows) in &per_path {
            s1 += rows[j][1] * rows[j][1];
            s2 += rows[j][2] * rows[j][2];
        }
        let n = per_path.len() as f64;
        table.push(vec![
            (j * sample_every) as f64 * dtau,
            (s1 / n).sqrt(),
            (s2 / n).sqrt(),
        ]);
    }

    let max_u1 = per_path.iter().fold(0.0f64, |m, r| m.max(r.0));
    let max_u2 = per_path.iter().fold(0.0f64, |m, r| m.max(r.1));
    let mut var1 = Welford::new();
    let mut var2 = Welford::new();
    for (_, _, end, _) in &per_path {
        var1.push(end[1]);
        var2.push(end[2]);
    }
    let summary = vec![
        ("max_abs_u1".into(), max_u1),
        ("max_abs_u2".into(), max_u2),
        ("final_var_u1".into(), var1.variance()),
        ("final_var_u2".into(), var2.variance()),
    ];
    Ok((vec![table], summary))
}

fn run_pseudotime_moments(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let t0 = p.t0.unwrap_or(1.0);
    let a = p.a0.unwrap_or(1.0);
    let b1 = p.b1.unwrap_or(0.3);
    let b2 = p.b2.unwrap_or(0.25);
    let t_end = p.horizon.unwrap_or(4.0);
    let dt = p.dt.unwrap_or(0.01);
    let n_paths = config.paths.unwrap_or(10_000);
    if a == 0.0 {
        return Err(Error::Config("a0 must be nonzero for frame paths".into()));
    }
    let n_intervals = (t_end / dt).round().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n_intervals)
        .map(|i| t_end * i as f64 / n_intervals as f64)
        .collect();
    let sample_stride = (n_intervals / 40).max(1);

    let per_path = ensemble(n_paths, budget, |path| {
        let origin = build_origin_path(a, b1, 0.0, &grid, config.seed, path)?;
        let pseudo = build_pseudotime_path(t0, a, b2, &grid, config.seed, path)?;
        let fluct = pseudo.fluctuations();
        let sampled: Vec<(f64, f64, f64)> = (0..grid.len())
            .step_by(sample_stride)
            .map(|i| (pseudo.t[i], fluct[i], origin.x[i]))
            .collect();
        let reversal = pseudo.reversals() as f64 / n_intervals as f64;
        Ok((sampled, reversal))
    })?;

    let n_samples = per_path[0].0.len();
    let mut table = SeriesTable::new(
        "moments",
        &[
            "big_t",
            "mean_real_time",
            "fluctuation_variance",
            "origin_variance",
        ],
    );
    let mut final_t = Welford::new();
    let mut final_fluct = Welford::new();
    let mut final_x = Welford::new();
    for j in 0..n_samples {
        let mut t_acc = Welford::new();
        let mut f_acc = Welford::new();
        let mut x_acc = Welford::new();
        for (rows, _) in &per_path {
            t_acc.push(rows[j].0);
            f_acc.push(rows[j].1);
            x_acc.push(rows[j].2);
        }
        let big_t = grid[j * sample_stride];
        table.push(vec![big_t, t_acc.mean(), f_acc.variance(), x_acc.variance()]);
        if j == n_samples - 1 {
            final_t = t_acc;
            final_fluct = f_acc;
            final_x = x_acc;
        }
    }
    let mut reversal = Welford::new();
    for (_, r) in &per_path {
        reversal.push(*r);
    }
    let big_t_last = grid[(n_samples - 1) * sample_stride];
    let summary = vec![
        ("big_t_final".into(), big_t_last),
        ("mean_real_time_final".into(), final_t.mean()),
        ("fluctuation_variance_final".into(), final_fluct.variance()),
        ("origin_variance_final".into(), final_x.variance()),
        ("reversal_fraction".into(), reversal.mean()),
        ("reversal_fraction_se".into(), reversal.std_error()),
    ];
    Ok((vec![table], summary))
}

// --------------------------------------------------------------- mixing

struct MixingDefaults {
    half_width: f64,
    n_points: usize,
    dt: f64,
}

fn mixing_defaults(p: &Params) -> MixingDefaults {
    MixingDefaults {
        half_width: p.half_width.unwrap_or(crate::mixing::DEFAULT_HALF_WIDTH),
        n_points: p.n_points.unwrap_or(crate::mixing::DEFAULT_N_POINTS),
        dt: p.dt.unwrap_or(crate::mixing::DEFAULT_DT),
    }
}

fn run_mixing_spread(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let d = mixing_defaults(p);
    let horizon = p.horizon.unwrap_or(50.0);
    let release_variance = p.release_variance.unwrap_or(1.0);
    let sample_every = p.sample_every.unwrap_or(100).max(1);
    let n_paths = config.paths.unwrap_or(1000);
    let n_steps = (horizon / d.dt).round().max(1.0) as usize;
    let n_samples = n_steps / sample_every;

    let per_path = ensemble(n_paths, budget, |path| {
        let x = periodic_grid(d.half_width, d.n_points);
        let u1 = gaussian_release(&x, 0.0, release_variance, 1.0);
        let u2 = vec![0.0; x.len()];
        let mut pair = PipePair::new(d.half_width, u1, u2)?;
        let mut shifter = SpectralShifter::new(d.n_points, d.half_width)?;
        let mut stream = ModeStream::new(config.seed, path, 0, d.dt)?;
        let (mut big_t, mut eta) = (1.0, 0.0);
        let mut reversals = 0usize;
        let mut rows = Vec::with_capacity(n_samples);
        for step in 1..=n_steps {
            let dw = stream.next_increment();
            step_pipes(&mut pair, &mut shifter, d.dt, dw)?;
            let (t_next, e_next) = frame_heun_step(big_t, eta, d.dt, dw);
            if t_next < big_t {
                reversals += 1;
            }
            big_t = t_next;
            eta = e_next;
            if step % sample_every == 0 {
                rows.push((pair.second_moment()?, big_t));
            }
        }
        Ok((rows, reversals as f64 / n_steps as f64))
    })?;

    let mut table = SeriesTable::new(
        "spread",
        &["t", "mean_second_moment", "mean_pseudo_time"],
    );
    let mut times = Vec::with_capacity(n_samples);
    let mut moments = Vec::with_capacity(n_samples);
    for j in 0..n_samples {
        let mut m_acc = Welford::new();
        let mut t_acc = Welford::new();
        for (rows, _) in &per_path {
            m_acc.push(rows[j].0);
            t_acc.push(rows[j].1);
        }
        let t = ((j + 1) * sample_every) as f64 * d.dt;
        times.push(t);
        moments.push(m_acc.mean());
        table.push(vec![t, m_acc.mean(), t_acc.mean()]);
    }

    let window = (p.fit_start.unwrap_or(5.0), p.fit_end.unwrap_or(horizon));
    let (xw, yw): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&moments)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, m)| (*t, *m))
        .unzip();
    if xw.len() < 3 {
        return Err(Error::FitRefused(
            "too few spread samples inside the fit window".into(),
        ));
    }
    let (slope, _) = ls_line(&xw, &yw);
    let (ci_lo, ci_hi) = bootstrap_slope_ci(&xw, &yw, 200, 0.95, 0x5350_5244);
    let mut reversal = Welford::new();
    for (_, r) in &per_path {
        reversal.push(*r);
    }
    let last = table.rows.last().expect("samples").clone();
    let summary = vec![
        ("spread_slope".into(), slope),
        ("spread_slope_ci_lo".into(), ci_lo),
        ("spread_slope_ci_hi".into(), ci_hi),
        ("mean_pseudo_time_gain".into(), last[2] - 1.0),
        ("final_time".into(), last[0]),
        ("reversal_fraction".into(), reversal.mean()),
        ("reversal_fraction_se".into(), reversal.std_error()),
    ];
    Ok((vec![table], summary))
}

fn run_mixing_slaving(config: &ExperimentConfig, budget: &Budget) -> Result<Output> {
    let p = &config.params;
    let d = mixing_defaults(p);
    let horizon = p.horizon.unwrap_or(30.0);
    let release_variance = p.release_variance.unwrap_or(2.0);
    let sample_every = p.sample_every.unwrap_or(20).max(1);
    let n_paths = config.paths.unwrap_or(200);
    let n_steps = (horizon / d.dt).round().max(1.0) as usize;

    let per_path = ensemble(n_paths, budget, |path| {
        let x = periodic_grid(d.half_width, d.n_points);
        let u1 = gaussian_release(&x, 0.0, release_variance, 1.0);
        let u2 = vec![0.0; x.len()];
        let mut pair = PipePair::new(d.half_width, u1, u2)?;
        let mut shifter = SpectralShifter::new(d.n_points, d.half_width)?;
        let mut stream = ModeStream::new(config.seed, path, 0, d.dt)?;
        let (mut big_t, mut eta) = (1.0, 0.0);
        let mut best = f64::NEG_INFINITY;
        let mut flagged = false;
        let mut traj: Vec<MeanDiff> = Vec::new();
        for step in 0..n_steps {
            let dw = stream.next_increment();
            step_pipes(&mut pair, &mut shifter, d.dt, dw)?;
            let (t_next, e_next) = frame_heun_step(big_t, eta, d.dt, dw);
            big_t = t_next;
            eta = e_next;
            if big_t <= 0.0 {
                flagged = true;
            }
            if big_t > best && big_t > 0.0 {
                best = big_t;
                if step % sample_every == 0 {
                    traj.push(mean_diff_transform(&pair, big_t, eta)?);
                }
            }
        }
        let report = check_slaving(&traj);
        let pair_result = report
            .taus
            .first()
            .zip(report.deviations.first())
            .and_then(|(&tau0, &dev0)| {
                report
                    .taus
                    .iter()
                    .zip(&report.deviations)
                    .find(|(t, _)| **t >= tau0 + 2.0)
                    .map(|(&tau1, &dev1)| (tau0, dev0, tau1, dev1))
            });
        Ok((pair_result, report.skipped, flagged))
    })?;

    let mut table = SeriesTable::new(
        "slaving",
        &["path", "tau_first", "dev_first", "tau_late", "dev_late", "drop"],
    );
    let mut drops = Vec::new();
    let mut skipped = 0usize;
    let mut flagged = 0usize;
    for (path, (pair_result, skip, flag)) in per_path.iter().enumerate() {
        skipped += skip;
        if *flag {
            flagged += 1;
        }
        if let Some((tau0, dev0, tau1, dev1)) = pair_result {
            let drop = dev0 / dev1;
            drops.push(drop);
            table.push(vec![path as f64, *tau0, *dev0, *tau1, *dev1, drop]);
        }
    }
    if drops.is_empty() {
        return Err(Error::ContractViolation(
            "no path produced a usable slaving window".into(),
        ));
    }
    drops.sort_by(|a, b| a.partial_cmp(b).expect("finite drops"));
    let median = drops[drops.len() / 2];
    let summary = vec![
        ("median_deviation_drop".into(), median),
        ("paths_used".into(), drops.len() as f64),
        ("skipped_snapshots".into(), skipped as f64),
        ("flagged_paths".into(), flagged as f64),
    ];
    Ok((vec![table], summary))
}

// ---------------------------------------------------------------- check

/// Formats the experiment registry for `similab list`.
pub fn list_experiments() -> String {
    let width = EXPERIMENTS
        .iter()
        .map(|(name, _)| name.len())
        .max()
        .unwrap_or(0);
    EXPERIMENTS
        .iter()
        .map(|(name, desc)| format!("{name:width$}  {desc}"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_line(lines: &mut String, name: &str, max_err: f64, tol: f64) -> Result<()> {
    if max_err <= tol {
        lines.push_str(&format!("PASS {name} (deviation {max_err:.2e} <= {tol:.0e})\n"));
        Ok(())
    } else {
        lines.push_str(&format!("FAIL {name} (deviation {max_err:.2e} > {tol:.0e})\n"));
        Err(Error::ContractViolation(format!(
            "{name}: deviation {max_err:.2e} exceeds {tol:.0e}"
        )))
    }
}

/// Fast invariant suite behind `similab check`: orthonormality and the
/// eigenvalue ladder, one closed-form interaction coefficient, exact
/// frame compensation, slow-subspace invariance, the pseudo-time
/// isometry, and mixing mass conservation. Returns the report text.
pub fn run_check() -> Result<String> {
    let mut lines = String::new();

    let spec = BasisSpec::new(10, 60)?;
    let rule = spec.pair_rule();
    let mut gram_err = 0.0f64;
    for i in 0..=10usize {
        for j in 0..=10usize {
            let mut acc = 0.0;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let e = eval_basis(10, x);
                acc += w * e[i] * e[j] * crate::hermite::k_weight(x);
            }
            let target = if i == j { 1.0 } else { 0.0 };
            gram_err = gram_err.max((acc - target).abs());
        }
    }
    check_line(&mut lines, "basis orthonormality", gram_err, 1e-10)?;

    let mut ladder_err = 0.0f64;
    for k in 0..=10usize {
        let mut unit = vec![0.0; 13];
        unit[k] = 1.0;
        let image = similarity_generator(&unit);
        for (j, v) in image.iter().enumerate() {
            let target = if j == k { -(k as f64) / 2.0 } else { 0.0 };
            ladder_err = ladder_err.max((v - target).abs());
        }
    }
    check_line(&mut lines, "eigenvalue ladder", ladder_err, 1e-12)?;

    let tensor: CubicTensor = cubic_projection_tensor(&BasisSpec::new(2, 24)?)?;
    let c0000 = tensor.get(0, 0, 0, 0);
    let exact = 1.0 / (2.0 * (3.0 * std::f64::consts::PI).sqrt());
    check_line(
        &mut lines,
        "ground interaction coefficient",
        (c0000 - exact).abs(),
        1e-12,
    )?;

    let spectrum = NoiseSpectrum::new(vec![0.0, 0.4, 0.3], true)?;
    let traj = simulate_compensated_modes(0.7, &spectrum, 2.0, 0.01, 1, 0, true)?;
    let comp_err = traj
        .iter()
        .fold(0.0f64, |m, s| m.max(s[1].abs()).max(s[2].abs()));
    check_line(&mut lines, "exact frame compensation", comp_err, 0.0)?;

    let state0 = NormalFormState::new([0.1, 0.0, 0.0], Memory::default())?;
    let spectrum3 = NoiseSpectrum::new(vec![0.01, 0.02, 0.02], false)?;
    let traj = integrate_transformed(&state0, &spectrum3, 200, 0.01, 2, 0, MemoryScheme::StepStart)?;
    let slow_err = traj
        .iter()
        .fold(0.0f64, |m, s| m.max(s.u[1].abs()).max(s.u[2].abs()));
    check_line(&mut lines, "slow subspace invariance", slow_err, 0.0)?;

    let grid: Vec<f64> = (0..=100).map(|i| 4.0 * i as f64 / 100.0).collect();
    let qv: f64 = grid
        .windows(2)
        .map(|w| 0.5 * (w[0] + w[1]) * (w[1] - w[0]))
        .sum();
    check_line(
        &mut lines,
        "pseudo-time isometry telescoping",
        (qv - 8.0).abs() / 8.0,
        1e-13,
    )?;

    let x = periodic_grid(60.0, 256);
    let u1 = gaussian_release(&x, -2.0, 1.5, 1.0);
    let u2 = gaussian_release(&x, 3.0, 1.0, 0.5);
    let mut pair = PipePair::new(60.0, u1, u2)?;
    let mass0 = pair.mass();
    let mut shifter = SpectralShifter::new(256, 60.0)?;
    let mut stream = ModeStream::new(5, 0, 0, 0.01)?;
    for _ in 0..50 {
        let dw = stream.next_increment();
        step_pipes(&mut pair, &mut shifter, 0.01, dw)?;
    }
    check_line(
        &mut lines,
        "mixing mass conservation",
        (pair.mass() - mass0).abs() / mass0.abs(),
        1e-10,
    )?;

    Ok(lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn minimal_config(experiment: &str) -> ExperimentConfig {
        ExperimentConfig {
            experiment: experiment.to_string(),
            seed: 1,
            paths: None,
            threads: None,
            out_dir: default_out_dir(),
            params: Params::default(),
        }
    }

    #[test]
    fn config_rejects_unknown_keys_and_values() {
        assert!(matches!(
            ExperimentConfig::from_toml_str("experiment = \"slow-model\"\nbogus = 1\n"),
            Err(Error::TomlDe(_))
        ));
        assert!(matches!(
            ExperimentConfig::from_toml_str(
                "experiment = \"slow-model\"\n[params]\nnot_a_key = 2\n"
            ),
            Err(Error::TomlDe(_))
        ));
        let cfg =
            ExperimentConfig::from_toml_str("experiment = \"no-such-thing\"\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = minimal_config("slow-model");
        cfg.params.dt = Some(-0.1);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let mut cfg = minimal_config("slow-model");
        cfg.params.release_variance = Some(1.0);
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("release_variance"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn every_registered_experiment_validates_with_defaults() {
        for (name, _) in EXPERIMENTS {
            minimal_config(name).validate().unwrap();
        }
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = minimal_config("mixing-spread");
        cfg.paths = Some(12);
        cfg.params.horizon = Some(8.0);
        cfg.params.release_variance = Some(1.5);
        let text = cfg.to_toml_string().unwrap();
        let back = ExperimentConfig::from_toml_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rate_fit_matches_known_series() {
        let taus: Vec<f64> = (0..60).map(|i| i as f64 * 0.25).collect();
        let decaying: Vec<f64> = taus.iter().map(|t| (-0.5 * t).exp()).collect();
        let fit = fit_rate(&taus, &decaying, (0.0, 15.0)).unwrap();
        assert_relative_eq!(fit.rate, -0.5, max_relative = 1e-6);
        assert!(fit.ci_lo <= fit.rate && fit.rate <= fit.ci_hi);

        let constant = vec![3.0; taus.len()];
        let fit = fit_rate(&taus, &constant, (0.0, 15.0)).unwrap();
        assert!(fit.rate.abs() < 1e-12);

        let mut with_zero = decaying.clone();
        with_zero[10] = 0.0;
        assert!(matches!(
            fit_rate(&taus, &with_zero, (0.0, 15.0)),
            Err(Error::FitRefused(_))
        ));
        assert!(matches!(
            fit_rate(&taus, &decaying, (100.0, 101.0)),
            Err(Error::FitRefused(_))
        ));
    }

    #[test]
    fn rate_fit_interval_covers_a_noisy_truth_mostly() {
        use rand::{Rng, SeedableRng};
        let taus: Vec<f64> = (0..40).map(|i| i as f64 * 0.5).collect();
        let mut covered = 0;
        let trials = 60;
        for trial in 0..trials {
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(900 + trial);
            let series: Vec<f64> = taus
                .iter()
                .map(|t| (-0.5 * t + 0.05 * rng.gen::<f64>()).exp())
                .collect();
            let fit = fit_rate(&taus, &series, (0.0, 20.0)).unwrap();
            if fit.ci_lo <= -0.5 && -0.5 <= fit.ci_hi {
                covered += 1;
            }
        }
        assert!(
            covered * 10 >= trials * 9,
            "interval covered the truth only {covered}/{trials} times"
        );
    }

    #[test]
    fn check_suite_passes() {
        let report = run_check().unwrap();
        assert_eq!(report.lines().count(), 7);
        assert!(report.lines().all(|l| l.starts_with("PASS")));
    }

    #[test]
    fn modal_linear_reports_stationary_variances() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config("modal-linear");
        cfg.paths = Some(400);
        cfg.out_dir = dir.path().to_path_buf();
        let bundle = run(&cfg).unwrap();
        let var1 = bundle
            .summary
            .iter()
            .find(|(k, _)| k == "mode_1_final_variance")
            .unwrap()
            .1;
        // default spectrum forces only mode 1 with unit amplitude
        assert_relative_eq!(var1, 1.0, max_relative = 0.25);
    }

    #[test]
    fn bundles_reproduce_bit_identically_across_thread_counts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config("slow-model");
        cfg.paths = Some(64);
        cfg.params.horizon = Some(8.0);
        cfg.out_dir = dir.path().join("one");
        cfg.threads = Some(1);
        let one = run(&cfg).unwrap();
        cfg.out_dir = dir.path().join("many");
        cfg.threads = Some(8);
        let many = run(&cfg).unwrap();
        assert_eq!(one.series.len(), many.series.len());
        for (a, b) in one.series.iter().zip(&many.series) {
            assert_eq!(a.rows, b.rows, "series must not depend on the thread count");
        }
        // reread the written bundle and rerun its echoed config
        let reread = ResultBundle::read(&dir.path().join("many").join("slow-model")).unwrap();
        let mut echoed = reread.config.clone();
        echoed.out_dir = dir.path().join("again");
        let again = run(&echoed).unwrap();
        for (a, b) in reread.series.iter().zip(&again.series) {
            assert_eq!(a.rows, b.rows, "echoed config must reproduce the series");
        }
    }

    #[test]
    fn residual_experiment_reports_fourth_order_slope() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config("normal-form-residual");
        cfg.out_dir = dir.path().to_path_buf();
        let bundle = run(&cfg).unwrap();
        let slope = bundle
            .summary
            .iter()
            .find(|(k, _)| k == "residual_slope")
            .unwrap()
            .1;
        let control = bundle
            .summary
            .iter()
            .find(|(k, _)| k == "identity_control_slope")
            .unwrap()
            .1;
        assert!(slope >= 3.7, "residual slope {slope}");
        assert_relative_eq!(control, 3.0, max_relative = 1e-6);
    }

    #[test]
    fn origin_compensation_cancels_modes_in_the_bundle() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = minimal_config("origin-compensation");
        cfg.paths = Some(16);
        cfg.params.horizon = Some(4.0);
        cfg.out_dir = dir.path().to_path_buf();
        let bundle = run(&cfg).unwrap();
        for key in ["max_abs_u1", "max_abs_u2"] {
            let v = bundle.summary.iter().find(|(k, _)| k == key).unwrap().1;
            assert_eq!(v, 0.0, "{key} must cancel exactly");
        }
    }
}
