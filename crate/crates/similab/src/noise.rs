//! Reproducible Wiener increments, memory processes, and spectral noise.
//!
//! Every stochastic experiment draws from counter-keyed ChaCha12 streams:
//! one independent stream per (seed, path, mode) triple. Gaussians come
//! from the inverse normal CDF applied to open-interval uniforms, so a
//! stream's n-th increment is a pure function of the key and n. That makes
//! ensembles bit-reproducible across runs, path orderings, and thread
//! counts.

use crate::{Error, Result};
use rand::RngCore;
use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

/// Derives the 32-byte stream key for a (seed, path, mode) triple by a
/// splitmix-style mix chain. Distinct triples give unrelated keys.
pub fn stream_key(seed: u64, path: u64, mode: u64) -> [u8; 32] {
    let mut h = mix64(seed ^ 0x7369_6d69_6c61_6221);
    h = mix64(h ^ path);
    h = mix64(h ^ mode);
    let mut key = [0u8; 32];
    let mut s = h;
    for chunk in key.chunks_exact_mut(8) {
        s = mix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    key
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The ChaCha12 generator for one (seed, path, mode) stream.
pub fn mode_rng(seed: u64, path: u64, mode: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(stream_key(seed, path, mode))
}

/// Maps 64 random bits to a uniform in the open interval (0, 1), using the
/// top 52 bits centered on half-steps so neither endpoint can occur.
pub fn uniform_open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Inverse of the standard normal CDF (Wichura's PPND16 rational
/// approximations), accurate to about 1e-15 over (0, 1).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    if !(p > 0.0 && p < 1.0) {
        if p == 0.0 {
            return f64::NEG_INFINITY;
        }
        if p == 1.0 {
            return f64::INFINITY;
        }
        return f64::NAN;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
            + 6.726_577_092_700_87e4)
            * r
            + 4.592_195_393_154_987e4)
            * r
            + 1.373_169_376_550_946_1e4)
            * r
            + 1.971_590_950_306_551_3e3)
            * r
            + 1.331_416_678_917_843_8e2)
            * r
            + 3.387_132_872_796_366_5)
            * q;
        let den = ((((((5.226_495_278_852_545_5e3 * r + 2.872_908_573_572_194_3e4) * r
            + 3.930_789_580_009_271e4)
            * r
            + 2.121_379_430_158_659_7e4)
            * r
            + 5.394_196_021_424_751e3)
            * r
            + 6.871_870_074_920_579e2)
            * r
            + 4.231_333_070_160_091e1)
            * r
            + 1.0;
        return num / den;
    }
    let r = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_6)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_6;
        let den = ((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
            + 1.519_866_656_361_645_7e-2)
            * r
            + 1.481_039_764_274_800_8e-1)
            * r
            + 6.897_673_349_851e-1)
            * r
            + 1.676_384_830_183_803_8)
            * r
            + 2.053_191_626_637_759)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103;
        let den = (((((1.421_511_758_316_446e-15 * r + 1.846_318_317_510_054_8e-6) * r
            + 7.868_691_311_456_133e-4)
            * r
            + 1.487_536_129_085_061_5e-2)
            * r
            + 1.369_298_809_227_358e-1)
            * r
            + 5.998_322_065_558_88e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// One standard normal variate from a stream.
pub fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    inverse_normal_cdf(uniform_open01(rng.next_u64()))
}

/// Lazily generated Wiener increments of one (seed, path, mode) stream.
#[derive(Debug, Clone)]
pub struct ModeStream {
    rng: ChaCha12Rng,
    sqrt_dt: f64,
}

impl ModeStream {
    /// Stream of `N(0, dt)` increments; `dt` must be positive and finite.
    pub fn new(seed: u64, path: u64, mode: u64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "increment variance dt must be positive and finite, got {dt}"
            )));
        }
        Ok(Self {
            rng: mode_rng(seed, path, mode),
            sqrt_dt: dt.sqrt(),
        })
    }

    /// Next Wiener increment.
    pub fn next_increment(&mut self) -> f64 {
        self.sqrt_dt * standard_normal(&mut self.rng)
    }

    /// Next `n` increments.
    pub fn take(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_increment()).collect()
    }
}

/// Shape of a materialized Wiener ensemble.
#[derive(Debug, Clone, Copy)]
pub struct WienerSpec {
    pub n_paths: usize,
    pub n_modes: usize,
    pub n_steps: usize,
    pub dt: f64,
    pub seed: u64,
}

/// Fully materialized increments, laid out `[path][mode][step]`.
#[derive(Debug, Clone)]
pub struct WienerEnsemble {
    spec: WienerSpec,
    data: Vec<f64>,
}

impl WienerEnsemble {
    pub fn spec(&self) -> &WienerSpec {
        &self.spec
    }

    /// Increment slice of one path and mode.
    pub fn increments(&self, path: usize, mode: usize) -> &[f64] {
        assert!(path < self.spec.n_paths && mode < self.spec.n_modes);
        let stride = self.spec.n_steps;
        let base = (path * self.spec.n_modes + mode) * stride;
        &self.data[base..base + stride]
    }
}

/// Draws a full ensemble up front. Intended for small studies; large
/// ensembles should draw [`ModeStream`]s path by path instead, which yields
/// the identical numbers without holding them all in memory.
pub fn sample_wiener(spec: &WienerSpec) -> Result<WienerEnsemble> {
    let total = spec
        .n_paths
        .checked_mul(spec.n_modes)
        .and_then(|v| v.checked_mul(spec.n_steps))
        .ok_or_else(|| Error::InvalidSpec("ensemble size overflows".into()))?;
    if total > 200_000_000 {
        return Err(Error::InvalidSpec(format!(
            "ensemble of {total} increments is too large to materialize; draw per-path streams"
        )));
    }
    if spec.n_paths == 0 || spec.n_modes == 0 {
        return Err(Error::InvalidSpec(
            "ensemble needs at least one path and one mode".into(),
        ));
    }
    let mut data = Vec::with_capacity(total);
    for path in 0..spec.n_paths {
        for mode in 0..spec.n_modes {
            let mut s = ModeStream::new(spec.seed, path as u64, mode as u64, spec.dt)?;
            data.extend(s.take(spec.n_steps));
        }
    }
    Ok(WienerEnsemble {
        spec: *spec,
        data,
    })
}

/// Exact one-step factors for the Ornstein-Uhlenbeck update over `dt`:
/// returns `(decay, gamma)` with `z_next = decay * z + gamma * dw`. The
/// noise gain `gamma = sqrt((1 - e^(-2 beta dt)) / (2 beta dt))` matches the
/// stationary law exactly at any step size; `beta = 0` degenerates to plain
/// summation.
pub fn ou_exact_factors(beta: f64, dt: f64) -> (f64, f64) {
    debug_assert!(beta >= 0.0 && dt > 0.0);
    if beta == 0.0 {
        return (1.0, 1.0);
    }
    let x = 2.0 * beta * dt;
    let gamma = (-(-x).exp_m1() / x).sqrt();
    ((-beta * dt).exp(), gamma)
}

/// An exponentially filtered noise path (memory process).
#[derive(Debug, Clone)]
pub struct OuPath {
    pub beta: f64,
    /// Values at step boundaries, starting from `z_0 = 0`; one entry longer
    /// than the driving increment slice.
    pub values: Vec<f64>,
}

impl OuPath {
    /// Stationary variance `1 / (2 beta)` of the unit-driven filter.
    pub fn stationary_variance(&self) -> f64 {
        if self.beta > 0.0 {
            1.0 / (2.0 * self.beta)
        } else {
            f64::INFINITY
        }
    }
}

/// Filters Wiener increments through `dz = -beta z dtau + dw` with the
/// exact one-step update, starting from `z_0 = 0`. Negative rates are
/// rejected.
pub fn ou_convolve(increments: &[f64], beta: f64, dt: f64) -> Result<OuPath> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "memory rate beta must be nonnegative and finite, got {beta}"
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidSpec(format!(
            "step dt must be positive and finite, got {dt}"
        )));
    }
    let (decay, gamma) = ou_exact_factors(beta, dt);
    let mut values = Vec::with_capacity(increments.len() + 1);
    let mut z = 0.0;
    values.push(z);
    for dw in increments {
        z = decay * z + gamma * dw;
        values.push(z);
    }
    Ok(OuPath { beta, values })
}

/// Mode amplitudes of spectral space-time noise.
#[derive(Debug, Clone)]
pub struct NoiseSpectrum {
    amps: Vec<f64>,
    conservative: bool,
}

impl NoiseSpectrum {
    /// Builds a spectrum from per-mode amplitudes `b_0, b_1, ...`. When
    /// `conservative` is set, the noise must not inject mass, which forces
    /// `b_0 = 0`.
    pub fn new(amps: Vec<f64>, conservative: bool) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::InvalidSpec("spectrum needs at least one mode".into()));
        }
        if amps.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidSpec(
                "mode amplitudes must be finite and nonnegative".into(),
            ));
        }
        if conservative && amps[0] != 0.0 {
            return Err(Error::InvalidSpec(format!(
                "conservative noise requires b_0 = 0, got {}",
                amps[0]
            )));
        }
        Ok(Self { amps, conservative })
    }

    /// Spectrum with a single nonzero amplitude `b_mode = amp`.
    pub fn single(mode: usize, amp: f64, n_modes: usize) -> Result<Self> {
        if mode >= n_modes {
            return Err(Error::InvalidSpec(format!(
                "mode {mode} outside spectrum of {n_modes} modes"
            )));
        }
        let mut amps = vec![0.0; n_modes];
        amps[mode] = amp;
        let conservative = mode != 0;
        Self::new(amps, conservative)
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amps
    }

    pub fn amplitude(&self, mode: usize) -> f64 {
        self.amps.get(mode).copied().unwrap_or(0.0)
    }

    pub fn n_modes(&self) -> usize {
        self.amps.len()
    }

    pub fn is_conservative(&self) -> bool {
        self.conservative
    }
}

/// Precomputed synthesis of spectral noise increments on a fixed grid:
/// `dW(x_i) = sum_k b_k dw_k e_k(x_i)`.
#[derive(Debug, Clone)]
pub struct SpectralNoise {
    amps: Vec<f64>,
    /// Basis values laid out `[mode][node]`.
    basis: Vec<f64>,
    n_nodes: usize,
}

impl SpectralNoise {
    pub fn new(spectrum: &NoiseSpectrum, grid: &[f64]) -> Self {
        let n_modes = spectrum.n_modes();
        let n_nodes = grid.len();
        let mut basis = vec![0.0; n_modes * n_nodes];
        for (i, &x) in grid.iter().enumerate() {
            let e = crate::hermite::eval_basis(n_modes - 1, x);
            for (k, ek) in e.iter().enumerate() {
                basis[k * n_nodes + i] = *ek;
            }
        }
        Self {
            amps: spectrum.amplitudes().to_vec(),
            basis,
            n_nodes,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.amps.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    /// Accumulates the synthesized increment into `out` (which is zeroed
    /// first). `dw` must hold one increment per mode.
    pub fn increment_into(&self, dw: &[f64], out: &mut [f64]) {
        assert_eq!(dw.len(), self.amps.len(), "one increment per mode");
        assert_eq!(out.len(), self.n_nodes);
        out.fill(0.0);
        for (k, (&b, &dwk)) in self.amps.iter().zip(dw).enumerate() {
            let g = b * dwk;
            if g == 0.0 {
                continue;
            }
            let row = &self.basis[k * self.n_nodes..(k + 1) * self.n_nodes];
            for (o, e) in out.iter_mut().zip(row) {
                *o += g * e;
            }
        }
    }
}

/// One-shot synthesis of a spectral noise increment on a grid.
pub fn qwiener_increment(spectrum: &NoiseSpectrum, dw: &[f64], grid: &[f64]) -> Vec<f64> {
    let synth = SpectralNoise::new(spectrum, grid);
    let mut out = vec![0.0; grid.len()];
    synth.increment_into(dw, &mut out);
    out
}
