//! Hermite-spectral mode systems with cubic reaction.
//!
//! Projecting the similarity-variable reaction-diffusion dynamics onto the
//! orthonormal eigenbasis turns it into coupled mode SDEs
//!
//! ```text
//! du_k = [ -(k/2) u_k - d_k(u) ] dtau + b_k dw_k,
//! d_k(u) = sum_{l,m,n} C[k][l][m][n] u_l u_m u_n,
//! ```
//!
//! where the interaction tensor `C[k][l][m][n] = int e_k e_l e_m e_n K dxi`
//! is computed once by exact quadrature. With the reaction switched off the
//! modes decouple into independent Ornstein-Uhlenbeck processes with decay
//! rates k/2 (and a pure random walk for the mass mode k = 0), which is the
//! linear backbone every statistical check rests on.
//!
//! Integration uses a Heun predictor-corrector, the crate's single stepping
//! scheme; with additive mode noise it is simultaneously Ito- and
//! Stratonovich-consistent.

use crate::hermite::{eval_basis, k_weight, normalizations, BasisSpec};
use crate::noise::{ModeStream, NoiseSpectrum};
use crate::{Error, Result};

/// Mode amplitudes at one log-time.
#[derive(Debug, Clone)]
pub struct ModalState {
    pub tau: f64,
    pub u: Vec<f64>,
}

impl ModalState {
    /// Validates finiteness of the log-time and every amplitude.
    pub fn new(tau: f64, u: Vec<f64>) -> Result<Self> {
        if !tau.is_finite() || u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec(
                "mode state entries must be finite".into(),
            ));
        }
        if u.is_empty() {
            return Err(Error::InvalidSpec("mode state needs at least one mode".into()));
        }
        Ok(Self { tau, u })
    }

    /// The slow amplitude `a = u_0`.
    pub fn amplitude(&self) -> f64 {
        self.u[0]
    }

    pub fn n_modes(&self) -> usize {
        self.u.len()
    }

    /// The conserved line integral of the reconstructed field. Only the
    /// ground mode carries mass, with weight `int e_0 dxi = c_0`.
    pub fn mass(&self) -> f64 {
        self.u[0] * normalizations(0)[0]
    }
}

/// Dense symmetric quadruple-product tensor with a compressed term list
/// for fast cubic projections.
#[derive(Debug, Clone)]
pub struct CubicTensor {
    max_mode: usize,
    data: Vec<f64>,
    /// Per output mode k: sorted interaction triples (l <= m <= n) with
    /// multiplicity already folded into the weight; parity zeros dropped.
    terms: Vec<Vec<(usize, usize, usize, f64)>>,
}

impl CubicTensor {
    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn n_modes(&self) -> usize {
        self.max_mode + 1
    }

    #[inline]
    fn idx(&self, k: usize, l: usize, m: usize, n: usize) -> usize {
        let s = self.max_mode + 1;
        ((k * s + l) * s + m) * s + n
    }

    /// Tensor entry `C[k][l][m][n]`.
    pub fn get(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        assert!(
            k <= self.max_mode && l <= self.max_mode && m <= self.max_mode && n <= self.max_mode,
            "tensor index out of range"
        );
        self.data[self.idx(k, l, m, n)]
    }

    /// Coefficient of the monomial `u_l u_m u_n` in `d_k`, i.e. the tensor
    /// entry times the multiplicity of the index multiset.
    pub fn monomial_coefficient(&self, k: usize, l: usize, m: usize, n: usize) -> f64 {
        let mut t = [l, m, n];
        t.sort_unstable();
        let mult = if t[0] == t[1] && t[1] == t[2] {
            1.0
        } else if t[0] == t[1] || t[1] == t[2] {
            3.0
        } else {
            6.0
        };
        mult * self.get(k, t[0], t[1], t[2])
    }

    /// Projects the pointwise cube: `d_k = sum C[k][l][m][n] u_l u_m u_n`.
    pub fn project_cube(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_modes()];
        self.add_cube(u, &mut out, 1.0);
        out
    }

    /// Accumulates `scale * d_k(u)` into `out`.
    pub fn add_cube(&self, u: &[f64], out: &mut [f64], scale: f64) {
        assert_eq!(u.len(), self.n_modes(), "state/tensor size mismatch");
        assert_eq!(out.len(), self.n_modes());
        for (k, terms) in self.terms.iter().enumerate() {
            let mut acc = 0.0;
            for &(l, m, n, w) in terms {
                acc += w * u[l] * u[m] * u[n];
            }
            out[k] += scale * acc;
        }
    }
}

/// Builds the quadruple-product tensor for a basis truncation by exact
/// quadrature. Dense storage keeps this simple; truncations above 12 modes
/// are rejected as outside the laboratory's validated range.
pub fn cubic_projection_tensor(basis: &BasisSpec) -> Result<CubicTensor> {
    let kmax = basis.max_mode();
    if kmax > 12 {
        return Err(Error::InvalidSpec(format!(
            "dense interaction tensor supports at most 12 modes, got {kmax}"
        )));
    }
    let rule = basis.quartic_rule();
    let nq = rule.len();
    // basis values laid out [node][mode]
    let mut bv = vec![0.0; nq * (kmax + 1)];
    for (i, &x) in rule.nodes().iter().enumerate() {
        let e = eval_basis(kmax, x);
        bv[i * (kmax + 1)..(i + 1) * (kmax + 1)].copy_from_slice(&e);
    }

    let s = kmax + 1;
    let mut data = vec![0.0; s * s * s * s];
    for k in 0..=kmax {
        for l in k..=kmax {
            for m in l..=kmax {
                for n in m..=kmax {
                    if (k + l + m + n) % 2 == 1 {
                        // odd total parity integrates to zero; store it exactly
                        continue;
                    }
                    let mut acc = 0.0;
                    for (i, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
                        let row = &bv[i * s..(i + 1) * s];
                        acc += w * k_weight(x) * row[k] * row[l] * row[m] * row[n];
                    }
                    // scatter to every distinct permutation of (k,l,m,n)
                    let mut perm = [k, l, m, n];
                    perm.sort_unstable();
                    loop {
                        let [a, b, c, d] = perm;
                        data[((a * s + b) * s + c) * s + d] = acc;
                        if !next_permutation(&mut perm) {
                            break;
                        }
                    }
                }
            }
        }
    }

    // compressed per-k interaction lists with multiplicity folded in
    let mut terms = Vec::with_capacity(s);
    for k in 0..=kmax {
        let mut list = Vec::new();
        for l in 0..=kmax {
            for m in l..=kmax {
                for n in m..=kmax {
                    if (k + l + m + n) % 2 == 1 {
                        continue;
                    }
                    let mult = if l == m && m == n {
                        1.0
                    } else if l == m || m == n {
                        3.0
                    } else {
                        6.0
                    };
                    let w = mult * data[((k * s + l) * s + m) * s + n];
                    if w != 0.0 {
                        list.push((l, m, n, w));
                    }
                }
            }
        }
        terms.push(list);
    }

    Ok(CubicTensor {
        max_mode: kmax,
        data,
        terms,
    })
}

/// Lexicographic next permutation of a small index array.
fn next_permutation(a: &mut [usize; 4]) -> bool {
    let mut i = 2usize;
    loop {
        if a[i] < a[i + 1] {
            break;
        }
        if i == 0 {
            return false;
        }
        i -= 1;
    }
    let mut j = 3;
    while a[j] <= a[i] {
        j -= 1;
    }
    a.swap(i, j);
    a[i + 1..].reverse();
    true
}

/// Drift and additive diffusion amplitudes of the mode system:
/// `drift_k = -(k/2) u_k - [reaction_on] d_k(u)`, mode `k` driven by
/// `b_k dw_k`.
pub fn modal_rhs(
    state: &ModalState,
    spectrum: &NoiseSpectrum,
    tensor: &CubicTensor,
    reaction_on: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = state.n_modes();
    if n != tensor.n_modes() || n != spectrum.n_modes() {
        return Err(Error::InvalidSpec(format!(
            "dimension mismatch: state {}, tensor {}, spectrum {}",
            n,
            tensor.n_modes(),
            spectrum.n_modes()
        )));
    }
    let mut drift = vec![0.0; n];
    linear_drift_into(&state.u, &mut drift);
    if reaction_on {
        tensor.add_cube(&state.u, &mut drift, -1.0);
    }
    Ok((drift, spectrum.amplitudes().to_vec()))
}

fn linear_drift_into(u: &[f64], out: &mut [f64]) {
    for (k, (uk, o)) in u.iter().zip(out.iter_mut()).enumerate() {
        *o = -(k as f64) / 2.0 * uk;
    }
}

/// Reusable Heun stepper for the mode system, holding its scratch buffers.
#[derive(Debug, Clone)]
pub struct ModalStepper<'t> {
    tensor: &'t CubicTensor,
    reaction_on: bool,
    dtau: f64,
    amps: Vec<f64>,
    f0: Vec<f64>,
    f1: Vec<f64>,
    pred: Vec<f64>,
}

impl<'t> ModalStepper<'t> {
    pub fn new(
        spectrum: &NoiseSpectrum,
        tensor: &'t CubicTensor,
        reaction_on: bool,
        dtau: f64,
    ) -> Result<Self> {
        if !(dtau > 0.0 && dtau.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "step size must be positive, got {dtau}"
            )));
        }
        if spectrum.n_modes() != tensor.n_modes() {
            return Err(Error::InvalidSpec(format!(
                "spectrum has {} modes but tensor has {}",
                spectrum.n_modes(),
                tensor.n_modes()
            )));
        }
        let n = tensor.n_modes();
        Ok(Self {
            tensor,
            reaction_on,
            dtau,
            amps: spectrum.amplitudes().to_vec(),
            f0: vec![0.0; n],
            f1: vec![0.0; n],
            pred: vec![0.0; n],
        })
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    /// One Heun step in place. `dw` holds one Wiener increment per mode.
    pub fn heun_step(&mut self, u: &mut [f64], dw: &[f64]) {
        let n = u.len();
        debug_assert_eq!(n, self.amps.len());
        debug_assert_eq!(n, dw.len());
        linear_drift_into(u, &mut self.f0);
        if self.reaction_on {
            self.tensor.add_cube(u, &mut self.f0, -1.0);
        }
        for k in 0..n {
            self.pred[k] = u[k] + self.f0[k] * self.dtau + self.amps[k] * dw[k];
        }
        linear_drift_into(&self.pred, &mut self.f1);
        if self.reaction_on {
            self.tensor.add_cube(&self.pred, &mut self.f1, -1.0);
        }
        for k in 0..n {
            u[k] += 0.5 * self.dtau * (self.f0[k] + self.f1[k]) + self.amps[k] * dw[k];
        }
    }
}

/// Integrates the mode system from `state0` for `n_steps` Heun steps of
/// size `dtau`, drawing one noise stream per mode keyed by `(seed, path)`.
/// Returns the full trajectory including the initial state.
///
/// A non-finite amplitude aborts with the offending step index.
pub fn integrate_modal(
    state0: &ModalState,
    spectrum: &NoiseSpectrum,
    tensor: &CubicTensor,
    reaction_on: bool,
    n_steps: usize,
    dtau: f64,
    seed: u64,
    path: u64,
) -> Result<Vec<ModalState>> {
    let n = state0.n_modes();
    if n != tensor.n_modes() || n != spectrum.n_modes() {
        return Err(Error::InvalidSpec(format!(
            "dimension mismatch: state {}, tensor {}, spectrum {}",
            n,
            tensor.n_modes(),
            spectrum.n_modes()
        )));
    }
    let mut stepper = ModalStepper::new(spectrum, tensor, reaction_on, dtau)?;
    let mut streams: Vec<ModeStream> = (0..n)
        .map(|mode| ModeStream::new(seed, path, mode as u64, dtau))
        .collect::<Result<_>>()?;
    let mut u = state0.u.clone();
    let mut dw = vec![0.0; n];
    let mut traj = Vec::with_capacity(n_steps + 1);
    traj.push(state0.clone());
    for step in 0..n_steps {
        for (s, d) in streams.iter_mut().zip(dw.iter_mut()) {
            *d = s.next_increment();
        }
        stepper.heun_step(&mut u, &dw);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Aborted {
                step,
                context: "mode amplitude became non-finite".into(),
            });
        }
        traj.push(ModalState {
            tau: state0.tau + (step + 1) as f64 * dtau,
            u: u.clone(),
        });
    }
    Ok(traj)
}
