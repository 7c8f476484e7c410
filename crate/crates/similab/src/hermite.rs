//! Weighted Hermite eigenbasis on the similarity line.
//!
//! The linear part of every model in this crate is the operator
//!
//! ```text
//! A u = u'' + (xi/2) u' + u/2
//! ```
//!
//! acting on fields u(xi) that decay like the heat kernel
//! `G(xi) = exp(-xi^2/4) / (2 sqrt(pi))`. Its eigenfunctions are
//!
//! ```text
//! e_k(xi) = c_k H_k(xi / sqrt(2)) G(xi),    A e_k = -(k/2) e_k,
//! ```
//!
//! with `H_k` the probabilists' Hermite polynomials and
//! `c_k = (2 sqrt(pi) / k!)^(1/2)` chosen so the family is orthonormal in
//! the weighted space `L^2(K)`, `K(xi) = exp(+xi^2/4)`.
//!
//! Two coefficient conventions appear:
//!
//! * orthonormal coefficients `u_k = <u, e_k>_K` (the default for mode
//!   states elsewhere in the crate), and
//! * fixed-scale coefficients with respect to the unnormalized family
//!   `H_k(xi / sqrt(2)) G(xi)`, in which differentiation and
//!   multiplication by `xi` are exact degree shifts.
//!
//! [`to_scaled`] and [`to_orthonormal`] convert between them; the shift
//! calculus ([`derivative_in_basis`], [`multiply_by_xi`],
//! [`similarity_generator`]) operates on fixed-scale coefficients.

use crate::interp::MonotoneCubic;
use crate::{Error, Result};
use nalgebra::DMatrix;

/// sqrt(pi) to full precision.
pub const SQRT_PI: f64 = 1.772_453_850_905_516_1;

/// Probabilists' Hermite polynomial `H_k` via the three-term recurrence
/// `H_{k+1}(z) = z H_k(z) - k H_{k-1}(z)`, `H_0 = 1`, `H_1 = z`.
pub fn hermite_poly(k: usize, zeta: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = zeta;
    for j in 1..k {
        let next = zeta * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The heat-kernel profile `G(xi) = exp(-xi^2/4) / (2 sqrt(pi))`.
pub fn heat_kernel(xi: f64) -> f64 {
    (-xi * xi / 4.0).exp() / (2.0 * SQRT_PI)
}

/// The duality weight `K(xi) = exp(+xi^2/4)` of the weighted inner product.
pub fn k_weight(xi: f64) -> f64 {
    (xi * xi / 4.0).exp()
}

/// Eigenvalue of the similarity generator on mode `k`.
pub fn eigenvalue(k: usize) -> f64 {
    -(k as f64) / 2.0
}

/// Normalization constants `c_k = (2 sqrt(pi) / k!)^(1/2)` for `k = 0..=max_mode`,
/// by the stable recurrence `c_k = c_{k-1} / sqrt(k)`.
pub fn normalizations(max_mode: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(max_mode + 1);
    c.push((2.0 * SQRT_PI).sqrt());
    for k in 1..=max_mode {
        let prev = c[k - 1];
        c.push(prev / (k as f64).sqrt());
    }
    c
}

/// Evaluates the orthonormal eigenfunctions `e_0..=e_max_mode` at `xi`.
///
/// Uses the normalized recurrence
/// `e_{k+1} = (zeta e_k - sqrt(k) e_{k-1}) / sqrt(k+1)` with
/// `zeta = xi / sqrt(2)`, which keeps every intermediate bounded by about
/// 0.6, so the evaluation cannot overflow for any finite `xi`.
pub fn eval_basis(max_mode: usize, xi: f64) -> Vec<f64> {
    let mut e = Vec::with_capacity(max_mode + 1);
    let zeta = xi / std::f64::consts::SQRT_2;
    e.push((2.0 * SQRT_PI).sqrt() * heat_kernel(xi));
    if max_mode == 0 {
        return e;
    }
    e.push(zeta * e[0]);
    for k in 1..max_mode {
        let kf = k as f64;
        let next = (zeta * e[k] - kf.sqrt() * e[k - 1]) / (kf + 1.0).sqrt();
        e.push(next);
    }
    e
}

/// Evaluates the single orthonormal eigenfunction `e_k(xi)`.
pub fn eval_eigenfunction(k: usize, xi: f64) -> f64 {
    eval_basis(k, xi)[k]
}

/// Reconstructs `sum_k u_k e_k(xi)` from orthonormal coefficients.
pub fn reconstruct(coeffs: &[f64], xi: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let e = eval_basis(coeffs.len() - 1, xi);
    coeffs.iter().zip(&e).map(|(c, b)| c * b).sum()
}

/// Converts orthonormal coefficients to fixed-scale coefficients
/// (`scaled_k = u_k * c_k`).
pub fn to_scaled(coeffs: &[f64]) -> Vec<f64> {
    let c = normalizations(coeffs.len().saturating_sub(1));
    coeffs.iter().zip(&c).map(|(u, ck)| u * ck).collect()
}

/// Converts fixed-scale coefficients back to orthonormal coefficients.
pub fn to_orthonormal(scaled: &[f64]) -> Vec<f64> {
    let c = normalizations(scaled.len().saturating_sub(1));
    scaled.iter().zip(&c).map(|(s, ck)| s / ck).collect()
}

/// Basis truncation plus quadrature resolution.
///
/// `quad_order` must leave headroom over the truncation so that products of
/// four basis functions are still integrated exactly; the constructor
/// enforces `quad_order >= 2 * max_mode + 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisSpec {
    max_mode: usize,
    quad_order: usize,
}

impl BasisSpec {
    /// Validates and builds a spec. `max_mode` is the highest retained mode
    /// index and must be at least 1; a zero-mode-only basis cannot represent
    /// any of the interactions this crate studies and is rejected.
    pub fn new(max_mode: usize, quad_order: usize) -> Result<Self> {
        if max_mode == 0 {
            return Err(Error::InvalidSpec(
                "max_mode must be at least 1".into(),
            ));
        }
        if quad_order < 2 * max_mode + 8 {
            return Err(Error::InvalidSpec(format!(
                "quad_order {} too small for max_mode {}: need at least {}",
                quad_order,
                max_mode,
                2 * max_mode + 8
            )));
        }
        if quad_order > 200 {
            return Err(Error::InvalidSpec(
                "quad_order above 200 is outside the validated weight range".into(),
            ));
        }
        Ok(Self {
            max_mode,
            quad_order,
        })
    }

    /// Spec with the minimal admissible quadrature order for `max_mode`.
    pub fn auto(max_mode: usize) -> Result<Self> {
        Self::new(max_mode, 2 * max_mode + 8)
    }

    pub fn max_mode(&self) -> usize {
        self.max_mode
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    /// Number of retained modes (`max_mode + 1`).
    pub fn n_modes(&self) -> usize {
        self.max_mode + 1
    }

    /// Quadrature rule exact for pair products of basis functions.
    pub fn pair_rule(&self) -> QuadratureRule {
        QuadratureRule::for_pair_products(self.quad_order)
    }

    /// Quadrature rule exact for quadruple products of basis functions.
    pub fn quartic_rule(&self) -> QuadratureRule {
        QuadratureRule::for_quartic_products(self.quad_order)
    }
}

/// Nodes and weights for integrals of Gaussian-decaying integrands over the
/// whole line, `int F(xi) dxi ~= sum_i w_i F(xi_i)`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Rule exact for `F(xi) = p(xi) exp(-xi^2/4)` with `deg p <= 2q - 1`;
    /// this covers `e_j e_k K` for `j + k <= 2q - 1`.
    pub fn for_pair_products(q: usize) -> Self {
        Self::with_decay(q, 0.25)
    }

    /// Rule exact for `F(xi) = p(xi) exp(-3 xi^2/4)` with `deg p <= 2q - 1`;
    /// this covers `e_j e_k e_l e_m K` for `j + k + l + m <= 2q - 1`.
    pub fn for_quartic_products(q: usize) -> Self {
        Self::with_decay(q, 0.75)
    }

    /// Rule for `int p(xi) exp(-a xi^2) dxi` with the Gaussian factor folded
    /// out of the weights, so it applies to the bare integral of a decaying
    /// integrand.
    fn with_decay(q: usize, a: f64) -> Self {
        assert!(q >= 1 && q <= 200, "quadrature order out of range");
        let (s, w) = gauss_hermite(q);
        let scale = 1.0 / a.sqrt();
        let nodes: Vec<f64> = s.iter().map(|si| scale * si).collect();
        let weights: Vec<f64> = s
            .iter()
            .zip(&w)
            .map(|(si, wi)| scale * wi * (si * si).exp())
            .collect();
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to a function of `xi`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Gauss-Hermite nodes/weights for weight `exp(-s^2)` by Golub-Welsch:
/// eigendecomposition of the symmetric tridiagonal Jacobi matrix with
/// off-diagonals `sqrt(k/2)` and total mass `sqrt(pi)`.
fn gauss_hermite(q: usize) -> (Vec<f64>, Vec<f64>) {
    if q == 1 {
        return (vec![0.0], vec![SQRT_PI]);
    }
    let mut jac = DMatrix::<f64>::zeros(q, q);
    for k in 1..q {
        let b = (k as f64 / 2.0).sqrt();
        jac[(k - 1, k)] = b;
        jac[(k, k - 1)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, SQRT_PI * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
    pairs.into_iter().unzip()
}

/// Weighted inner product `<f, g>_K = int f g K dxi` by quadrature.
pub fn weighted_inner(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, rule: &QuadratureRule) -> f64 {
    rule.integrate(|x| f(x) * g(x) * k_weight(x))
}

/// Same inner product from values already sampled at the rule's nodes.
pub fn weighted_inner_samples(fv: &[f64], gv: &[f64], rule: &QuadratureRule) -> f64 {
    debug_assert_eq!(fv.len(), rule.len());
    debug_assert_eq!(gv.len(), rule.len());
    rule.nodes
        .iter()
        .zip(rule.weights.iter())
        .zip(fv.iter().zip(gv))
        .map(|((x, w), (f, g))| w * f * g * k_weight(*x))
        .sum()
}

/// Result of projecting grid samples onto the eigenbasis.
#[derive(Debug, Clone)]
pub struct Projection {
    /// Orthonormal coefficients `u_0..=u_max_mode`.
    pub coeffs: Vec<f64>,
    /// False when the sampled field has not decayed below `1e-6` of its
    /// peak at the edges of its grid; coefficients are still returned, but
    /// tail mass outside the grid was truncated to zero.
    pub boundary_resolved: bool,
}

/// Projects a sampled field onto the orthonormal eigenbasis.
///
/// The samples are resampled onto the quadrature nodes with a monotone
/// cubic interpolant (zero outside the grid), then paired with each basis
/// function under the weighted inner product. A field that is still large
/// at the grid edge sets `boundary_resolved = false` rather than failing:
/// the projection is then accurate only up to the truncated tail.
pub fn project_field(xi: &[f64], values: &[f64], spec: &BasisSpec) -> Result<Projection> {
    let interp = MonotoneCubic::fit(xi, values)?;
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let edge = values[0].abs().max(values[values.len() - 1].abs());
    let boundary_resolved = peak == 0.0 || edge <= 1e-6 * peak;

    let rule = spec.pair_rule();
    let samples: Vec<f64> = rule.nodes().iter().map(|&x| interp.eval(x)).collect();
    let mut coeffs = vec![0.0; spec.n_modes()];
    for (i, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let contrib = w * samples[i] * k_weight(x);
        if contrib == 0.0 {
            continue;
        }
        let e = eval_basis(spec.max_mode(), x);
        for (k, ek) in e.iter().enumerate() {
            coeffs[k] += contrib * ek;
        }
    }
    Ok(Projection {
        coeffs,
        boundary_resolved,
    })
}

/// Derivative as an exact degree shift on fixed-scale coefficients.
///
/// In the unnormalized family `H_k(xi / sqrt(2)) G(xi)` the derivative maps
/// member `k` to member `k + 1` times `-1/sqrt(2)`, so `order = 1` returns a
/// vector one entry longer and `order = 2` two entries longer (member `k`
/// maps to member `k + 2` times `+1/2`).
pub fn derivative_in_basis(scaled: &[f64], order: usize) -> Result<Vec<f64>> {
    match order {
        1 => {
            let mut out = vec![0.0; scaled.len() + 1];
            for (j, s) in scaled.iter().enumerate() {
                out[j + 1] = -s / std::f64::consts::SQRT_2;
            }
            Ok(out)
        }
        2 => {
            let mut out = vec![0.0; scaled.len() + 2];
            for (j, s) in scaled.iter().enumerate() {
                out[j + 2] = s / 2.0;
            }
            Ok(out)
        }
        _ => Err(Error::InvalidSpec(format!(
            "derivative order must be 1 or 2, got {order}"
        ))),
    }
}

/// Multiplication by `xi` on fixed-scale coefficients:
/// `(xi u)_j = sqrt(2) (u_{j-1} + (j + 1) u_{j+1})`. The output is one entry
/// longer than the input.
pub fn multiply_by_xi(scaled: &[f64]) -> Vec<f64> {
    let n = scaled.len();
    let mut out = vec![0.0; n + 1];
    let s2 = std::f64::consts::SQRT_2;
    for j in 0..n + 1 {
        let mut v = 0.0;
        if j >= 1 {
            v += scaled[j - 1];
        }
        if j + 1 < n {
            v += (j as f64 + 1.0) * scaled[j + 1];
        }
        out[j] = s2 * v;
    }
    out
}

/// The similarity generator `u -> u'' + (xi/2) u' + u/2` assembled from the
/// shift calculus, acting on fixed-scale coefficients. On the fixed-scale
/// unit vector of member `k` the result is `-(k/2)` times that vector (up
/// to rounding), with two trailing padding entries.
pub fn similarity_generator(scaled: &[f64]) -> Vec<f64> {
    let d2 = derivative_in_basis(scaled, 2).expect("order 2 is valid");
    let d1 = derivative_in_basis(scaled, 1).expect("order 1 is valid");
    let xi_d1 = multiply_by_xi(&d1);
    let mut out = d2;
    for (j, v) in xi_d1.iter().enumerate() {
        out[j] += 0.5 * v;
    }
    for (j, v) in scaled.iter().enumerate() {
        out[j] += 0.5 * v;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn hermite_poly_known_values() {
        assert_eq!(hermite_poly(0, 3.7), 1.0);
        assert_eq!(hermite_poly(1, 3.7), 3.7);
        assert_relative_eq!(hermite_poly(2, 1.4), 1.4 * 1.4 - 1.0, max_relative = 1e-15);
        assert_relative_eq!(hermite_poly(3, 2.0), 2.0, max_relative = 1e-15);
        let z: f64 = 1.3;
        assert_relative_eq!(
            hermite_poly(4, z),
            z.powi(4) - 6.0 * z * z + 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ground_mode_peak_value() {
        let expected = 1.0 / (2.0 * SQRT_PI).sqrt();
        assert_relative_eq!(eval_eigenfunction(0, 0.0), expected, max_relative = 1e-15);
        assert_abs_diff_eq!(eval_eigenfunction(0, 0.0), 0.531126, epsilon = 1e-6);
    }

    #[test]
    fn eval_matches_direct_formula() {
        let c = normalizations(6);
        for k in 0..=6 {
            for &xi in &[-3.1, -0.4, 0.0, 0.7, 2.9] {
                let direct = c[k] * hermite_poly(k, xi / std::f64::consts::SQRT_2) * heat_kernel(xi);
                assert_relative_eq!(eval_eigenfunction(k, xi), direct, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn evaluation_stays_bounded_far_out() {
        for k in [0, 5, 40] {
            let v = eval_eigenfunction(k, 200.0);
            assert!(v.is_finite());
            assert!(v.abs() < 1e-6);
        }
    }

    #[test]
    fn quadrature_moments_exact() {
        let rule = QuadratureRule::for_pair_products(12);
        // int xi^(2m) exp(-xi^2/4) dxi = 2 sqrt(pi) (2m-1)!! 2^m
        let mut dfact = 1.0;
        for m in 0..=8usize {
            if m > 0 {
                dfact *= (2 * m - 1) as f64;
            }
            let exact = 2.0 * SQRT_PI * dfact * (2.0f64).powi(m as i32);
            let got = rule.integrate(|x| x.powi(2 * m as i32) * (-x * x / 4.0).exp());
            assert_relative_eq!(got, exact, max_relative = 1e-12);
            let odd = rule.integrate(|x| x.powi(2 * m as i32 + 1) * (-x * x / 4.0).exp());
            assert_abs_diff_eq!(odd / exact, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let spec = BasisSpec::new(10, 28).unwrap();
        let rule = spec.pair_rule();
        for j in 0..=10usize {
            for k in 0..=10usize {
                let val = weighted_inner(
                    |x| eval_eigenfunction(j, x),
                    |x| eval_eigenfunction(k, x),
                    &rule,
                );
                let target = if j == k { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(val, target, epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn heat_kernel_is_scaled_ground_mode() {
        let rule = QuadratureRule::for_pair_products(10);
        let mass = rule.integrate(heat_kernel);
        assert_relative_eq!(mass, 1.0, max_relative = 1e-14);
        let c0 = normalizations(0)[0];
        for &xi in &[-2.0, 0.3, 1.7] {
            assert_relative_eq!(c0 * heat_kernel(xi), eval_eigenfunction(0, xi), epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_shift_matches_analytic_derivative() {
        // d/dxi of member 0 (the heat kernel) is -(xi/2) G = -(1/sqrt 2) member 1
        let d = derivative_in_basis(&[1.0], 1).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d[0], 0.0);
        for &xi in &[-1.9, 0.0, 0.6, 2.4] {
            let analytic = -(xi / 2.0) * heat_kernel(xi);
            let fromshift = d[1] * hermite_poly(1, xi / std::f64::consts::SQRT_2) * heat_kernel(xi);
            assert_relative_eq!(fromshift, analytic, epsilon = 1e-15);
        }
    }

    #[test]
    fn derivative_shift_matches_finite_differences() {
        let scaled = vec![0.4, -1.1, 0.0, 0.7, 0.2];
        let recon = |c: &[f64], xi: f64| -> f64 {
            c.iter()
                .enumerate()
                .map(|(k, ck)| ck * hermite_poly(k, xi / std::f64::consts::SQRT_2) * heat_kernel(xi))
                .sum()
        };
        let d1 = derivative_in_basis(&scaled, 1).unwrap();
        let d2 = derivative_in_basis(&scaled, 2).unwrap();
        let h = 1e-5;
        for &xi in &[-2.3, -0.5, 0.9, 3.0] {
            let fd1 = (recon(&scaled, xi + h) - recon(&scaled, xi - h)) / (2.0 * h);
            let fd2 =
                (recon(&scaled, xi + h) - 2.0 * recon(&scaled, xi) + recon(&scaled, xi - h)) / (h * h);
            assert_abs_diff_eq!(recon(&d1, xi), fd1, epsilon = 1e-8);
            assert_abs_diff_eq!(recon(&d2, xi), fd2, epsilon = 1e-5);
        }
        assert!(derivative_in_basis(&scaled, 3).is_err());
        assert!(derivative_in_basis(&scaled, 0).is_err());
    }

    #[test]
    fn xi_multiplication_matches_pointwise_product() {
        let scaled = vec![0.9, 0.3, -0.6, 0.1];
        let out = multiply_by_xi(&scaled);
        assert_eq!(out.len(), 5);
        let recon = |c: &[f64], xi: f64| -> f64 {
            c.iter()
                .enumerate()
                .map(|(k, ck)| ck * hermite_poly(k, xi / std::f64::consts::SQRT_2) * heat_kernel(xi))
                .sum()
        };
        for &xi in &[-2.0, -0.3, 0.0, 1.2, 2.8] {
            assert_relative_eq!(recon(&out, xi), xi * recon(&scaled, xi), epsilon = 1e-13);
        }
    }

    #[test]
    fn generator_is_diagonal_with_half_integer_gaps() {
        for k in 0..=10usize {
            let mut unit = vec![0.0; k + 1];
            unit[k] = 1.0;
            let out = similarity_generator(&unit);
            for (j, v) in out.iter().enumerate() {
                let expect = if j == k { eigenvalue(k) } else { 0.0 };
                assert_abs_diff_eq!(*v, expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn scale_conversions_roundtrip() {
        let u = vec![0.3, -0.8, 0.05, 1.4, 0.0, -0.2];
        let back = to_orthonormal(&to_scaled(&u));
        for (a, b) in u.iter().zip(&back) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn projection_is_exact_on_the_span() {
        // samples taken at the rule's own nodes: no interpolation error,
        // so the roundtrip recovers coefficients to quadrature precision
        let spec = BasisSpec::new(10, 28).unwrap();
        let coeffs = [0.9, -0.15, 0.4, 0.0, 0.08, -0.3, 0.0, 0.02, 0.0, -0.01, 0.005];
        let xi = spec.pair_rule().nodes().to_vec();
        let vals: Vec<f64> = xi.iter().map(|&x| reconstruct(&coeffs, x)).collect();
        let proj = project_field(&xi, &vals, &spec).unwrap();
        for (got, want) in proj.coeffs.iter().zip(&coeffs) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn projection_roundtrip_from_uniform_grid() {
        // resampling from a uniform grid adds interpolation error of a few
        // parts in 1e6 at this resolution
        let spec = BasisSpec::new(10, 28).unwrap();
        let coeffs = [0.9, -0.15, 0.4, 0.0, 0.08, -0.3, 0.0, 0.02, 0.0, -0.01, 0.005];
        let n = 769;
        let xi: Vec<f64> = (0..n).map(|i| -12.0 + 24.0 * i as f64 / (n - 1) as f64).collect();
        let vals: Vec<f64> = xi.iter().map(|&x| reconstruct(&coeffs, x)).collect();
        let proj = project_field(&xi, &vals, &spec).unwrap();
        assert!(proj.boundary_resolved);
        for (got, want) in proj.coeffs.iter().zip(&coeffs) {
            assert_abs_diff_eq!(got, want, epsilon = 1e-5);
        }
    }

    #[test]
    fn projection_flags_unresolved_boundary() {
        let xi: Vec<f64> = (0..101).map(|i| -2.0 + 4.0 * i as f64 / 100.0).collect();
        let vals: Vec<f64> = xi.iter().map(|&x| (-x * x / 4.0).exp()).collect();
        let spec = BasisSpec::auto(4).unwrap();
        let proj = project_field(&xi, &vals, &spec).unwrap();
        assert!(!proj.boundary_resolved, "edge value is far above 1e-6 of peak");
    }

    #[test]
    fn spec_validation() {
        assert!(BasisSpec::new(0, 30).is_err());
        assert!(BasisSpec::new(8, 23).is_err());
        assert!(BasisSpec::new(8, 24).is_ok());
        assert!(BasisSpec::new(8, 300).is_err());
    }
}
