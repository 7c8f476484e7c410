//! The weighted Hermite eigenbasis and its quadrature.
//!
//! Builds the eigenfunctions of `L u = u'' + (xi/2) u' + u/2` that are
//! orthonormal under the exponentially growing weight `exp(xi^2/4)`,
//! verifies the Gram matrix and the eigenvalue ladder by quadrature, and
//! prints a few entries of the cubic interaction tensor that drives every
//! reduced model in the crate.
//!
//! ```bash
//! cargo run --release --example basis_quadrature
//! ```

use similab::galerkin::cubic_projection_tensor;
use similab::hermite::{
    eval_basis, eval_eigenfunction, heat_kernel, k_weight, normalizations, BasisSpec,
};

fn main() -> similab::Result<()> {
    let max_mode = 6;
    let spec = BasisSpec::new(max_mode, 40)?;
    let rule = spec.pair_rule();

    println!("weighted Hermite eigenbasis up to mode {max_mode}");
    println!();

    let mut worst = 0.0f64;
    for i in 0..=max_mode {
        for j in 0..=max_mode {
            let mut acc = 0.0;
            for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
                let e = eval_basis(max_mode, x);
                acc += w * e[i] * e[j] * k_weight(x);
            }
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((acc - target).abs());
        }
    }
    println!("Gram matrix deviation from the identity: {worst:.2e}");

    println!("eigenvalue ladder (mode k relaxes at rate k/2):");
    for k in 0..=max_mode {
        println!("  mode {k}: decay rate {:.1}", k as f64 / 2.0);
    }

    let c0 = normalizations(0)[0];
    let peak = eval_eigenfunction(0, 0.0);
    println!();
    println!("ground mode e_0 is the heat kernel rescaled by c_0 = {c0:.6}");
    println!(
        "  e_0(0) = {peak:.6}, c_0 * G(0) = {:.6}",
        c0 * heat_kernel(0.0)
    );

    let tensor = cubic_projection_tensor(&BasisSpec::new(2, 14)?)?;
    println!();
    println!("cubic interaction tensor entries <e_k, (sum u_l e_l)^3> for k, (l, m, n):");
    for (k, l, m, n) in [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 1, 1), (2, 0, 0, 2)] {
        println!(
            "  k = {k}, modes ({l},{m},{n}): {:+.8}",
            tensor.monomial_coefficient(k, l, m, n)
        );
    }
    Ok(())
}
