//! Cross-model consistency: the one-dimensional amplitude model against
//! the full nine-mode system, and the nine-mode system against the grid
//! solver, with every pair coupled through identical noise streams.

use rayon::prelude::*;
use similab::galerkin::{cubic_projection_tensor, integrate_modal, ModalState};
use similab::hermite::{eval_eigenfunction, project_field, BasisSpec};
use similab::noise::NoiseSpectrum;
use similab::pde_sim::{run_similarity, BurgersState, GridConfig, Scheme, SimilarityKind};
use similab::slow_manifold::SlowModel;
use similab::stats::Welford;

#[test]
fn slow_amplitude_tracks_the_full_mode_system() {
    let b = 0.05;
    let spectrum = NoiseSpectrum::new(vec![b; 9], false).unwrap();
    let spec = BasisSpec::auto(8).unwrap();
    let tensor = cubic_projection_tensor(&spec).unwrap();
    let model = SlowModel::new(spectrum.clone()).unwrap();
    let a0 = 0.1;
    let dtau = 0.01f64;
    let horizon = 5.0f64;
    let n_steps = (horizon / dtau).round() as usize;
    let mut u0 = vec![0.0; 9];
    u0[0] = a0;
    let state0 = ModalState::new(0.0, u0).unwrap();
    let n_paths = 1000u64;

    let deviations: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|path| {
            let full = integrate_modal(
                &state0, &spectrum, &tensor, true, n_steps, dtau, 53, path,
            )
            .unwrap();
            let slow = model.simulate_path(a0, horizon, dtau, 53, path).unwrap();
            (full.last().unwrap().u[0] - slow.last().unwrap()).abs()
        })
        .collect();
    let mut acc = Welford::new();
    for d in &deviations {
        acc.push(*d);
    }
    let mean_dev = acc.mean();
    assert!(
        mean_dev <= 5e-3,
        "mean slow-model deviation {mean_dev:.2e} above 5e-3 at tau = {horizon}"
    );
    println!(
        "PASS slow-model agreement: mean |a_full - a_slow| = {mean_dev:.2e} <= 5e-3 over \
         {n_paths} paths"
    );
}

#[test]
fn grid_reaction_diffusion_matches_the_mode_system() {
    let b = 0.05;
    let spectrum = NoiseSpectrum::new(vec![b; 9], false).unwrap();
    let cfg = GridConfig::new(12.0, 385, 1.5e-3, Scheme::Similarity).unwrap();
    let spec = BasisSpec::auto(8).unwrap();
    let tensor = cubic_projection_tensor(&spec).unwrap();
    let xi = cfg.grid();

    let mut coeffs0 = vec![0.0; 9];
    coeffs0[0] = 0.2;
    coeffs0[2] = 0.05;
    let grid_vals: Vec<f64> = xi
        .iter()
        .map(|&x| 0.2 * eval_eigenfunction(0, x) + 0.05 * eval_eigenfunction(2, x))
        .collect();
    let u0_grid = BurgersState::from_values(0.0, &cfg, grid_vals).unwrap();
    let state0 = ModalState::new(0.0, coeffs0).unwrap();

    let n_steps = 2000;
    let every = 500;
    let mut worst = 0.0f64;
    for path in 0..3u64 {
        let grid_traj = run_similarity(
            &u0_grid,
            &cfg,
            &spectrum,
            SimilarityKind::ReactionDiffusion,
            n_steps,
            every,
            59,
            path,
        )
        .unwrap();
        let modal_traj =
            integrate_modal(&state0, &spectrum, &tensor, true, n_steps, cfg.dt, 59, path)
                .unwrap();
        for snap in grid_traj.iter().skip(1) {
            let step = (snap.time / cfg.dt).round() as usize;
            let modal = &modal_traj[step].u;
            let proj = project_field(&xi, &snap.values, &spec).unwrap();
            assert!(proj.boundary_resolved, "grid field not compactly supported");
            for (k, (p, m)) in proj.coeffs.iter().zip(modal).enumerate() {
                let dev = (p - m).abs();
                assert!(
                    dev <= 2e-3,
                    "mode {k} deviates by {dev:.2e} at tau = {:.2} on path {path}",
                    snap.time
                );
                worst = worst.max(dev);
            }
        }
    }
    println!(
        "PASS grid/mode agreement: projected trajectories match the mode system within \
         {worst:.2e} <= 2e-3 across 3 paths"
    );
}
