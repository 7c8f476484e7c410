//! Cross-validation of the physical and similarity Burgers solvers.
//!
//! The same quiet release is evolved twice: on a fixed x-grid in real
//! time, and on a xi-grid in log-time. Pulling the physical solution
//! into similarity variables at matching times shows the two
//! discretizations agree to grid accuracy, which validates both the
//! solvers and the frame maps between them.
//!
//! ```bash
//! cargo run --release --example burgers_cross_check
//! ```

use similab::frames::{to_similarity_on, PhysicalField};
use similab::hermite::heat_kernel;
use similab::noise::NoiseSpectrum;
use similab::pde_sim::{run_physical, run_similarity, BurgersState, GridConfig, Scheme, SimilarityKind};

fn main() -> similab::Result<()> {
    let phys_cfg = GridConfig::new(60.0, 1921, 1.25e-3, Scheme::Physical)?;
    let quiet = NoiseSpectrum::new(vec![0.0], true)?;
    let amp = 0.8;
    let x = phys_cfg.grid();
    let values: Vec<f64> = x.iter().map(|&xx| amp * heat_kernel(xx)).collect();
    let u0 = BurgersState::from_values(1.0, &phys_cfg, values)?;

    let every = 200;
    let n_steps = ((20.0 - 1.0) / phys_cfg.dt).round() as usize;
    let phys = run_physical(&u0, &phys_cfg, &quiet, n_steps, every, 0, 0)?;
    println!("physical run from t = 1 to 20 on {} points", phys_cfg.n_points);
    println!();
    println!("  t       sup |difference| / peak");

    for &t_end in &[2.25f64, 5.0, 11.0, 20.0] {
        let snap = phys
            .iter()
            .find(|s| (s.time - t_end).abs() < 1e-9)
            .expect("snapshot at the target time");
        let tau_end = t_end.ln();
        let n_sim = (tau_end / 1.5e-3).ceil() as usize;
        let sim_cfg = GridConfig::new(12.0, 385, tau_end / n_sim as f64, Scheme::Similarity)?;
        let sim_vals: Vec<f64> = sim_cfg.grid().iter().map(|&v| amp * heat_kernel(v)).collect();
        let sim0 = BurgersState::from_values(0.0, &sim_cfg, sim_vals)?;
        let sim = run_similarity(
            &sim0,
            &sim_cfg,
            &quiet,
            SimilarityKind::Burgers,
            n_sim,
            n_sim,
            0,
            0,
        )?;
        let sim_final = sim.last().unwrap();

        let field = PhysicalField::new(snap.time, x.clone(), snap.values.clone())?;
        let on_xi = to_similarity_on(&field, &sim_cfg.grid())?;
        let worst = on_xi
            .values
            .iter()
            .zip(&sim_final.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max)
            / sim_final.max_abs();
        println!("  {t_end:5.2}   {worst:.2e}");
    }
    Ok(())
}
