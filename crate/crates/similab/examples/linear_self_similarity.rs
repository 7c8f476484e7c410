//! Stationary statistics of the linear mode system.
//!
//! With the cubic reaction switched off, each noisy mode is an
//! Ornstein-Uhlenbeck process with decay rate k/2, so its long-run
//! variance is b_k^2 / k. The mass mode has no decay at all: it performs
//! an exact random walk. Both facts are demonstrated on a small ensemble.
//!
//! ```bash
//! cargo run --release --example linear_self_similarity
//! ```

use similab::galerkin::{cubic_projection_tensor, integrate_modal, ModalState};
use similab::hermite::BasisSpec;
use similab::noise::{ModeStream, NoiseSpectrum};
use similab::stats::Welford;

fn main() -> similab::Result<()> {
    let spec = BasisSpec::auto(4)?;
    let tensor = cubic_projection_tensor(&spec)?;
    let b = 0.8;
    let spectrum = NoiseSpectrum::new(vec![0.0, b, b, b, b], true)?;
    let state0 = ModalState::new(0.0, vec![0.0; 5])?;
    let dtau = 0.01;
    let n_steps = 1200;
    let n_paths = 2000;

    println!("linear mode system, conservative noise b_k = {b}, {n_paths} paths");
    println!("burn-in horizon tau = {}", n_steps as f64 * dtau);
    println!();
    println!("  mode   variance   b^2/k     ratio");

    let mut accs: Vec<Welford> = (0..4).map(|_| Welford::new()).collect();
    for path in 0..n_paths {
        let traj = integrate_modal(&state0, &spectrum, &tensor, false, n_steps, dtau, 11, path)?;
        let u = &traj.last().unwrap().u;
        for k in 1..=4 {
            accs[k - 1].push(u[k]);
        }
    }
    for k in 1..=4usize {
        let var = accs[k - 1].variance();
        let target = b * b / k as f64;
        println!(
            "  {k}      {var:.4}     {target:.4}    {:.3}",
            var / target
        );
    }

    let b0 = 0.45;
    let walk_spectrum = NoiseSpectrum::new(vec![b0, 0.0, 0.0, 0.0, 0.0], false)?;
    let walk0 = ModalState::new(0.0, vec![0.2, 0.0, 0.0, 0.0, 0.0])?;
    let traj = integrate_modal(&walk0, &walk_spectrum, &tensor, false, 400, dtau, 7, 3)?;
    let increments = ModeStream::new(7, 3, 0, dtau)?.take(400);
    let mut acc = 0.2;
    let mut worst = 0.0f64;
    for (state, dw) in traj.iter().skip(1).zip(&increments) {
        acc += b0 * dw;
        worst = worst.max((state.u[0] - acc).abs());
    }
    println!();
    println!("mass mode with b_0 = {b0}: pure random walk, reconstruction error {worst:.2e}");
    Ok(())
}
