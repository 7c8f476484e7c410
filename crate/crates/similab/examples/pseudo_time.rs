//! Pseudo-time: when real time itself becomes a stochastic process.
//!
//! Compensating mode 2 trades the deterministic clock for a pseudo-time
//! T with `t(T) = t0 + T + (2 b_2 / a) int sqrt(T') dw`. The example
//! verifies the first two moments of t(T) against the Ito isometry,
//! counts how often real time momentarily runs backwards, and shows the
//! fluctuation spread growing like T.
//!
//! ```bash
//! cargo run --release --example pseudo_time
//! ```

use similab::origin_tracking::build_pseudotime_path;
use similab::stats::Welford;

fn main() -> similab::Result<()> {
    let t0 = 1.0;
    let a = 1.0;
    let b2 = 0.25;
    let t_end = 4.0;
    let n = 400;
    let grid: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
    let n_paths = 10_000;
    let coeff = 2.0 * b2 / a;

    let mut t_acc = Welford::new();
    let mut i_acc = Welford::new();
    let mut mid = Welford::new();
    let mut reversal_paths = 0usize;
    for path in 0..n_paths {
        let p = build_pseudotime_path(t0, a, b2, &grid, 29, path)?;
        t_acc.push(*p.t.last().unwrap());
        let fluct = p.fluctuations();
        i_acc.push(fluct.last().unwrap() / coeff);
        mid.push(fluct[n / 2].abs());
        if p.reversals() > 0 {
            reversal_paths += 1;
        }
    }

    println!("t(T) = t0 + T + {coeff} int sqrt(T') dw, {n_paths} paths to T = {t_end}");
    println!();
    println!(
        "mean real time at T = {t_end}: {:.4} (exact {:.1})",
        t_acc.mean(),
        t0 + t_end
    );
    println!(
        "variance of the raw stochastic integral: {:.3} (isometry T^2/2 = {:.1})",
        i_acc.variance(),
        t_end * t_end / 2.0
    );
    println!(
        "fraction of paths with at least one time reversal: {:.3}",
        reversal_paths as f64 / n_paths as f64
    );
    println!(
        "mean |fluctuation| at T = {:.1}: {:.3} (grows with T)",
        t_end / 2.0,
        mid.mean()
    );
    Ok(())
}
