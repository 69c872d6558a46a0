//! Reconstruction error against mesh size for three noise levels. Writes
//! `noise.csv` (`h,sigma,error`) to the current directory.
//!
//! ```text
//! cargo run --release --example noise_study -- 16 32 64 128
//! ```

use robin_inverse::experiments::{noise_csv, run_noise_study, FineMesh, StudySetup};

fn main() -> robin_inverse::Result<()> {
    let mut n_list: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    if n_list.is_empty() {
        n_list = vec![16, 32, 64];
    }
    let sigmas = [1e-4, 1e-5, 1e-6];
    let rows = run_noise_study(&n_list, &sigmas, FineMesh::PerRow { factor: 4 }, &StudySetup::reference())?;
    println!("{:>6} {:>10} {:>12} {:>6}", "N", "sigma", "C1 error", "iters");
    for r in &rows {
        match r.error {
            Some(e) => println!("{:>6} {:>10.1e} {:>12.4e} {:>6}", r.n, r.sigma, e, r.iterations),
            None => println!(
                "{:>6} {:>10.1e} {:>12} {}",
                r.n,
                r.sigma,
                "failed",
                r.failure.as_deref().unwrap_or("")
            ),
        }
    }
    std::fs::write("noise.csv", noise_csv(&rows))?;
    Ok(())
}
