//! Newton reconstruction of the reference coefficient from measurements on a
//! four times finer mesh, starting from `a = 1`.
//!
//! ```text
//! cargo run --release --example reconstruct -- 64
//! ```

use robin_inverse::experiments::{simulate_measurement, StudySetup};
use robin_inverse::fem::restrict_fine_to_coarse;
use robin_inverse::inverse_newton::newton_reconstruct;
use robin_inverse::robin_basis::c1_distance;
use robin_inverse::{Discretization, InverseProblem};

fn main() -> robin_inverse::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let setup = StudySetup::reference();

    let fine = simulate_measurement(4 * n, &setup.data, &setup.a_true)?;
    let q = restrict_fine_to_coarse(&fine, n)?;
    let problem = InverseProblem::new(
        Discretization::unit_square(n)?,
        &setup.data,
        q,
        setup.omega.clone(),
    )?;

    let start = std::time::Instant::now();
    let result = newton_reconstruct(&problem, &setup.x0, &setup.newton, Some(&setup.a_true))?;
    println!("N = {n}, {} iterations, converged = {}", result.iterations, result.converged);
    println!("{:>4} {:>12} {:>10} {:>12}", "k", "|F_h|", "step", "C1 error");
    for r in &result.trace.records {
        println!(
            "{:>4} {:>12.4e} {:>10.3e} {:>12.4e}",
            r.k,
            r.res_norm,
            r.step,
            r.c1_error.unwrap_or(f64::NAN)
        );
    }
    println!("alpha = {:.6?}", result.a_h.alpha());
    println!("beta  = {:.6?}", result.a_h.beta());
    println!("C1 error {:.4e} in {:.1?}", c1_distance(&result.a_h, &setup.a_true), start.elapsed());
    Ok(())
}
