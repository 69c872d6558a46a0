//! Compares the Jacobian of `F_h` with central finite differences.
//!
//! ```text
//! cargo run --release --example jacobian_check
//! ```

use robin_inverse::experiments::simulate_measurement;
use robin_inverse::fem::restrict_fine_to_coarse;
use robin_inverse::robin_basis::RobinParameter;
use robin_inverse::{Discretization, InverseProblem, ProblemData, SubdomainSpec};

fn main() -> robin_inverse::Result<()> {
    let n = 32;
    let truth = RobinParameter::new(&[10.0, 1.0], &[0.2, 1.0])?;
    let data = ProblemData::reference();
    let q = restrict_fine_to_coarse(&simulate_measurement(4 * n, &data, &truth)?, n)?;
    let problem = InverseProblem::new(Discretization::unit_square(n)?, &data, q, SubdomainSpec::reference())?;

    let a = truth.with_coeffs(vec![9.7, 1.2, 0.1, 0.8])?;
    let ev = problem.evaluate(&a)?;
    let jac = problem.jacobian(&ev)?;
    let step = 1e-5;
    let mut diff = 0.0;
    println!("{:>3} {:>3} {:>14} {:>14}", "i", "j", "analytic", "central FD");
    for j in 0..a.dim() {
        let mut plus = a.coeffs().to_vec();
        let mut minus = a.coeffs().to_vec();
        plus[j] += step;
        minus[j] -= step;
        let fp = problem.residual(&a.with_coeffs(plus)?)?;
        let fm = problem.residual(&a.with_coeffs(minus)?)?;
        for i in 0..a.dim() {
            let fd = (fp[i] - fm[i]) / (2.0 * step);
            println!("{i:>3} {j:>3} {:>14.6e} {fd:>14.6e}", jac[(i, j)]);
            diff += (fd - jac[(i, j)]).powi(2);
        }
    }
    println!("relative Frobenius difference: {:.3e}", diff.sqrt() / jac.norm_fro());
    Ok(())
}
