//! Spectral condition number of the Jacobian at the truth as the coefficient
//! space grows from `(2,2)` to `(8,8)`. The truth is padded with unit
//! coefficients to reach eight modes per block.
//!
//! ```text
//! cargo run --release --example condition_study -- 64
//! ```

use robin_inverse::experiments::{condition_schedule, prolong_truth, run_condition_study};
use robin_inverse::robin_basis::reference_truth;
use robin_inverse::{ProblemData, SubdomainSpec};

fn main() -> robin_inverse::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let truth = prolong_truth(&reference_truth(), 2)?;
    let rows = run_condition_study(
        &condition_schedule(8),
        n,
        &ProblemData::reference(),
        &truth,
        &SubdomainSpec::reference(),
    )?;
    println!("{:>8} {:>4} {:>12}", "(j1,j2)", "J", "kappa");
    for r in &rows {
        println!("{:>8} {:>4} {:>12.4e}", format!("({},{})", r.spec.j1, r.spec.j2), r.spec.dim(), r.kappa);
    }
    Ok(())
}
