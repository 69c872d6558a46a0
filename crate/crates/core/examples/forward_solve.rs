//! Forward Robin solve for the reference coefficient, plus the
//! manufactured case `f = 0, g = a` whose exact discrete solution is `u = 1`.
//!
//! ```text
//! cargo run --release --example forward_solve -- 128
//! ```

use robin_inverse::fem::{solve_forward, RobinOperator};
use robin_inverse::robin_basis::{min_on_boundary, reference_truth, DEFAULT_SAMPLES};
use robin_inverse::{Discretization, ProblemData};

fn main() -> robin_inverse::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let disc = Discretization::unit_square(n)?;
    let a = reference_truth();
    println!("N = {n}, {} nodes, h = {:.3e}", disc.n_nodes(), disc.mesh().h());
    println!("min of a on the boundary: {:.4}", min_on_boundary(&a, DEFAULT_SAMPLES));

    let op = RobinOperator::new(&disc, &a)?;
    let (u, report) = op.solve_with_report(&disc.load_vector(&ProblemData::reference()))?;
    println!(
        "reference data: u in [{:.6}, {:.6}], {} CG iterations, relative residual {:.2e}",
        u.min(),
        u.max(),
        report.iterations,
        report.final_residual
    );
    for p in [[0.5, 0.5], [0.8, 0.8], [0.4, 0.2]] {
        println!("  u{p:?} = {:.8}", u.eval(p));
    }

    let unit = solve_forward(&disc, &a, &ProblemData::manufactured_unit(&a))?;
    let dev = unit.values().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    println!("f = 0, g = a: max |u - 1| = {dev:.2e}");
    Ok(())
}
