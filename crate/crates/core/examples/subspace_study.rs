//! Reconstructions in truncated coefficient spaces `V_{j1,j2}` from the same
//! data. Writes `subspace.csv` with the sampled coefficients.
//!
//! ```text
//! cargo run --release --example subspace_study -- 64
//! ```

use robin_inverse::experiments::{run_subspace_study, subspace_csv, FineMesh, StudySetup};
use robin_inverse::BasisSpec;

fn main() -> robin_inverse::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(64);
    let pairs = [(3, 3), (4, 4), (5, 5), (6, 6)]
        .into_iter()
        .map(|(a, b)| BasisSpec::new(a, b))
        .collect::<robin_inverse::Result<Vec<_>>>()?;
    let study = run_subspace_study(&pairs, n, FineMesh::PerRow { factor: 4 }, &StudySetup::reference())?;
    println!("{:>8} {:>12} {:>20} {:>6}", "(j1,j2)", "C1 error", "dist. to truncation", "iters");
    for c in &study.columns {
        let label = format!("({},{})", c.spec.j1, c.spec.j2);
        match (c.result.error, c.distance_to_truncation) {
            (Some(e), Some(d)) => println!("{label:>8} {e:>12.4e} {d:>20.4e} {:>6}", c.result.iterations),
            _ => println!("{label:>8} failed: {}", c.result.failure.as_deref().unwrap_or("")),
        }
    }
    std::fs::write("subspace.csv", subspace_csv(&study))?;
    Ok(())
}
