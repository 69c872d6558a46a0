//! Reconstruction with the larger measurement disc removed, next to the
//! two-disc reference at the same mesh size. With only the small disc near
//! `(0.8, 0.8)` the data no longer pin down the coefficient well.
//!
//! ```text
//! cargo run --release --example one_disc_failure -- 32
//! ```

use robin_inverse::experiments::{run_eoc_study, FineMesh, StudySetup};
use robin_inverse::fem::Disc;
use robin_inverse::SubdomainSpec;

fn main() -> robin_inverse::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let two = StudySetup::reference();
    let one = StudySetup {
        omega: SubdomainSpec::new(vec![Disc {
            center: [0.8, 0.8],
            radius: 0.05,
        }])?,
        ..two.clone()
    };
    for (label, setup) in [("two discs", &two), ("one disc", &one)] {
        let row = run_eoc_study(&[n], FineMesh::PerRow { factor: 4 }, setup)?.remove(0);
        match row.error {
            Some(e) => println!("{label:>10}: C1 error {e:.4e} after {} iterations", row.iterations),
            None => println!("{label:>10}: {}", row.failure.unwrap_or_default()),
        }
    }
    Ok(())
}
