//! Reconstruction error against mesh size with noise-free data from a four
//! times finer mesh. Writes `eoc.csv` (`h,error,eoc`) to the current directory.
//!
//! ```text
//! cargo run --release --example eoc_study -- 16 32 64 128 256
//! ```

use robin_inverse::experiments::{eoc_csv, loglog_slope, run_eoc_study, FineMesh, StudySetup};

fn main() -> robin_inverse::Result<()> {
    let mut n_list: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    if n_list.is_empty() {
        n_list = vec![16, 32, 64, 128];
    }
    let rows = run_eoc_study(&n_list, FineMesh::PerRow { factor: 4 }, &StudySetup::reference())?;
    println!("{:>6} {:>10} {:>12} {:>6} {:>6}", "N", "h", "C1 error", "EOC", "iters");
    for r in &rows {
        let err = r.error.map_or("failed".into(), |e| format!("{e:.4e}"));
        let eoc = r.eoc.map_or("-".into(), |e| format!("{e:.2}"));
        println!("{:>6} {:>10.3e} {err:>12} {eoc:>6} {:>6}", r.n, r.h, r.iterations);
    }
    let ok: Vec<_> = rows.iter().filter_map(|r| r.error.map(|e| (r.h, e))).collect();
    if ok.len() >= 2 {
        let (h, e): (Vec<f64>, Vec<f64>) = ok.into_iter().unzip();
        println!("least-squares slope: {:.3}", loglog_slope(&h, &e)?);
    }
    std::fs::write("eoc.csv", eoc_csv(&rows))?;
    Ok(())
}
