//! Geometric multigrid V-cycle used as a conjugate-gradient preconditioner.
//!
//! The structured meshes are nested under halving (same diagonal direction),
//! so P1 interpolation is an exact prolongation and coarse operators are the
//! Galerkin products `P^T A P`. Forward Gauss-Seidel before and backward
//! Gauss-Seidel after the coarse correction keep the cycle symmetric.

use crate::error::{Error, Result};
use crate::sparse_linalg::{CsrMatrix, CsrRect, Preconditioner};

/// Coarsening stops once a level has at most this many cells per side.
const COARSEST_TARGET: usize = 8;
/// Largest coarsest level still solved directly.
const COARSEST_MAX: usize = 32;
const SMOOTHING_STEPS: usize = 2;

/// Prolongations `P_l: level l+1 -> level l`, finest first. Empty when the
/// mesh cannot be coarsened to a directly solvable size.
pub(crate) fn transfer_hierarchy(n: usize) -> Vec<CsrRect> {
    let mut sizes = vec![n];
    let mut cur = n;
    while cur % 2 == 0 && cur > COARSEST_TARGET {
        cur /= 2;
        sizes.push(cur);
    }
    if cur > COARSEST_MAX {
        return Vec::new();
    }
    sizes.windows(2).map(|w| prolongation(w[1])).collect()
}

/// Linear interpolation from the `nc x nc` mesh to the `2nc x 2nc` mesh.
pub(crate) fn prolongation(nc: usize) -> CsrRect {
    let nf = 2 * nc;
    let cs = nc + 1;
    let coarse = |i: usize, j: usize| i + j * cs;
    let mut rows = Vec::with_capacity((nf + 1) * (nf + 1));
    for jf in 0..=nf {
        for i_f in 0..=nf {
            let (i, j) = (i_f / 2, jf / 2);
            let row = match (i_f % 2, jf % 2) {
                (0, 0) => vec![(coarse(i, j), 1.0)],
                (1, 0) => vec![(coarse(i, j), 0.5), (coarse(i + 1, j), 0.5)],
                (0, 1) => vec![(coarse(i, j), 0.5), (coarse(i, j + 1), 0.5)],
                // midpoint of the cell diagonal (i, j) -> (i + 1, j + 1)
                _ => vec![(coarse(i, j), 0.5), (coarse(i + 1, j + 1), 0.5)],
            };
            rows.push(row);
        }
    }
    CsrRect::from_rows(cs * cs, rows)
}

#[derive(Debug, Clone)]
struct Level {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MultigridPreconditioner {
    levels: Vec<Level>,
    transfers: Vec<CsrRect>,
    /// Cholesky factor of the coarsest operator, row-major lower triangle.
    coarse_chol: Vec<f64>,
    coarse_n: usize,
}

impl MultigridPreconditioner {
    /// Builds the Galerkin hierarchy for `a` over the given prolongations.
    pub fn new(a: &CsrMatrix, transfers: &[CsrRect]) -> Result<Self> {
        let mut levels = vec![Level::new(a.clone())?];
        for p in transfers {
            let coarse = p.galerkin(&levels.last().expect("non-empty").a);
            levels.push(Level::new(coarse)?);
        }
        let last = &levels.last().expect("non-empty").a;
        let coarse_n = last.dim();
        let coarse_chol = cholesky(last)?;
        Ok(MultigridPreconditioner {
            levels,
            transfers: transfers.to_vec(),
            coarse_chol,
            coarse_n,
        })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    fn vcycle(&self, l: usize, r: &[f64], z: &mut [f64]) {
        if l + 1 == self.levels.len() {
            z.copy_from_slice(r);
            cholesky_solve(&self.coarse_chol, self.coarse_n, z);
            return;
        }
        let level = &self.levels[l];
        let p = &self.transfers[l];
        z.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..SMOOTHING_STEPS {
            level.gauss_seidel(r, z, false);
        }
        let az = level.a.mul_vec(z);
        let res: Vec<f64> = r.iter().zip(&az).map(|(a, b)| a - b).collect();
        let mut rc = vec![0.0; p.cols];
        p.mul_transpose_vec_into(&res, &mut rc);
        let mut ec = vec![0.0; p.cols];
        self.vcycle(l + 1, &rc, &mut ec);
        let mut ef = vec![0.0; p.rows];
        p.mul_vec_into(&ec, &mut ef);
        for (zi, e) in z.iter_mut().zip(&ef) {
            *zi += e;
        }
        for _ in 0..SMOOTHING_STEPS {
            level.gauss_seidel(r, z, true);
        }
    }
}

impl Preconditioner for MultigridPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.vcycle(0, r, z);
    }
}

impl Level {
    fn new(a: CsrMatrix) -> Result<Self> {
        let mut inv_diag = Vec::with_capacity(a.dim());
        for (i, d) in a.diagonal().into_iter().enumerate() {
            if !(d > 0.0) {
                return Err(Error::Singular { column: i, pivot: d });
            }
            inv_diag.push(1.0 / d);
        }
        Ok(Level { a, inv_diag })
    }

    fn gauss_seidel(&self, r: &[f64], z: &mut [f64], backward: bool) {
        let n = self.a.dim();
        let offs = self.a.row_offsets();
        let cols = self.a.col_indices();
        let vals = self.a.values();
        let mut relax = |i: usize| {
            let (lo, hi) = (offs[i], offs[i + 1]);
            let mut s = r[i];
            let mut diag = 0.0;
            for (&j, &v) in cols[lo..hi].iter().zip(&vals[lo..hi]) {
                if j == i {
                    diag = v;
                }
                s -= v * z[j];
            }
            // the loop subtracted the diagonal term too
            z[i] = (s + diag * z[i]) * self.inv_diag[i];
        };
        if backward {
            (0..n).rev().for_each(&mut relax);
        } else {
            (0..n).for_each(&mut relax);
        }
    }
}

fn cholesky(a: &CsrMatrix) -> Result<Vec<f64>> {
    let n = a.dim();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for (j, v) in a.row(i) {
            l[i * n + j] = v;
        }
    }
    for j in 0..n {
        let mut d = l[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) {
            return Err(Error::Singular { column: j, pivot: d });
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = l[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[f64], n: usize, x: &mut [f64]) {
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Mesh;

    #[test]
    fn hierarchy_sizes() {
        assert_eq!(transfer_hierarchy(8).len(), 0);
        assert_eq!(transfer_hierarchy(64).len(), 3);
        assert_eq!(transfer_hierarchy(24).len(), 2);
        // odd and too large to solve directly
        assert!(transfer_hierarchy(66).is_empty());
    }

    #[test]
    fn prolongation_reproduces_linear_functions() {
        let nc = 4;
        let p = prolongation(nc);
        let coarse = Mesh::unit_square(nc).unwrap();
        let fine = Mesh::unit_square(2 * nc).unwrap();
        let f = |q: [f64; 2]| 1.0 + 2.0 * q[0] - 0.5 * q[1];
        let xc: Vec<f64> = coarse.nodes().iter().map(|&q| f(q)).collect();
        let mut xf = vec![0.0; fine.n_nodes()];
        p.mul_vec_into(&xc, &mut xf);
        for (v, &q) in xf.iter().zip(fine.nodes()) {
            assert!((v - f(q)).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_roundtrip() {
        let a = CsrMatrix::from_triplets(
            3,
            &[(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0)],
        );
        let l = cholesky(&a).unwrap();
        let mut x = vec![5.0, 4.0, 2.0];
        cholesky_solve(&l, 3, &mut x);
        for (u, v) in x.iter().zip(&[1.0, 1.0, 1.0]) {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
