use super::CsrMatrix;
use crate::error::{Error, Result};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverReport {
    pub iterations: usize,
    /// Relative 2-norm of the (recursively updated) residual.
    pub final_residual: f64,
}

/// Symmetric positive definite approximation `z = M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone)]
pub struct JacobiPreconditioner {
    inv_diag: Vec<f64>,
}

impl JacobiPreconditioner {
    pub fn new(a: &CsrMatrix) -> Self {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        JacobiPreconditioner { inv_diag }
    }
}

impl Preconditioner for JacobiPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(y) {
        s += a * b;
    }
    s
}

pub(crate) fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Unpreconditioned conjugate gradients from a zero initial guess.
pub fn cg_solve(
    a: &CsrMatrix,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolverReport)> {
    pcg_solve(a, rhs, None, &IdentityPreconditioner, tol, max_iter)
}

/// Preconditioned conjugate gradients.
///
/// Stops once `||r_k|| <= tol ||rhs||` for the recursively updated residual.
/// All reductions run serially in index order, so a fixed input always gives
/// bit-identical output.
pub fn pcg_solve<P: Preconditioner + ?Sized>(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: Option<&[f64]>,
    precond: &P,
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolverReport)> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, matrix has dimension {n}",
            rhs.len()
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} not in (0, 1)")));
    }
    if rhs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("right-hand side"));
    }
    let rhs_norm = norm2(rhs);
    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    if rhs_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((
            x,
            SolverReport {
                iterations: 0,
                final_residual: 0.0,
            },
        ));
    }

    let mut r = rhs.to_vec();
    if x0.is_some() {
        let ax = a.mul_vec(&x);
        for (ri, axi) in r.iter_mut().zip(&ax) {
            *ri -= axi;
        }
    }
    let mut rel = norm2(&r) / rhs_norm;
    if rel <= tol {
        return Ok((
            x,
            SolverReport {
                iterations: 0,
                final_residual: rel,
            },
        ));
    }

    let mut z = vec![0.0; n];
    precond.apply(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || !rz.is_finite() {
            return Err(Error::NonFinite("conjugate gradient iteration"));
        }
        if pap <= 0.0 {
            return Err(Error::InvalidArgument(
                "matrix is not positive definite (p^T A p <= 0)".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / rhs_norm;
        if rel <= tol {
            return Ok((
                x,
                SolverReport {
                    iterations: it,
                    final_residual: rel,
                },
            ));
        }
        precond.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse_linalg::{dense_solve, DenseMatrix};

    fn poisson_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn identity_one_iteration() {
        let a = CsrMatrix::identity(5);
        let mut e1 = vec![0.0; 5];
        e1[0] = 1.0;
        let (x, rep) = cg_solve(&a, &e1, 1e-12, 50).unwrap();
        assert_eq!(x, e1);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn zero_rhs() {
        let a = poisson_1d(4);
        let (x, rep) = cg_solve(&a, &[0.0; 4], 1e-12, 50).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn poisson_matches_direct_oracle() {
        let n = 10;
        let a = poisson_1d(n);
        let rhs = vec![1.0; n];
        let (x, rep) = cg_solve(&a, &rhs, 1e-14, 100).unwrap();
        assert!(rep.final_residual <= 1e-14);
        let mut dense = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dense[(i, j)] = a.get(i, j);
            }
        }
        let oracle = dense_solve(&dense, &rhs).unwrap();
        for (u, v) in x.iter().zip(&oracle) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn jacobi_and_warm_start() {
        let a = poisson_1d(30);
        let rhs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let pre = JacobiPreconditioner::new(&a);
        let (x, _) = pcg_solve(&a, &rhs, None, &pre, 1e-13, 300).unwrap();
        let (x2, rep) = pcg_solve(&a, &rhs, Some(&x), &pre, 1e-10, 300).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(x, x2);
    }

    #[test]
    fn reports_non_convergence() {
        let a = poisson_1d(50);
        let rhs = vec![1.0; 50];
        match cg_solve(&a, &rhs, 1e-14, 3) {
            Err(Error::NotConverged { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_non_finite() {
        let a = CsrMatrix::identity(2);
        assert!(matches!(
            cg_solve(&a, &[f64::NAN, 1.0], 1e-12, 10),
            Err(Error::NonFinite(_))
        ));
    }
}
