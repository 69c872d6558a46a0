use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Row-major dense matrix for the small `J x J` systems of the Newton step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        DenseMatrix {
            rows: r,
            cols: c,
            values: rows.concat(),
        }
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let row = &self.values[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(x).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[i * self.cols + j]
    }
}

/// Largest system size accepted by the dense kernels.
pub const MAX_DENSE_DIM: usize = 64;

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(Error::InvalidArgument(format!(
            "dense_solve needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if n > MAX_DENSE_DIM {
        return Err(Error::InvalidArgument(format!(
            "dense_solve supports at most {MAX_DENSE_DIM} unknowns, got {n}"
        )));
    }
    if rhs.len() != n {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, expected {n}",
            rhs.len()
        )));
    }
    if m.values().iter().chain(rhs).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("dense system"));
    }
    let scale = m.max_abs();
    let threshold = n as f64 * f64::EPSILON * scale;
    let mut a = m.values().to_vec();
    let mut b = rhs.to_vec();
    for col in 0..n {
        let (piv, piv_abs) = (col..n)
            .map(|r| (r, a[r * n + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs <= threshold || scale == 0.0 {
            return Err(Error::Singular {
                column: col,
                pivot: a[piv * n + col],
            });
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[i * n + k] * x[k];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Singular values in descending order, by one-sided (Hestenes) Jacobi
/// rotations, i.e. implicit Jacobi diagonalization of `M^T M`.
pub fn singular_values(m: &DenseMatrix) -> Vec<f64> {
    let (rows, n) = (m.rows(), m.cols());
    // columns stored contiguously
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| m.column(j)).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let a = cols[p][k];
                    let b = cols[q][k];
                    cols[p][k] = c * a - s * b;
                    cols[q][k] = s * a + c * b;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Spectral condition number `sigma_max / sigma_min`; `+inf` when the
/// smallest singular value vanishes.
pub fn condition_number_2(m: &DenseMatrix) -> Result<f64> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidArgument(format!(
            "condition number needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() > MAX_DENSE_DIM {
        return Err(Error::InvalidArgument(format!(
            "condition number supports at most {MAX_DENSE_DIM} unknowns"
        )));
    }
    if m.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("condition number input"));
    }
    let sv = singular_values(m);
    let (max, min) = match (sv.first(), sv.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Ok(1.0),
    };
    if max == 0.0 || min <= max * f64::EPSILON * 1e-2 {
        return Ok(f64::INFINITY);
    }
    let k = max / min;
    Ok(if k.is_finite() { k } else { f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic pseudo-random entries in (-1, 1).
    fn lcg_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut s = seed;
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                m[(i, j)] = ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0;
            }
        }
        m
    }

    #[test]
    fn identity_solve() {
        let rhs = vec![1.0, -2.0, 3.5];
        assert_eq!(dense_solve(&DenseMatrix::identity(3), &rhs).unwrap(), rhs);
    }

    #[test]
    fn diagonal_solve() {
        let m = DenseMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 4.0]]);
        assert_eq!(dense_solve(&m, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn random_spd_residual() {
        let b = lcg_matrix(12, 7);
        let mut m = b.transpose().mul(&b);
        for i in 0..12 {
            m[(i, i)] += 1.0;
        }
        let rhs: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).cos()).collect();
        let x = dense_solve(&m, &rhs).unwrap();
        let r = m.mul_vec(&x);
        for (a, b) in r.iter().zip(&rhs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn singular_detected() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(dense_solve(&m, &[1.0, 1.0]), Err(Error::Singular { .. })));
        assert!(dense_solve(&DenseMatrix::zeros(2, 2), &[1.0, 1.0]).is_err());
    }

    #[test]
    fn rejects_oversized_and_non_square() {
        assert!(dense_solve(&DenseMatrix::identity(65), &[0.0; 65]).is_err());
        assert!(dense_solve(&DenseMatrix::zeros(2, 3), &[0.0; 2]).is_err());
    }

    #[test]
    fn condition_examples() {
        assert!((condition_number_2(&DenseMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        let d = DenseMatrix::from_rows(&[vec![10.0, 0.0], vec![0.0, 0.1]]);
        assert!((condition_number_2(&d).unwrap() - 100.0).abs() < 1e-10);
        let s = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(condition_number_2(&s).unwrap(), f64::INFINITY);
    }

    /// sigma_max^2 by power iteration and sigma_min^2 by inverse iteration on M^T M.
    fn power_oracle(m: &DenseMatrix) -> f64 {
        let n = m.rows();
        let mtm = m.transpose().mul(m);
        let normalize = |v: &mut Vec<f64>| {
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= s);
        };
        let mut v = vec![1.0; n];
        let mut lmax = 0.0;
        for _ in 0..5000 {
            let mut w = mtm.mul_vec(&v);
            lmax = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            normalize(&mut w);
            v = w;
        }
        let mut v = vec![1.0; n];
        let mut lmin_inv = 0.0;
        for _ in 0..5000 {
            let mut w = dense_solve(&mtm, &v).unwrap();
            lmin_inv = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            normalize(&mut w);
            v = w;
        }
        (lmax * lmin_inv).sqrt()
    }

    #[test]
    fn condition_matches_power_iteration_oracle() {
        for seed in [1, 2, 3] {
            let m = lcg_matrix(8, seed);
            let got = condition_number_2(&m).unwrap();
            let want = power_oracle(&m);
            assert!((got - want).abs() / want < 1e-6, "seed {seed}: {got} vs {want}");
        }
    }

    #[test]
    fn solve_then_multiply_is_identity() {
        let m = lcg_matrix(10, 11);
        let x: Vec<f64> = (0..10).map(|i| i as f64 - 4.5).collect();
        let b = m.mul_vec(&x);
        let y = dense_solve(&m, &b).unwrap();
        for (a, c) in x.iter().zip(&y) {
            assert!((a - c).abs() < 1e-9);
        }
    }
}
