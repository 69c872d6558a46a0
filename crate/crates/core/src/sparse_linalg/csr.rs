use rayon::prelude::*;

/// Rows above this count use a row-parallel matrix-vector product. Each row
/// is still summed left to right, so results are bit-identical to serial.
const PAR_MATVEC_ROWS: usize = 16_384;

/// Square sparse matrix in compressed sparse row format, columns sorted per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            row.clear();
            row.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            // stable sort keeps the summation order of duplicates deterministic
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            n,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column/value pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    /// Position of entry `(i, j)` in the value array, if stored.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.row_offsets[i];
        let cols = &self.col_indices[start..self.row_offsets[i + 1]];
        cols.binary_search(&j).ok().map(|k| start + k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        let row_dot = |i: usize| {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            self.col_indices[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .fold(0.0, |s, (&j, &v)| s + v * x[j])
        };
        if self.n >= PAR_MATVEC_ROWS {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row_dot(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row_dot(i);
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                r += v * y[j];
            }
            s += xi * r;
        }
        s
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v)))
            .collect();
        CsrMatrix::from_triplets(self.n, &triplets)
    }

    /// Largest `|A_ij - A_ji|` relative to the largest `|A_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    pub fn to_dense(&self) -> super::DenseMatrix {
        let mut d = super::DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Rectangular sparse matrix used for grid transfer operators.
#[derive(Debug, Clone)]
pub struct CsrRect {
    pub rows: usize,
    pub cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrRect {
    /// Rows given as lists of `(col, value)`, already free of duplicates.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for mut r in rows.iter().cloned() {
            r.sort_by_key(|&(c, _)| c);
            for (c, v) in r {
                col_indices.push(c);
                values.push(v);
            }
            row_offsets.push(col_indices.len());
        }
        CsrRect {
            rows: rows.len(),
            cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// `y = P x` (`x` has `cols` entries).
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                s += self.values[k] * x[self.col_indices[k]];
            }
            *yi = s;
        }
    }

    /// `y = P^T x` (`x` has `rows` entries).
    pub fn mul_transpose_vec_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, xi) in x.iter().enumerate() {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                y[self.col_indices[k]] += self.values[k] * xi;
            }
        }
    }

    pub fn transpose(&self) -> CsrRect {
        let mut rows = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for k in self.row_offsets[i]..self.row_offsets[i + 1] {
                rows[self.col_indices[k]].push((i, self.values[k]));
            }
        }
        CsrRect::from_rows(self.rows, rows)
    }

    /// Galerkin product `P^T A P` for a square `A` with `rows` rows.
    pub fn galerkin(&self, a: &CsrMatrix) -> CsrMatrix {
        assert_eq!(a.dim(), self.rows);
        let pt = self.transpose();
        let nc = self.cols;
        let mut marker = vec![usize::MAX; nc];
        let mut acc = vec![0.0; nc];
        let mut row_offsets = vec![0];
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut touched = Vec::new();
        for ci in 0..nc {
            touched.clear();
            for kt in pt.row_offsets[ci]..pt.row_offsets[ci + 1] {
                let i = pt.col_indices[kt];
                let pti = pt.values[kt];
                for ka in a.row_offsets[i]..a.row_offsets[i + 1] {
                    let j = a.col_indices[ka];
                    let w = pti * a.values[ka];
                    for kp in self.row_offsets[j]..self.row_offsets[j + 1] {
                        let cj = self.col_indices[kp];
                        if marker[cj] != ci {
                            marker[cj] = ci;
                            acc[cj] = 0.0;
                            touched.push(cj);
                        }
                        acc[cj] += w * self.values[kp];
                    }
                }
            }
            touched.sort_unstable();
            for &cj in &touched {
                col_indices.push(cj);
                values.push(acc[cj]);
            }
            row_offsets.push(col_indices.len());
        }
        CsrMatrix {
            n: nc,
            row_offsets,
            col_indices,
            values,
        }
    }
}
