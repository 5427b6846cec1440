//! Compressed sparse row matrices and the degree-normalized products used by
//! propagation.

use crate::matrix::Matrix;
use crate::par;
use crate::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Real>,
}

impl Csr {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Csr {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from `(row, col, value)` triplets. Duplicate
    /// coordinates are summed; columns within a row end up sorted.
    pub fn from_triplets(rows: usize, cols: usize, triplets: &[(usize, usize, Real)]) -> Self {
        let mut sorted: Vec<(usize, usize, Real)> = triplets.to_vec();
        sorted.sort_by_key(|e| (e.0, e.1));

        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<Real> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            assert!(r < rows && c < cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Csr {
            rows,
            cols,
            indptr,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    #[inline]
    pub fn row(&self, r: usize) -> (&[usize], &[Real]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.indptr[r + 1] - self.indptr[r]
    }

    pub fn row_sums(&self) -> Vec<Real> {
        (0..self.rows).map(|r| self.row(r).1.iter().sum()).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> Real {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> Csr {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let indptr = counts.clone();
        let mut next = counts;
        let mut indices = vec![0usize; self.nnz()];
        let mut values: Vec<Real> = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let slot = next[c];
                indices[slot] = r;
                values[slot] = v;
                next[c] += 1;
            }
        }
        Csr {
            rows: self.cols,
            cols: self.rows,
            indptr,
            indices,
            values,
        }
    }

    /// Scales each row to sum to one. Rows that sum to zero stay zero.
    pub fn row_normalized(&self) -> Csr {
        let sums = self.row_sums();
        let mut out = self.clone();
        for r in 0..self.rows {
            let s = sums[r];
            if s == 0.0 {
                continue;
            }
            let span = out.indptr[r]..out.indptr[r + 1];
            out.values[span].iter_mut().for_each(|v| *v /= s);
        }
        out
    }

    /// Scales entry `(r, c)` by `1 / sqrt(nnz(row r) * nnz(col c))`.
    pub fn sym_normalized(&self) -> Csr {
        let row_deg: Vec<Real> = (0..self.rows).map(|r| self.row_nnz(r) as Real).collect();
        let mut col_deg: Vec<Real> = vec![0.0; self.cols];
        for &c in &self.indices {
            col_deg[c] += 1.0;
        }
        let mut out = self.clone();
        for r in 0..self.rows {
            for k in out.indptr[r]..out.indptr[r + 1] {
                let c = out.indices[k];
                out.values[k] /= row_deg[r].sqrt() * col_deg[c].sqrt();
            }
        }
        out
    }

    /// Sparse-dense product `self * x`.
    pub fn mul_dense(&self, x: &Matrix) -> Matrix {
        assert_eq!(self.cols, x.rows(), "inner dimensions differ");
        let d = x.cols();
        let mut out = Matrix::zeros(self.rows, d);
        par::for_each_row(out.as_mut_slice(), d, |r, acc| {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for (a, &b) in acc.iter_mut().zip(x.row(c)) {
                    *a += v * b;
                }
            }
        });
        out
    }

    /// `out += self * x`
    pub fn mul_dense_add(&self, x: &Matrix, out: &mut Matrix) {
        assert_eq!(self.cols, x.rows(), "inner dimensions differ");
        assert_eq!(out.shape(), (self.rows, x.cols()));
        let d = x.cols();
        par::for_each_row(out.as_mut_slice(), d, |r, acc| {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                for (a, &b) in acc.iter_mut().zip(x.row(c)) {
                    *a += v * b;
                }
            }
        });
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                m[(r, c)] = v;
            }
        }
        m
    }
}
