use nalgebra::DMatrix;
use num_complex::Complex64;

/// Square complex operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl FockOperator {
    /// Assembles from `(row, col, value)` entries; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, Complex64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < dim && c < dim, "entry ({r},{c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                cols.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        let keep: Vec<bool> = values.iter().map(|v| v.norm_sqr() != 0.0).collect();
        let mut k = 0;
        let (mut cols2, mut values2) = (Vec::with_capacity(cols.len()), Vec::with_capacity(values.len()));
        for i in 0..rows.len() {
            if keep[i] {
                row_ptr[rows[i] + 1] += 1;
                cols2.push(cols[i]);
                values2.push(values[i]);
                k += 1;
            }
        }
        debug_assert_eq!(k, cols2.len());
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: cols2,
            values: values2,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|&(cc, _)| cc == c).map(|(_, v)| v).unwrap_or_default()
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// Largest `|H_ij − H_ji*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Largest entry of `[H, D]` for a diagonal `D`, `|H_ij (d_j − d_i)|`.
    pub fn commutator_with_diagonal(&self, diag: &[f64]) -> f64 {
        assert_eq!(diag.len(), self.dim);
        let mut worst: f64 = 0.0;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max(v.norm() * (diag[c] - diag[r]).abs());
            }
        }
        worst
    }
}
