//! Minimal dense linear algebra over flat `Vec<f64>` storage.
//!
//! Only what the LSTM and the OLS regression need: a row-major matrix,
//! vector-matrix products oriented so inner loops stream memory
//! contiguously, and Gaussian elimination with partial pivoting.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};


use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch { left: rows * cols, right: data.len() });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `out = x * m` for a row vector `x` (length `m.rows()`).
///
/// Accumulates row-by-row so the inner loop walks `m` contiguously.
pub fn row_vec_mat(x: &[f64], m: &Mat, out: &mut [f64]) {
    debug_assert_eq!(x.len(), m.rows);
    debug_assert_eq!(out.len(), m.cols);
    out.fill(0.0);
    for (r, &coef) in x.iter().enumerate() {
        let row = m.row(r);
        for (o, &w) in out.iter_mut().zip(row) {
            *o += coef * w;
        }
    }
}

/// `out = m * y^T` for a column vector `y` (length `m.cols()`), i.e. the
/// product against the transpose reachable by row dot products.
pub fn mat_vec_transposed(m: &Mat, y: &[f64], out: &mut [f64]) {
    debug_assert_eq!(y.len(), m.cols);
    debug_assert_eq!(out.len(), m.rows);
    for (r, o) in out.iter_mut().enumerate() {
        let row = m.row(r);
        let mut acc = 0.0;
        for (&w, &v) in row.iter().zip(y) {
            acc += w * v;
        }
        *o = acc;
    }
}

/// Rank-one update `m += a^T b` (outer product of row vectors).
pub fn outer_add(m: &mut Mat, a: &[f64], b: &[f64]) {
    debug_assert_eq!(a.len(), m.rows);
    debug_assert_eq!(b.len(), m.cols);
    let cols = m.cols;
    for (r, &av) in a.iter().enumerate() {
        let row = &mut m.data[r * cols..(r + 1) * cols];
        for (w, &bv) in row.iter_mut().zip(b) {
            *w += av * bv;
        }
    }
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Consumes its arguments; `a` must be square with `a.rows() == b.len()`.
pub fn solve(mut a: Mat, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = a.rows;
    if a.cols != n || b.len() != n {
        return Err(Error::LengthMismatch { left: n, right: b.len() });
    }
    const PIVOT_TOL: f64 = 1e-12;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap();
        let pivot = a[(pivot_row, col)];
        if !pivot.is_finite() || pivot.abs() < PIVOT_TOL {
            return Err(Error::SingularMatrix);
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = a[(col, c)];
                a[(col, c)] = a[(pivot_row, c)];
                a[(pivot_row, c)] = tmp;
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[(r, col)] / a[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                let v = a[(col, c)];
                a[(r, c)] -= factor * v;
            }
            b[r] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc -= a[(r, c)] * x[c];
        }
        x[r] = acc / a[(r, r)];
    }
    Ok(x)
}
