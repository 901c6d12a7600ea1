//! Compressed-sparse-row matrices of `f64` and the panel products the
//! randomized SVD needs.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl AsRef<CsrMatrix> for CsrMatrix {
    fn as_ref(&self) -> &CsrMatrix {
        self
    }
}

impl CsrMatrix {
    /// Takes raw CSR arrays. Column indices must be strictly increasing in every row.
    pub fn from_parts(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        vals: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1
            || row_ptr[0] != 0
            || row_ptr[nrows] != cols.len()
            || cols.len() != vals.len()
        {
            return Err(Error::ShapeMismatch("inconsistent CSR arrays".into()));
        }
        for r in 0..nrows {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::ShapeMismatch("row pointers decrease".into()));
            }
            let row = &cols[row_ptr[r]..row_ptr[r + 1]];
            if row.windows(2).any(|w| w[0] >= w[1]) || row.iter().any(|&c| c as usize >= ncols) {
                return Err(Error::ShapeMismatch(format!(
                    "row {r} has unsorted or out-of-range columns"
                )));
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Builds from `(row, col, value)` triples in any order; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(u32, u32, f64)>) -> Result<Self> {
        if let Some(&(r, c, _)) = triplets
            .iter()
            .find(|&&(r, c, _)| r as usize >= nrows || c as usize >= ncols)
        {
            return Err(Error::ShapeMismatch(format!(
                "entry ({r}, {c}) outside {nrows}x{ncols}"
            )));
        }
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(u32, u32)> = None;
        for (r, c, x) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += x;
                continue;
            }
            last = Some((r, c));
            row_ptr[r as usize + 1] += 1;
            cols.push(c);
            vals.push(x);
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let x = m[(r, c)];
                if x != 0.0 {
                    cols.push(c as u32);
                    vals.push(x);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            nrows: m.nrows(),
            ncols: m.ncols(),
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> (&[u32], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.cols[span.clone()], &self.vals[span])
    }

    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&(c as u32)).ok().map(|i| vals[i])
    }

    /// Entries in `(row, col)` order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter()
                .zip(vals)
                .map(move |(&c, &x)| (r as u32, c, x))
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.vals
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.vals
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            row_ptr[c as usize + 1] += 1;
        }
        for i in 0..self.ncols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut next = row_ptr.clone();
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        for (r, c, x) in self.iter() {
            let slot = &mut next[c as usize];
            cols[*slot] = r;
            vals[*slot] = x;
            *slot += 1;
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, x) in self.iter() {
            m[(r as usize, c as usize)] = x;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows == self.ncols && self.transpose() == *self
    }

    /// `(A · X)ᵀ` given `Xᵀ`.
    ///
    /// Panels are passed transposed (`k × ncols`, column-major) so that every
    /// row of `X` is a contiguous column. Output columns are computed
    /// independently, so the result does not depend on the thread count.
    pub fn mul_panel_t(&self, x_t: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x_t.ncols(), self.ncols, "panel width must equal matrix columns");
        let k = x_t.nrows();
        let mut out = DMatrix::<f64>::zeros(k, self.nrows);
        if k == 0 {
            return out;
        }
        let src = x_t.as_slice();
        out.as_mut_slice()
            .par_chunks_mut(k)
            .enumerate()
            .for_each(|(r, dst)| {
                let (cols, vals) = self.row(r);
                for (&c, &a) in cols.iter().zip(vals) {
                    let col = &src[c as usize * k..(c as usize + 1) * k];
                    for (d, s) in dst.iter_mut().zip(col) {
                        *d += a * s;
                    }
                }
            });
        out
    }

    /// `‖A − U diag(sigma) Vᵀ‖_F` computed without forming the dense product.
    ///
    /// Uses `‖A‖² − 2⟨A, UΣVᵀ⟩ + ‖UΣVᵀ‖²`, where the last term needs only the
    /// small Gram matrices `UᵀU` and `VᵀV`. Falls back to the exact dense
    /// residual when the expansion loses precision.
    pub fn residual_norm(&self, u: &DMatrix<f64>, sigma: &[f64], v: &DMatrix<f64>) -> f64 {
        let d = sigma.len();
        assert_eq!(u.ncols(), d);
        assert_eq!(v.ncols(), d);
        let a2: f64 = self.vals.iter().map(|x| x * x).sum();
        let mut cross = 0.0;
        for (r, c, x) in self.iter() {
            let mut s = 0.0;
            for k in 0..d {
                s += u[(r as usize, k)] * sigma[k] * v[(c as usize, k)];
            }
            cross += x * s;
        }
        let gu = u.transpose() * u;
        let gv = v.transpose() * v;
        let mut b2 = 0.0;
        for i in 0..d {
            for j in 0..d {
                b2 += sigma[i] * sigma[j] * gu[(i, j)] * gv[(i, j)];
            }
        }
        let sq = a2 - 2.0 * cross + b2;
        if sq > 1e-6 * a2.max(f64::MIN_POSITIVE) || self.nrows * self.ncols > 4_000_000 {
            return sq.max(0.0).sqrt();
        }
        // Cancellation regime: compute the residual entry by entry.
        let mut dense = self.to_dense();
        for k in 0..d {
            for c in 0..self.ncols {
                let vk = sigma[k] * v[(c, k)];
                if vk == 0.0 {
                    continue;
                }
                for r in 0..self.nrows {
                    dense[(r, c)] -= u[(r, k)] * vk;
                }
            }
        }
        dense.norm()
    }
}
