//! Compressed sparse row matrices.
//!
//! Assembly goes through [`TripletBuilder`], which accepts repeated `(row, col)`
//! entries and sums them on [`TripletBuilder::finalize`]. A finalized
//! [`SparseMatrix`] is immutable; every operator in the crate is stored in this
//! form.

use crate::error::{check_len, Error, Result};

/// Additive assembly buffer of `(row, col, value)` triplets.
#[derive(Clone, Debug)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(rows: usize, cols: usize, capacity: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::with_capacity(capacity),
        }
    }

    /// Adds `value` at `(row, col)`. Out-of-range indices panic: they are
    /// assembly bugs, not data errors.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        assert!(
            row < self.rows && col < self.cols,
            "triplet ({row}, {col}) out of range for {}x{}",
            self.rows,
            self.cols
        );
        self.entries.push((row, col, value));
    }

    /// Sorts, merges duplicates and drops exact zeros.
    pub fn finalize(mut self) -> SparseMatrix {
        self.entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut data: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *data.last_mut().expect("merged entry") += v;
            } else {
                indices.push(c);
                data.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.rows {
            indptr[r + 1] += indptr[r];
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            data,
        }
        .pruned()
    }
}

/// Real-valued CSR matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            indptr: vec![0; rows + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut b = TripletBuilder::with_capacity(diag.len(), diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            b.push(i, i, d);
        }
        b.finalize()
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), rows * cols);
        let mut b = TripletBuilder::new(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = dense[r * cols + c];
                if v != 0.0 {
                    b.push(r, c, v);
                }
            }
        }
        b.finalize()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.data[span])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (idx, val) = self.row(r);
        match idx.binary_search(&c) {
            Ok(k) => val[k],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (idx, val) = self.row(r);
            idx.iter().zip(val).map(move |(&c, &v)| (r, c, v))
        })
    }

    fn pruned(mut self) -> Self {
        if self.data.iter().all(|&v| v != 0.0) {
            return self;
        }
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.data[k] != 0.0 {
                    indices.push(self.indices[k]);
                    data.push(self.data[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
        self
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "matvec: input length");
        assert_eq!(y.len(), self.rows, "matvec: output length");
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    /// `y = Aᵀ x` without forming the transpose.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows, "matvec_t: input length");
        let mut y = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.data[k] * xr;
            }
        }
        y
    }

    pub fn try_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len(), "matrix-vector product")?;
        Ok(self.matvec(x))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.cols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.cols {
            counts[c + 1] += counts[c];
        }
        let mut next = counts.clone();
        let mut indices = vec![0usize; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                let dst = next[c];
                indices[dst] = r;
                data[dst] = self.data[k];
                next[c] += 1;
            }
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            indptr: counts,
            indices,
            data,
        }
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        check_len(self.cols, other.rows, "sparse matrix product")?;
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut acc = vec![0.0; other.cols];
        let mut mark = vec![usize::MAX; other.cols];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            for k in self.indptr[r]..self.indptr[r + 1] {
                let a = self.data[k];
                let mid = self.indices[k];
                for kk in other.indptr[mid]..other.indptr[mid + 1] {
                    let c = other.indices[kk];
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * other.data[kk];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                indices.push(c);
                data.push(acc[c]);
            }
            indptr[r + 1] = indices.len();
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            indptr,
            indices,
            data,
        }
        .pruned())
    }

    /// `alpha A + beta B`.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        check_len(self.rows, other.rows, "sparse sum rows")?;
        check_len(self.cols, other.cols, "sparse sum cols")?;
        let mut b = TripletBuilder::with_capacity(self.rows, self.cols, self.nnz() + other.nnz());
        for (r, c, v) in self.iter() {
            b.push(r, c, alpha * v);
        }
        for (r, c, v) in other.iter() {
            b.push(r, c, beta * v);
        }
        Ok(b.finalize())
    }

    pub fn scaled(&self, alpha: f64) -> SparseMatrix {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out.pruned()
    }

    /// Kronecker product `A ⊗ B`, with row index `ia * B.rows + ib`.
    pub fn kron(&self, other: &SparseMatrix) -> SparseMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut indptr = Vec::with_capacity(rows + 1);
        indptr.push(0);
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut data = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.rows {
            let (ia, va) = self.row(ra);
            for rb in 0..other.rows {
                let (ib, vb) = other.row(rb);
                for (&ca, &a) in ia.iter().zip(va) {
                    for (&cb, &b) in ib.iter().zip(vb) {
                        indices.push(ca * other.cols + cb);
                        data.push(a * b);
                    }
                }
                indptr.push(indices.len());
            }
        }
        SparseMatrix {
            rows,
            cols,
            indptr,
            indices,
            data,
        }
        .pruned()
    }

    /// Block-diagonal matrix `diag(blocks...)`.
    pub fn block_diag(blocks: &[&SparseMatrix]) -> SparseMatrix {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut b = TripletBuilder::new(rows, cols);
        let (mut ro, mut co) = (0, 0);
        for blk in blocks {
            for (r, c, v) in blk.iter() {
                b.push(ro + r, co + c, v);
            }
            ro += blk.rows;
            co += blk.cols;
        }
        b.finalize()
    }

    /// Stacks blocks in a grid; `None` entries are zero blocks. Every block row
    /// must contain at least one block fixing its height, likewise columns.
    pub fn from_blocks(grid: &[Vec<Option<&SparseMatrix>>]) -> Result<SparseMatrix> {
        let nbr = grid.len();
        let nbc = grid.first().map_or(0, |r| r.len());
        let mut heights = vec![None; nbr];
        let mut widths = vec![None; nbc];
        for (i, row) in grid.iter().enumerate() {
            check_len(nbc, row.len(), "block grid row")?;
            for (j, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    for (slot, val) in [(&mut heights[i], m.rows), (&mut widths[j], m.cols)] {
                        match slot {
                            Some(prev) if *prev != val => {
                                return Err(Error::DimensionMismatch {
                                    expected: *prev,
                                    got: val,
                                    context: "block grid",
                                })
                            }
                            _ => *slot = Some(val),
                        }
                    }
                }
            }
        }
        let heights: Vec<usize> = heights
            .into_iter()
            .map(|h| h.ok_or_else(|| Error::InvalidArgument("empty block row".into())))
            .collect::<Result<_>>()?;
        let widths: Vec<usize> = widths
            .into_iter()
            .map(|w| w.ok_or_else(|| Error::InvalidArgument("empty block column".into())))
            .collect::<Result<_>>()?;
        let mut b = TripletBuilder::new(heights.iter().sum(), widths.iter().sum());
        let mut ro = 0;
        for (i, row) in grid.iter().enumerate() {
            let mut co = 0;
            for (j, blk) in row.iter().enumerate() {
                if let Some(m) = blk {
                    for (r, c, v) in m.iter() {
                        b.push(ro + r, co + c, v);
                    }
                }
                co += widths[j];
            }
            ro += heights[i];
        }
        Ok(b.finalize())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for (r, c, v) in self.iter() {
            out[r * self.cols + c] = v;
        }
        out
    }

    /// Largest absolute entry of `A - B`.
    pub fn max_abs_diff(&self, other: &SparseMatrix) -> f64 {
        self.add_scaled(1.0, other, -1.0)
            .map(|d| d.data.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(f64::INFINITY)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Half-bandwidth `max |r - c|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.iter().map(|(r, c, _)| r.abs_diff(c)).max().unwrap_or(0)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
