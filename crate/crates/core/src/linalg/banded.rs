use super::sparse::SparseMatrix;
use crate::error::{check_len, Error, Result};

/// Envelope (skyline) Cholesky factor `M = L Lᵀ` of a sparse SPD matrix.
///
/// Row `i` of `L` is stored densely from its first structural nonzero up to
/// the diagonal. Banded mass matrices factor in `O(n·b²)`; the periodic
/// wraparound rows only add a dense strip of width `b` at the bottom.
#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(m: &SparseMatrix) -> Result<Self> {
        let n = m.rows();
        check_len(n, m.cols(), "skyline factor of non-square matrix")?;
        let mut first: Vec<usize> = (0..n).collect();
        for (r, c, _) in m.iter() {
            // Envelope of the lower triangle, symmetrized.
            let (hi, lo) = if r >= c { (r, c) } else { (c, r) };
            first[hi] = first[hi].min(lo);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        let mut values = vec![0.0; total];
        for (r, c, v) in m.iter() {
            if c <= r {
                values[start[r] + c - first[r]] = v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let mut s = values[start[i] + j - fi];
                let row_i = &values[start[i] + k0 - fi..start[i] + j - fi];
                let row_j = &values[start[j] + k0 - fj..start[j] + j - fj];
                for (a, b) in row_i.iter().zip(row_j) {
                    s -= a * b;
                }
                if j < i {
                    values[start[i] + j - fi] = s / values[start[j] + j - fj];
                } else {
                    if s.is_nan() || s <= 0.0 || s.is_infinite() {
                        return Err(Error::Factorization { row: i, pivot: s });
                    }
                    values[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self {
            n,
            first,
            start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `M x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        // L y = b
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * x[k];
            }
            x[i] = s / row[i - fi];
        }
        // Lᵀ x = y
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            x[i] /= row[i - fi];
            let xi = x[i];
            for (k, l) in (fi..i).zip(row) {
                x[k] -= l * xi;
            }
        }
    }

    /// Solves `M x = b` for strided data: entries `x[offset + k*stride]`.
    pub(crate) fn solve_strided(&self, x: &mut [f64], offset: usize, stride: usize, work: &mut Vec<f64>) {
        work.clear();
        work.extend((0..self.n).map(|k| x[offset + k * stride]));
        self.solve_in_place(work);
        for (k, v) in work.iter().enumerate() {
            x[offset + k * stride] = *v;
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, b.len(), "skyline solve right-hand side")?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }
}

/// Factors `m` and solves `m x = b` once.
pub fn banded_factor_solve(m: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    SkylineCholesky::factor(m)?.solve(b)
}
