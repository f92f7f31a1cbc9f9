use crate::error::{Error, Result};
use crate::linalg::{QuadratureRule, SparseMatrix, TripletBuilder};

/// Maximal-regularity B-spline space on a uniform grid of one interval.
///
/// Clamped spaces use an open knot vector, so the first and last basis
/// functions interpolate the end values. Periodic spaces use the extended knot
/// vector `t_j = a + (j - d)h`, and basis function `i` is supported on
/// `[a + ih, a + (i + d + 1)h]` modulo the period.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineSpace1D {
    degree: usize,
    n_cells: usize,
    breakpoints: Vec<f64>,
    periodic: bool,
    knots: Vec<f64>,
    dim: usize,
}

/// Builds a uniform spline space of the given degree on `interval`.
pub fn build_space_1d(
    degree: usize,
    n_cells: usize,
    interval: (f64, f64),
    periodic: bool,
) -> Result<SplineSpace1D> {
    SplineSpace1D::new(degree, n_cells, interval, periodic)
}

impl SplineSpace1D {
    pub fn new(degree: usize, n_cells: usize, interval: (f64, f64), periodic: bool) -> Result<Self> {
        let (a, b) = interval;
        if n_cells == 0 {
            return Err(Error::InvalidArgument("spline space needs at least one cell".into()));
        }
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidArgument(format!("invalid interval [{a}, {b}]")));
        }
        if periodic && n_cells <= degree {
            return Err(Error::InvalidArgument(format!(
                "periodic space of degree {degree} needs more than {degree} cells, got {n_cells}"
            )));
        }
        let h = (b - a) / n_cells as f64;
        let mut breakpoints: Vec<f64> = (0..=n_cells).map(|i| a + i as f64 * h).collect();
        breakpoints[n_cells] = b;
        let d = degree;
        let (knots, dim) = if periodic {
            let knots = (0..=n_cells + 2 * d)
                .map(|j| a + (j as f64 - d as f64) * h)
                .collect();
            (knots, n_cells)
        } else {
            let mut knots = vec![a; d + 1];
            knots.extend_from_slice(&breakpoints[1..n_cells]);
            knots.extend(std::iter::repeat_n(b, d + 1));
            (knots, n_cells + d)
        };
        Ok(Self {
            degree,
            n_cells,
            breakpoints,
            periodic,
            knots,
            dim,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.breakpoints[0], self.breakpoints[self.n_cells])
    }

    pub fn cell_width(&self) -> f64 {
        let (a, b) = self.interval();
        (b - a) / self.n_cells as f64
    }

    /// Cell containing `x`; points on a breakpoint belong to the cell on the
    /// right, except the right end of the interval. Periodic spaces wrap `x`.
    pub fn find_cell(&self, x: f64) -> usize {
        let (a, b) = self.interval();
        let mut x = x;
        if self.periodic {
            x = a + (x - a).rem_euclid(b - a);
        }
        let c = ((x - a) / self.cell_width()).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(self.n_cells - 1)
        }
    }

    /// Global index of the `local`-th basis function that is nonzero on `cell`.
    pub fn global_index(&self, cell: usize, local: usize) -> usize {
        if self.periodic {
            (cell + local + self.n_cells - self.degree) % self.n_cells
        } else {
            cell + local
        }
    }

    /// Values of the `degree + 1` basis functions nonzero on `cell` at `x`.
    pub fn eval_cell(&self, cell: usize, x: f64, vals: &mut [f64]) {
        eval_nonzero(&self.knots, self.degree, self.degree + cell, x, vals);
    }

    /// Values and first derivatives of the basis functions nonzero on `cell`.
    pub fn eval_cell_with_derivative(&self, cell: usize, x: f64, vals: &mut [f64], ders: &mut [f64]) {
        let d = self.degree;
        let span = d + cell;
        eval_nonzero(&self.knots, d, span, x, vals);
        ders.iter_mut().for_each(|v| *v = 0.0);
        if d == 0 {
            return;
        }
        let mut low = vec![0.0; d];
        eval_nonzero(&self.knots, d - 1, span, x, &mut low);
        // N'_{i,d} = d (N_{i,d-1}/(t_{i+d}-t_i) - N_{i+1,d-1}/(t_{i+d+1}-t_{i+1}))
        // with nonzero degree-(d-1) functions indexed span-d+1..=span.
        let t = &self.knots;
        for l in 0..=d {
            let i = span - d + l;
            let mut v = 0.0;
            if l >= 1 {
                let den = t[i + d] - t[i];
                if den > 0.0 {
                    v += low[l - 1] / den;
                }
            }
            if l < d {
                let den = t[i + d + 1] - t[i + 1];
                if den > 0.0 {
                    v -= low[l] / den;
                }
            }
            ders[l] = d as f64 * v;
        }
    }

    /// Nonzero basis functions at `x` as `(index, value)` pairs.
    pub fn basis_at(&self, x: f64) -> Vec<(usize, f64)> {
        let cell = self.find_cell(x);
        let mut vals = vec![0.0; self.degree + 1];
        self.eval_cell(cell, self.wrap(x), &mut vals);
        vals.iter()
            .enumerate()
            .map(|(l, &v)| (self.global_index(cell, l), v))
            .collect()
    }

    fn wrap(&self, x: f64) -> f64 {
        if self.periodic {
            let (a, b) = self.interval();
            a + (x - a).rem_euclid(b - a)
        } else {
            x
        }
    }

    /// Evaluates the spline with coefficients `coeffs` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        self.basis_at(x).into_iter().map(|(i, v)| coeffs[i] * v).sum()
    }

    pub fn evaluate_derivative(&self, coeffs: &[f64], x: f64) -> f64 {
        let cell = self.find_cell(x);
        let n = self.degree + 1;
        let (mut vals, mut ders) = (vec![0.0; n], vec![0.0; n]);
        self.eval_cell_with_derivative(cell, self.wrap(x), &mut vals, &mut ders);
        (0..n).map(|l| coeffs[self.global_index(cell, l)] * ders[l]).sum()
    }

    /// Space of one degree lower on the same breakpoints, which contains the
    /// derivatives of this space.
    pub fn derivative_space(&self) -> Result<SplineSpace1D> {
        if self.degree == 0 {
            return Err(Error::InvalidArgument(
                "degree-0 space has no derivative space".into(),
            ));
        }
        SplineSpace1D::new(self.degree - 1, self.n_cells, self.interval(), self.periodic)
    }

    /// Matrix mapping spline coefficients to the coefficients of the
    /// derivative in [`derivative_space`](Self::derivative_space).
    pub fn derivative_incidence(&self) -> Result<SparseMatrix> {
        let d = self.degree;
        if d == 0 {
            return Err(Error::InvalidArgument(
                "derivative incidence needs degree >= 1".into(),
            ));
        }
        if self.periodic {
            let n = self.n_cells;
            let inv_h = 1.0 / self.cell_width();
            let mut t = TripletBuilder::with_capacity(n, n, 2 * n);
            for j in 0..n {
                t.push(j, j, inv_h);
                t.push(j, (j + n - 1) % n, -inv_h);
            }
            Ok(t.finalize())
        } else {
            let n = self.dim;
            let t = &self.knots;
            let mut b = TripletBuilder::with_capacity(n - 1, n, 2 * n);
            for j in 1..n {
                let s = d as f64 / (t[j + d] - t[j]);
                b.push(j - 1, j, s);
                b.push(j - 1, j - 1, -s);
            }
            Ok(b.finalize())
        }
    }

    /// Quadrature nodes and weights, `rule.order()` per cell, ordered by cell.
    pub fn quadrature(&self, rule: &QuadratureRule) -> (Vec<f64>, Vec<f64>) {
        let mut pts = Vec::with_capacity(self.n_cells * rule.order());
        let mut wts = Vec::with_capacity(self.n_cells * rule.order());
        for c in 0..self.n_cells {
            for (x, w) in rule.mapped(self.breakpoints[c], self.breakpoints[c + 1]) {
                pts.push(x);
                wts.push(w);
            }
        }
        (pts, wts)
    }

    /// Basis values at the quadrature nodes of [`quadrature`](Self::quadrature):
    /// row `cell * order + q`, column basis index.
    pub fn collocation(&self, rule: &QuadratureRule) -> SparseMatrix {
        let nq = rule.order();
        let n = self.degree + 1;
        let mut t = TripletBuilder::with_capacity(self.n_cells * nq, self.dim, self.n_cells * nq * n);
        let mut vals = vec![0.0; n];
        for c in 0..self.n_cells {
            for (q, (x, _)) in rule.mapped(self.breakpoints[c], self.breakpoints[c + 1]).enumerate() {
                self.eval_cell(c, x, &mut vals);
                for (l, &v) in vals.iter().enumerate() {
                    t.push(c * nq + q, self.global_index(c, l), v);
                }
            }
        }
        t.finalize()
    }

    /// Gram matrix `G[i][j] = ∫ self_i other_j` on shared breakpoints.
    pub fn gram(&self, other: &SplineSpace1D, rule: &QuadratureRule) -> Result<SparseMatrix> {
        if self.breakpoints != other.breakpoints || self.periodic != other.periodic {
            return Err(Error::Incompatible(
                "gram matrix of spaces on different grids".into(),
            ));
        }
        let (na, nb) = (self.degree + 1, other.degree + 1);
        let mut t = TripletBuilder::with_capacity(self.dim, other.dim, self.n_cells * na * nb);
        let (mut va, mut vb) = (vec![0.0; na], vec![0.0; nb]);
        for c in 0..self.n_cells {
            for (x, w) in rule.mapped(self.breakpoints[c], self.breakpoints[c + 1]) {
                self.eval_cell(c, x, &mut va);
                other.eval_cell(c, x, &mut vb);
                for (i, &a) in va.iter().enumerate() {
                    for (j, &b) in vb.iter().enumerate() {
                        t.push(self.global_index(c, i), other.global_index(c, j), w * a * b);
                    }
                }
            }
        }
        Ok(t.finalize())
    }

    /// Range of cells on which basis function `i` is nonzero, as a list.
    pub fn support_cells(&self, i: usize) -> Vec<usize> {
        (0..self.n_cells)
            .filter(|&c| (0..=self.degree).any(|l| self.global_index(c, l) == i))
            .collect()
    }

}

/// Cox-de Boor recursion for the `d + 1` basis functions of degree `d` that
/// are nonzero on knot span `span`.
fn eval_nonzero(t: &[f64], d: usize, span: usize, x: f64, out: &mut [f64]) {
    out[0] = 1.0;
    let mut left = [0.0; 32];
    let mut right = [0.0; 32];
    assert!(d < 32, "spline degree too large");
    for j in 1..=d {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let tmp = if den != 0.0 { out[r] / den } else { 0.0 };
            out[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        out[j] = saved;
    }
}
