use serde::{Deserialize, Serialize};

use super::broken1d::BrokenSpace1D;
use super::field::Slot;
use crate::error::{check_len, Error, Result};
use crate::linalg::{gauss_legendre, kron_apply, KronSolver, QuadratureRule, SparseMatrix};

/// Axis-aligned affine patch map `(x̂, ŷ) ↦ (h_x x̂ + b_x, h_y ŷ + b_y)` from
/// the reference square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub hx: f64,
    pub hy: f64,
    pub bx: f64,
    pub by: f64,
}

impl AffineMap {
    pub fn new(hx: f64, hy: f64, bx: f64, by: f64) -> Result<Self> {
        if !(hx > 0.0 && hy > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "patch map scalings must be positive, got h_x={hx}, h_y={hy}"
            )));
        }
        Ok(Self { hx, hy, bx, by })
    }

    pub fn apply(&self, xh: f64, yh: f64) -> (f64, f64) {
        (self.hx * xh + self.bx, self.hy * yh + self.by)
    }

    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.bx) / self.hx, (y - self.by) / self.hy)
    }

    pub fn jacobian_det(&self) -> f64 {
        self.hx * self.hy
    }

    /// `Dφ v` for a reference vector `v`.
    pub fn push_vector(&self, v: [f64; 2]) -> [f64; 2] {
        [self.hx * v[0], self.hy * v[1]]
    }

    /// Physical image `[x0, x1] × [y0, y1]` of the reference square.
    pub fn bounds(&self) -> [(f64, f64); 2] {
        [(self.bx, self.bx + self.hx), (self.by, self.by + self.hy)]
    }
}

/// One direction of a tensor-product sequence: the degree `p + 1` space `a`,
/// its derivative space `b` of degree `p`, and everything assembled from them.
#[derive(Clone, Debug)]
pub struct Axis {
    pub a: BrokenSpace1D,
    pub b: BrokenSpace1D,
    /// Derivative incidence `a → b`.
    pub d: SparseMatrix,
    pub ma: SparseMatrix,
    pub mb: SparseMatrix,
    /// Mixed Gram matrix `∫ b_i a_j`.
    pub mba: SparseMatrix,
    /// Nodes and weights of the elevated quadrature rule.
    pub qpts: Vec<f64>,
    pub qwts: Vec<f64>,
    /// Collocation of `a` and `b` at `qpts` and their transposes.
    pub ea: SparseMatrix,
    pub eb: SparseMatrix,
    pub ea_t: SparseMatrix,
    pub eb_t: SparseMatrix,
}

impl Axis {
    fn new(a: BrokenSpace1D, bilinear: &QuadratureRule, elevated: &QuadratureRule) -> Result<Self> {
        let b = a.derivative_space()?;
        let d = a.derivative_incidence()?;
        let ma = a.gram(&a, bilinear)?;
        let mb = b.gram(&b, bilinear)?;
        let mba = b.gram(&a, bilinear)?;
        let (qpts, qwts) = a.quadrature(elevated);
        let ea = a.collocation(elevated);
        let eb = b.collocation(elevated);
        let ea_t = ea.transpose();
        let eb_t = eb.transpose();
        Ok(Self {
            a,
            b,
            d,
            ma,
            mb,
            mba,
            qpts,
            qwts,
            ea,
            eb,
            ea_t,
            eb_t,
        })
    }

    pub fn nq(&self) -> usize {
        self.qpts.len()
    }
}

/// Tensor-product de Rham sequence
/// `V0 = A⊗A  --curl-->  V1 = (A⊗B) × (B⊗A)  --div-->  V2 = B⊗B`
/// where `A` has degree `p + 1` and `B = A'` has degree `p`.
///
/// Coefficients are stored row-major over `(i_x, i_y)`; a V1 vector is the
/// x-component block followed by the y-component block. The basis functions
/// are splines on the physical (affinely mapped) knots, which differ from the
/// push-forwards of reference splines only by constant factors per component,
/// so every assembled matrix already carries the map's Jacobian factors.
///
/// Sign conventions: `curl q = (∂₂q, −∂₁q)` and `div v = ∂₁v₁ + ∂₂v₂`.
#[derive(Clone, Debug)]
pub struct DeRhamSequence {
    degree: usize,
    pub x: Axis,
    pub y: Axis,
    pub curl: SparseMatrix,
    pub div: SparseMatrix,
    pub m0: SparseMatrix,
    pub m1: SparseMatrix,
    pub m2: SparseMatrix,
    /// `B_k[m][j] = ∫ Λ²_m (Λ¹_j)_k`, shape `dim V2 × dim V1`.
    pub b1: SparseMatrix,
    pub b2: SparseMatrix,
    m0_solver: KronSolver,
    m1x_solver: KronSolver,
    m1y_solver: KronSolver,
    m2_solver: KronSolver,
}

/// Gauss points per cell for bilinear forms of degree-`p` sequences.
pub fn bilinear_order(p: usize) -> usize {
    p + 3
}

/// Gauss points per cell for products of three fields of the sequence.
pub fn trilinear_order(p: usize) -> usize {
    (3 * (p + 1) + 2).div_ceil(2) + 1
}

impl DeRhamSequence {
    /// Builds the sequence from the degree-`p + 1` factors in each direction.
    pub fn from_factors(ax: BrokenSpace1D, ay: BrokenSpace1D) -> Result<Self> {
        let degree = ax
            .degree()
            .checked_sub(1)
            .ok_or_else(|| Error::InvalidArgument("factor spaces need degree >= 1".into()))?;
        if ay.degree() != degree + 1 {
            return Err(Error::InvalidArgument("factor spaces must share the degree".into()));
        }
        let bilinear = gauss_legendre(bilinear_order(degree))?;
        let elevated = gauss_legendre(trilinear_order(degree))?;
        let x = Axis::new(ax, &bilinear, &elevated)?;
        let y = Axis::new(ay, &bilinear, &elevated)?;

        let (nax, nbx) = (x.a.dim(), x.b.dim());
        let (nay, nby) = (y.a.dim(), y.b.dim());
        let i_ax = SparseMatrix::identity(nax);
        let i_ay = SparseMatrix::identity(nay);
        let i_bx = SparseMatrix::identity(nbx);
        let i_by = SparseMatrix::identity(nby);

        let curl_x = i_ax.kron(&y.d);
        let curl_y = x.d.kron(&i_ay).scaled(-1.0);
        let curl = SparseMatrix::from_blocks(&[vec![Some(&curl_x)], vec![Some(&curl_y)]])?;
        let div_x = x.d.kron(&i_by);
        let div_y = i_bx.kron(&y.d);
        let div = SparseMatrix::from_blocks(&[vec![Some(&div_x), Some(&div_y)]])?;

        let m0 = x.ma.kron(&y.ma);
        let m1x = x.ma.kron(&y.mb);
        let m1y = x.mb.kron(&y.ma);
        let m1 = SparseMatrix::block_diag(&[&m1x, &m1y]);
        let m2 = x.mb.kron(&y.mb);
        let b1x = x.mba.kron(&y.mb);
        let b2y = x.mb.kron(&y.mba);
        let b1 = SparseMatrix::from_blocks(&[vec![Some(&b1x), Some(&SparseMatrix::zeros(nbx * nby, nbx * nay))]])?;
        let b2 = SparseMatrix::from_blocks(&[vec![Some(&SparseMatrix::zeros(nbx * nby, nax * nby)), Some(&b2y)]])?;

        let m0_solver = KronSolver::new(&x.ma, &y.ma)?;
        let m1x_solver = KronSolver::new(&x.ma, &y.mb)?;
        let m1y_solver = KronSolver::new(&x.mb, &y.ma)?;
        let m2_solver = KronSolver::new(&x.mb, &y.mb)?;
        Ok(Self {
            degree,
            x,
            y,
            curl,
            div,
            m0,
            m1,
            m2,
            b1,
            b2,
            m0_solver,
            m1x_solver,
            m1y_solver,
            m2_solver,
        })
    }

    /// Sequence on a grid of `n_patches` equal patches per direction over
    /// `domain`, each with `cells_per_patch` cells per direction.
    pub fn new(
        degree: usize,
        n_patches: [usize; 2],
        cells_per_patch: [usize; 2],
        domain: [(f64, f64); 2],
        periodic: [bool; 2],
    ) -> Result<Self> {
        let ax = BrokenSpace1D::new(degree + 1, n_patches[0], cells_per_patch[0], domain[0], periodic[0])?;
        let ay = BrokenSpace1D::new(degree + 1, n_patches[1], cells_per_patch[1], domain[1], periodic[1])?;
        Self::from_factors(ax, ay)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self, slot: Slot) -> usize {
        match slot {
            Slot::V0 => self.x.a.dim() * self.y.a.dim(),
            Slot::V1 => self.n1x() + self.n1y(),
            Slot::V2 => self.x.b.dim() * self.y.b.dim(),
        }
    }

    pub fn n1x(&self) -> usize {
        self.x.a.dim() * self.y.b.dim()
    }

    pub fn n1y(&self) -> usize {
        self.x.b.dim() * self.y.a.dim()
    }

    pub fn domain(&self) -> [(f64, f64); 2] {
        [self.x.a.interval(), self.y.a.interval()]
    }

    pub fn area(&self) -> f64 {
        let [(x0, x1), (y0, y1)] = self.domain();
        (x1 - x0) * (y1 - y0)
    }

    pub fn periodic(&self) -> [bool; 2] {
        [self.x.a.periodic(), self.y.a.periodic()]
    }

    /// Smallest cell size over both directions.
    pub fn h_min(&self) -> f64 {
        self.x.a.cell_width().min(self.y.a.cell_width())
    }

    pub fn mass(&self, slot: Slot) -> &SparseMatrix {
        match slot {
            Slot::V0 => &self.m0,
            Slot::V1 => &self.m1,
            Slot::V2 => &self.m2,
        }
    }

    /// Solves `M_slot x = rhs` in place with the factored Kronecker masses.
    pub fn solve_mass_in_place(&self, slot: Slot, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.dim(slot));
        match slot {
            Slot::V0 => self.m0_solver.solve_in_place(rhs),
            Slot::V1 => {
                let (x, y) = rhs.split_at_mut(self.n1x());
                self.m1x_solver.solve_in_place(x);
                self.m1y_solver.solve_in_place(y);
            }
            Slot::V2 => self.m2_solver.solve_in_place(rhs),
        }
    }

    pub fn solve_mass(&self, slot: Slot, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(slot), rhs.len(), "mass solve right-hand side")?;
        let mut x = rhs.to_vec();
        self.solve_mass_in_place(slot, &mut x);
        Ok(x)
    }

    /// Number of quadrature nodes of the elevated rule, `(n_x, n_y)`.
    pub fn quad_shape(&self) -> (usize, usize) {
        (self.x.nq(), self.y.nq())
    }

    /// Tensor quadrature weights, row-major over `(q_x, q_y)`.
    pub fn quad_weights(&self) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.x.nq() * self.y.nq());
        for wx in &self.x.qwts {
            for wy in &self.y.qwts {
                w.push(wx * wy);
            }
        }
        w
    }

    /// Values of a V0 field at the quadrature nodes.
    pub fn eval_v0_quad(&self, c: &[f64]) -> Vec<f64> {
        kron_apply(&self.x.ea, &self.y.ea, c)
    }

    /// Component values of a V1 field at the quadrature nodes.
    pub fn eval_v1_quad(&self, c: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (cx, cy) = c.split_at(self.n1x());
        (
            kron_apply(&self.x.ea, &self.y.eb, cx),
            kron_apply(&self.x.eb, &self.y.ea, cy),
        )
    }

    pub fn eval_v2_quad(&self, c: &[f64]) -> Vec<f64> {
        kron_apply(&self.x.eb, &self.y.eb, c)
    }

    /// `∫ f Λ⁰_i` from weighted nodal values `wf = w ∘ f`.
    pub fn test_v0(&self, wf: &[f64]) -> Vec<f64> {
        kron_apply(&self.x.ea_t, &self.y.ea_t, wf)
    }

    /// `∫ f · Λ¹_i` from weighted nodal component values.
    pub fn test_v1(&self, wfx: &[f64], wfy: &[f64]) -> Vec<f64> {
        let mut out = kron_apply(&self.x.ea_t, &self.y.eb_t, wfx);
        out.extend(kron_apply(&self.x.eb_t, &self.y.ea_t, wfy));
        out
    }

    pub fn test_v2(&self, wf: &[f64]) -> Vec<f64> {
        kron_apply(&self.x.eb_t, &self.y.eb_t, wf)
    }

    /// Whether `(x, y)` lies in the (closed) domain.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.x.a.contains(x) && self.y.a.contains(y)
    }

    /// Nonzero basis functions of `slot` at a point, as `(index, value)` for
    /// scalar slots or `(index, [v_x, v_y])` folded into two lists for V1.
    pub fn basis_at(&self, slot: Slot, x: f64, y: f64) -> Result<Vec<(usize, [f64; 2])>> {
        if !self.contains(x, y) {
            return Err(Error::OutOfDomain { x, y });
        }
        let sx = self.x.a.find_segment(x);
        let sy = self.y.a.find_segment(y);
        Ok(self.basis_at_in_patch(slot, [sx, sy], x, y))
    }

    /// Like [`basis_at`](Self::basis_at) but evaluating the restriction to
    /// patch `(sx, sy)`.
    pub fn basis_at_in_patch(&self, slot: Slot, patch: [usize; 2], x: f64, y: f64) -> Vec<(usize, [f64; 2])> {
        let [sx, sy] = patch;
        let ax = self.x.a.basis_at_in_segment(sx, x);
        let bx = self.x.b.basis_at_in_segment(sx, x);
        let ay = self.y.a.basis_at_in_segment(sy, y);
        let by = self.y.b.basis_at_in_segment(sy, y);
        let mut out = Vec::new();
        let tensor = |fx: &[(usize, f64)], fy: &[(usize, f64)], ny: usize, off: usize, comp: usize, out: &mut Vec<(usize, [f64; 2])>| {
            for &(i, vx) in fx {
                for &(j, vy) in fy {
                    let mut v = [0.0; 2];
                    v[comp] = vx * vy;
                    out.push((off + i * ny + j, v));
                }
            }
        };
        match slot {
            Slot::V0 => tensor(&ax, &ay, self.y.a.dim(), 0, 0, &mut out),
            Slot::V2 => tensor(&bx, &by, self.y.b.dim(), 0, 0, &mut out),
            Slot::V1 => {
                tensor(&ax, &by, self.y.b.dim(), 0, 0, &mut out);
                tensor(&bx, &ay, self.y.a.dim(), self.n1x(), 1, &mut out);
            }
        }
        out
    }

    /// Point value of a field (`[v, 0]` for scalar slots).
    pub fn eval_point(&self, slot: Slot, coeffs: &[f64], x: f64, y: f64) -> Result<[f64; 2]> {
        check_len(self.dim(slot), coeffs.len(), "field coefficients")?;
        let mut v = [0.0; 2];
        for (i, b) in self.basis_at(slot, x, y)? {
            v[0] += coeffs[i] * b[0];
            v[1] += coeffs[i] * b[1];
        }
        Ok(v)
    }

    pub fn eval_point_in_patch(&self, slot: Slot, coeffs: &[f64], patch: [usize; 2], x: f64, y: f64) -> [f64; 2] {
        let mut v = [0.0; 2];
        for (i, b) in self.basis_at_in_patch(slot, patch, x, y) {
            v[0] += coeffs[i] * b[0];
            v[1] += coeffs[i] * b[1];
        }
        v
    }
}

/// A single mapped patch with its own de Rham sequence.
#[derive(Clone, Debug)]
pub struct DeRhamPatch {
    pub map: AffineMap,
    pub seq: DeRhamSequence,
}

/// Builds the sequence of degree `degree` on the image of the reference square
/// under `map`, with `n_cells` cells per direction.
pub fn build_derham_patch(
    degree: usize,
    n_cells: [usize; 2],
    periodic: [bool; 2],
    map: AffineMap,
) -> Result<DeRhamPatch> {
    let map = AffineMap::new(map.hx, map.hy, map.bx, map.by)?;
    let seq = DeRhamSequence::new(degree, [1, 1], n_cells, map.bounds(), periodic)?;
    Ok(DeRhamPatch { map, seq })
}
