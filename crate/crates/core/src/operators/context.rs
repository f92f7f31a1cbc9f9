use super::boundary::{assemble, BoundaryKind, BoundaryOperators, BoundarySpec};
use crate::error::{check_len, Result};
use crate::linalg::{dot, SparseMatrix};
use crate::multipatch::MultipatchSpace;
use crate::spline::{DeRhamSequence, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryMode {
    Periodic,
    Bounded,
}

/// Everything the weak operators need: the (broken) space, its boundary
/// data and the derived matrices.
///
/// Naming of the weak gradients follows their boundary treatment:
/// * `weak_grad`: boundaryless adjoint of `-Div ∘ Pc1`;
/// * `weak_grad_full`: adds `∫_∂Ω q (v · n)`;
/// * `weak_grad_with_pressure_bc`: adjoint of `-Div ∘ Pc1 ∘ Pn` plus
///   `∫_{Γ_p} p_b (v · n)`.
///
/// The curls likewise: `weak_curl` is boundaryless and
/// `weak_curl_with_tangential_bc` carries the `v × n` and `u_t` terms.
#[derive(Clone, Debug)]
pub struct OperatorContext {
    pub space: MultipatchSpace,
    pub boundary: BoundarySpec,
    /// Diagonal 0/1 projector cancelling the flux DOFs on `Γ_n`.
    pub pn: SparseMatrix,
    /// `Div ∘ Pc1`.
    pub div_h: SparseMatrix,
    /// `Curl ∘ Pc0`.
    pub curl_h: SparseMatrix,
    /// `Div ∘ Pc1 ∘ Pn`.
    pub k: SparseMatrix,
    keep: Vec<bool>,
    flux_values: Vec<(usize, f64)>,
    div_h_t: SparseMatrix,
    curl_h_t: SparseMatrix,
    k_t: SparseMatrix,
    bn_t: SparseMatrix,
    bt: SparseMatrix,
    b_pb: Vec<f64>,
    b_ut: Vec<f64>,
    b_t: [SparseMatrix; 2],
    weights: Vec<f64>,
    has_pressure_bc: bool,
}

impl OperatorContext {
    pub fn new(space: MultipatchSpace, boundary: BoundarySpec) -> Result<Self> {
        let ops = assemble(&space.seq, &boundary)?;
        Self::from_parts(space, boundary, ops)
    }

    /// Context whose weak operators ignore the boundary entirely (all
    /// boundary integrals dropped), on any grid. On a torus this equals
    /// [`periodic`](Self::periodic).
    pub fn boundaryless(space: MultipatchSpace) -> Result<Self> {
        let ops = BoundaryOperators::none(&space.seq);
        Self::from_parts(space, BoundarySpec::periodic(), ops)
    }

    fn from_parts(space: MultipatchSpace, boundary: BoundarySpec, ops: BoundaryOperators) -> Result<Self> {
        let seq = &space.seq;
        let keep_diag: Vec<f64> = ops.keep.iter().map(|&k| if k { 1.0 } else { 0.0 }).collect();
        let pn = SparseMatrix::diagonal(&keep_diag);
        let div_h = seq.div.matmul(&space.pc1)?;
        let curl_h = seq.curl.matmul(&space.pc0)?;
        let k = div_h.matmul(&pn)?;
        let b_t = [seq.b1.transpose(), seq.b2.transpose()];
        let weights = seq.quad_weights();
        let has_pressure_bc = boundary.has_kind(BoundaryKind::Pressure);
        Ok(Self {
            div_h_t: div_h.transpose(),
            curl_h_t: curl_h.transpose(),
            k_t: k.transpose(),
            bn_t: ops.bn.transpose(),
            bt: ops.bt,
            b_pb: ops.b_pb,
            b_ut: ops.b_ut,
            keep: ops.keep,
            flux_values: ops.flux_values,
            b_t,
            weights,
            has_pressure_bc,
            space,
            boundary,
            pn,
            div_h,
            curl_h,
            k,
        })
    }

    /// Context without boundary data (fully periodic grids, or homogeneous
    /// tests of the boundaryless operators).
    pub fn periodic(space: MultipatchSpace) -> Result<Self> {
        Self::new(space, BoundarySpec::periodic())
    }

    pub fn seq(&self) -> &DeRhamSequence {
        &self.space.seq
    }

    pub fn dim(&self, slot: Slot) -> usize {
        self.space.seq.dim(slot)
    }

    pub fn mode(&self) -> BoundaryMode {
        if self.seq().periodic() == [true, true] {
            BoundaryMode::Periodic
        } else {
            BoundaryMode::Bounded
        }
    }

    /// Whether some part of the boundary carries a pressure condition (which
    /// pins the pressure constant).
    pub fn has_pressure_bc(&self) -> bool {
        self.has_pressure_bc
    }

    /// Quadrature weights of the elevated rule, row-major over nodes.
    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Pn v`.
    pub fn apply_pn(&self, v: &[f64]) -> Vec<f64> {
        v.iter()
            .zip(&self.keep)
            .map(|(&x, &k)| if k { x } else { 0.0 })
            .collect()
    }

    pub fn normal_projection(&self) -> &SparseMatrix {
        &self.pn
    }

    /// Overwrites the `Γ_n` flux DOFs of `u` with the prescribed normal data.
    pub fn impose_normal_data(&self, u: &mut [f64]) {
        for &(i, v) in &self.flux_values {
            u[i] = v;
        }
    }

    /// `∫_{Γ_p} p_b (Λ¹_j · n)`.
    pub fn pressure_boundary_vector(&self) -> &[f64] {
        &self.b_pb
    }

    /// `∫_{Γ_t} u_t Λ⁰_i`.
    pub fn tangential_boundary_vector(&self) -> &[f64] {
        &self.b_ut
    }

    fn solve(&self, slot: Slot, mut rhs: Vec<f64>) -> Vec<f64> {
        self.seq().solve_mass_in_place(slot, &mut rhs);
        rhs
    }

    /// `G̃q` with `M1 G̃q = -(Div Pc1)ᵀ M2 q`.
    pub fn weak_grad(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V2), q.len(), "weak gradient argument")?;
        let mut rhs = self.div_h_t.matvec(&self.seq().m2.matvec(q));
        rhs.iter_mut().for_each(|x| *x = -*x);
        Ok(self.solve(Slot::V1, rhs))
    }

    /// Weak gradient including the boundary integral `∫_∂Ω q (v · n)`.
    pub fn weak_grad_full(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V2), q.len(), "weak gradient argument")?;
        let mut rhs = self.div_h_t.matvec(&self.seq().m2.matvec(q));
        let bnd = self.bn_t.matvec(q);
        rhs.iter_mut().zip(&bnd).for_each(|(x, b)| *x = b - *x);
        Ok(self.solve(Slot::V1, rhs))
    }

    /// `M1 x = -(Div Pc1 Pn)ᵀ M2 q + ∫_{Γ_p} p_b (Λ¹ · n)`.
    pub fn weak_grad_with_pressure_bc(&self, q: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V2), q.len(), "weak gradient argument")?;
        let mut rhs = self.k_t.matvec(&self.seq().m2.matvec(q));
        rhs.iter_mut().zip(&self.b_pb).for_each(|(x, b)| *x = b - *x);
        Ok(self.solve(Slot::V1, rhs))
    }

    /// `C̃v` with `M0 C̃v = (Curl Pc0)ᵀ M1 v`.
    pub fn weak_curl(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V1), v.len(), "weak curl argument")?;
        let rhs = self.curl_h_t.matvec(&self.seq().m1.matvec(v));
        Ok(self.solve(Slot::V0, rhs))
    }

    /// `M0 ω = Pc0ᵀ (Curlᵀ M1 v − ∫_{∂Ω∖Γ_t} (v × n) Λ⁰ − ∫_{Γ_t} u_t Λ⁰)`.
    pub fn weak_curl_with_tangential_bc(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V1), v.len(), "weak curl argument")?;
        let seq = self.seq();
        let mut r = seq.curl.matvec_t(&seq.m1.matvec(v));
        let bt = self.bt.matvec(v);
        for ((x, b), u) in r.iter_mut().zip(&bt).zip(&self.b_ut) {
            *x -= b + u;
        }
        let rhs = self.space.pc0.matvec_t(&r);
        Ok(self.solve(Slot::V0, rhs))
    }

    /// `ĩ_k u`: L2 projection of the `k`-th component of `u` onto V2.
    pub fn interior_product(&self, u: &[f64], k: usize) -> Result<Vec<f64>> {
        check_len(self.dim(Slot::V1), u.len(), "interior product argument")?;
        let b = if k == 0 { &self.seq().b1 } else { &self.seq().b2 };
        Ok(self.solve(Slot::V2, b.matvec(u)))
    }

    /// `c_h(u, v, w) = ½ Σ_k ∫ u · [ĩ_k(w) G̃_fg(ĩ_k v) − ĩ_k(v) G̃(ĩ_k w)]`.
    pub fn advection_form(&self, u: &[f64], v: &[f64], w: &[f64]) -> Result<f64> {
        let n1 = self.dim(Slot::V1);
        check_len(n1, u.len(), "advection form")?;
        check_len(n1, v.len(), "advection form")?;
        check_len(n1, w.len(), "advection form")?;
        let seq = self.seq();
        let (ux, uy) = seq.eval_v1_quad(u);
        let mut total = 0.0;
        for k in 0..2 {
            let iv = self.interior_product(v, k)?;
            let iw = self.interior_product(w, k)?;
            let (gvx, gvy) = seq.eval_v1_quad(&self.weak_grad_full(&iv)?);
            let (gwx, gwy) = seq.eval_v1_quad(&self.weak_grad(&iw)?);
            let ivq = seq.eval_v2_quad(&iv);
            let iwq = seq.eval_v2_quad(&iw);
            for q in 0..self.weights.len() {
                let a = iwq[q] * (ux[q] * gvx[q] + uy[q] * gvy[q]);
                let b = ivq[q] * (ux[q] * gwx[q] + uy[q] * gwy[q]);
                total += self.weights[q] * (a - b);
            }
        }
        Ok(0.5 * total)
    }

    /// `r_j = c_h(u, v, Λ¹_j)`.
    ///
    /// The test-side gradient is moved onto the trial fields by adjointness,
    /// so only a fixed number of mass solves is needed:
    /// `r = ½ Σ_k B_kᵀ (M2⁻¹ m_k + Div Pc1 M1⁻¹ ζ_k)` with
    /// `m_k = ∫ Λ² (u · G̃_fg ĩ_k v)` and `ζ_k = ∫ (ĩ_k v) u · Λ¹`.
    pub fn advection_residual(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let n1 = self.dim(Slot::V1);
        check_len(n1, u.len(), "advection residual")?;
        check_len(n1, v.len(), "advection residual")?;
        let seq = self.seq();
        let (ux, uy) = seq.eval_v1_quad(u);
        let nq = self.weights.len();
        let mut r = vec![0.0; n1];
        let mut wf = vec![0.0; nq];
        let mut wfx = vec![0.0; nq];
        let mut wfy = vec![0.0; nq];
        for k in 0..2 {
            let iv = self.interior_product(v, k)?;
            let (gx, gy) = seq.eval_v1_quad(&self.weak_grad_full(&iv)?);
            let ivq = seq.eval_v2_quad(&iv);
            for q in 0..nq {
                let w = self.weights[q];
                wf[q] = w * (ux[q] * gx[q] + uy[q] * gy[q]);
                wfx[q] = w * ivq[q] * ux[q];
                wfy[q] = w * ivq[q] * uy[q];
            }
            let mut acc = self.solve(Slot::V2, seq.test_v2(&wf));
            let zeta = self.solve(Slot::V1, seq.test_v1(&wfx, &wfy));
            let g = self.div_h.matvec(&zeta);
            acc.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            let part = self.b_t[k].matvec(&acc);
            r.iter_mut().zip(&part).for_each(|(x, p)| *x += 0.5 * p);
        }
        Ok(r)
    }

    /// `d_h(u, v) = ∫ C̃_{u_t}(u) C̃(v)`.
    pub fn viscous_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let wu = self.weak_curl_with_tangential_bc(u)?;
        let wv = self.weak_curl(v)?;
        Ok(dot(&wu, &self.seq().m0.matvec(&wv)))
    }

    /// `r_j = d_h(u, Λ¹_j) = (M1 Curl Pc0 C̃_{u_t} u)_j`.
    pub fn viscous_residual(&self, u: &[f64]) -> Result<Vec<f64>> {
        let w = self.weak_curl_with_tangential_bc(u)?;
        Ok(self.seq().m1.matvec(&self.curl_h.matvec(&w)))
    }

    /// `∫ f · Pc1 Λ¹_j` for a vector field `f`.
    pub fn forcing_functional(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        let seq = self.seq();
        let (nx, ny) = seq.quad_shape();
        let mut wfx = vec![0.0; nx * ny];
        let mut wfy = vec![0.0; nx * ny];
        for (i, &x) in seq.x.qpts.iter().enumerate() {
            for (j, &y) in seq.y.qpts.iter().enumerate() {
                let q = i * ny + j;
                let v = f(x, y);
                wfx[q] = self.weights[q] * v[0];
                wfy[q] = self.weights[q] * v[1];
            }
        }
        self.space.pc1.matvec_t(&seq.test_v1(&wfx, &wfy))
    }
}
