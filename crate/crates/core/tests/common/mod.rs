#![allow(dead_code)]

use derham_ns::linalg::SparseMatrix;
use derham_ns::multipatch::{build_multipatch, MultipatchConfig};
use derham_ns::operators::{BoundaryKind, BoundarySpec, Edge, OperatorContext};
use derham_ns::spline::{DeRhamSequence, Slot};
use nalgebra::{DMatrix, DVector};
use rand::{rngs::StdRng, Rng, SeedableRng};

pub fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), &m.to_dense())
}

pub fn dvec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `max |a - b|` scaled by `max(1, max |b|)`.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    max_diff(a, b) / max_abs(b).max(1.0)
}

pub fn context(
    degree: usize,
    n_patches: usize,
    cells: usize,
    domain: [(f64, f64); 2],
    periodic: [bool; 2],
    spec: BoundarySpec,
) -> OperatorContext {
    let cfg = MultipatchConfig::new(degree, [n_patches; 2], [cells; 2], domain, periodic);
    OperatorContext::new(build_multipatch(&cfg).unwrap(), spec).unwrap()
}

pub fn periodic_context(degree: usize, n_patches: usize, cells: usize) -> OperatorContext {
    context(degree, n_patches, cells, [(0.0, 1.0), (0.0, 1.5)], [true, true], BoundarySpec::periodic())
}

/// Periodic when the grid allows it (a single periodic patch needs more
/// cells than the degree of its V0 factor, and thin periodic patches may lack
/// room for the projection stencil), otherwise clamped with the boundaryless
/// operators.
pub fn identity_context(degree: usize, n_patches: usize, cells: usize) -> OperatorContext {
    let domain = [(0.0, 1.0), (0.0, 1.5)];
    if n_patches > 1 || cells > degree + 1 {
        let cfg = MultipatchConfig::new(degree, [n_patches; 2], [cells; 2], domain, [true, true]);
        if let Ok(space) = build_multipatch(&cfg) {
            return OperatorContext::periodic(space).unwrap();
        }
    }
    let cfg = MultipatchConfig::new(degree, [n_patches; 2], [cells; 2], domain, [false, false]);
    OperatorContext::boundaryless(build_multipatch(&cfg).unwrap()).unwrap()
}

/// Mixed boundary data touching every operator: flux on the left/right,
/// pressure on the top/bottom, tangential data on parts of all edges.
pub fn mixed_spec() -> BoundarySpec {
    use BoundaryKind::*;
    let c = derham_ns::operators::BoundaryCondition::new;
    BoundarySpec::new(vec![
        c(Edge::Left, Normal, 0.3),
        c(Edge::Right, Normal, -0.2),
        c(Edge::Bottom, Pressure, -0.7),
        c(Edge::Top, Pressure, 1.1),
        c(Edge::Left, Tangential, 0.5),
        c(Edge::Top, Tangential, 1.0).on(0.2, 0.7),
        c(Edge::Bottom, Tangential, -0.4),
    ])
}

pub fn bounded_context(degree: usize, n_patches: usize, cells: usize) -> OperatorContext {
    context(degree, n_patches, cells, [(0.0, 1.0), (0.0, 1.0)], [false, false], mixed_spec())
}

/// Values of every basis function of a slot at a point, as dense rows.
fn basis_row(seq: &DeRhamSequence, slot: Slot, x: f64, y: f64) -> [Vec<f64>; 2] {
    let n = seq.dim(slot);
    let mut r = [vec![0.0; n], vec![0.0; n]];
    for (i, v) in seq.basis_at(slot, x, y).unwrap() {
        r[0][i] += v[0];
        r[1][i] += v[1];
    }
    r
}

/// Composite Gauss nodes on `[lo, hi]` respecting the cell breaks of the
/// degree-`p + 1` factor in direction `dir`.
fn edge_nodes(seq: &DeRhamSequence, dir: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let axis = if dir == 0 { &seq.x } else { &seq.y };
    let mut breaks: Vec<f64> = axis
        .a
        .segments()
        .iter()
        .flat_map(|s| s.breakpoints().to_vec())
        .filter(|&b| b > lo && b < hi)
        .collect();
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let rule = derham_ns::linalg::gauss_legendre(seq.degree() + 4).unwrap();
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        out.extend(rule.mapped(w[0], w[1]));
    }
    out
}

fn edge_point(seq: &DeRhamSequence, edge: Edge, t: f64) -> (f64, f64) {
    let [(xa, xb), (ya, yb)] = seq.domain();
    match edge {
        Edge::Left => (xa, t),
        Edge::Right => (xb, t),
        Edge::Bottom => (t, ya),
        Edge::Top => (t, yb),
    }
}

/// `∫ f(x, y, rows)` along `[lo, hi]` of an edge, where `rows` are the basis
/// values of `slot` at the point.
pub fn edge_integral(
    seq: &DeRhamSequence,
    edge: Edge,
    range: (f64, f64),
    slot: Slot,
    mut f: impl FnMut(f64, &[Vec<f64>; 2]),
) {
    let dir = 1 - if matches!(edge, Edge::Left | Edge::Right) { 0 } else { 1 };
    for (t, w) in edge_nodes(seq, dir, range.0, range.1) {
        let (x, y) = edge_point(seq, edge, t);
        f(w, &basis_row(seq, slot, x, y));
    }
}

/// Dense reference implementation of the operators.
pub struct DenseOracle {
    pub m0: DMatrix<f64>,
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    pub m0_inv: DMatrix<f64>,
    pub m1_inv: DMatrix<f64>,
    pub m2_inv: DMatrix<f64>,
    pub div_h: DMatrix<f64>,
    pub curl: DMatrix<f64>,
    pub pc0: DMatrix<f64>,
    pub pn: DMatrix<f64>,
    pub interior: [DMatrix<f64>; 2],
    pub grad_bl: DMatrix<f64>,
    pub grad_fg: DMatrix<f64>,
    pub b_pb: DVector<f64>,
    pub bt: DMatrix<f64>,
    pub b_ut: DVector<f64>,
    /// Quadrature weights and dense evaluation matrices at the volume nodes.
    pub w: DVector<f64>,
    pub e0: DMatrix<f64>,
    pub e1: [DMatrix<f64>; 2],
    pub e2: DMatrix<f64>,
}

impl DenseOracle {
    pub fn new(ctx: &OperatorContext) -> Self {
        let seq = ctx.seq();
        let (n0, n1, n2) = (seq.dim(Slot::V0), seq.dim(Slot::V1), seq.dim(Slot::V2));
        let m0 = dense(&seq.m0);
        let m1 = dense(&seq.m1);
        let m2 = dense(&seq.m2);
        let m0_inv = m0.clone().try_inverse().unwrap();
        let m1_inv = m1.clone().try_inverse().unwrap();
        let m2_inv = m2.clone().try_inverse().unwrap();
        let pc0 = dense(&ctx.space.pc0);
        let pc1 = dense(&ctx.space.pc1);
        let div_h = dense(&seq.div) * &pc1;
        let curl = dense(&seq.curl);
        let pn = dense(&ctx.pn);
        let interior = [&m2_inv * dense(&seq.b1), &m2_inv * dense(&seq.b2)];

        let mut bn = DMatrix::zeros(n2, n1);
        let mut b_pb = DVector::zeros(n1);
        let mut bt = DMatrix::zeros(n0, n1);
        let mut b_ut = DVector::zeros(n0);
        let periodic = seq.periodic();
        for edge in Edge::ALL {
            let fixed = if matches!(edge, Edge::Left | Edge::Right) { 0 } else { 1 };
            // An empty spec on a clamped grid is the boundaryless context.
            if periodic[fixed] || ctx.boundary.conditions.is_empty() {
                continue;
            }
            let n = edge.normal();
            let extent = seq.domain()[1 - fixed];
            // Flux and pressure terms.
            let mut p2 = Vec::new();
            edge_integral(seq, edge, extent, Slot::V2, |w, r| p2.push((w, r[0].clone())));
            let mut k = 0;
            edge_integral(seq, edge, extent, Slot::V1, |w, r| {
                let q = &p2[k].1;
                for i in 0..n2 {
                    if q[i] != 0.0 {
                        for j in 0..n1 {
                            bn[(i, j)] += w * q[i] * (r[0][j] * n[0] + r[1][j] * n[1]);
                        }
                    }
                }
                k += 1;
            });
            let mut t_ranges = Vec::new();
            for c in ctx.boundary.conditions.iter().filter(|c| c.edge == edge) {
                let range = c.range.unwrap_or(extent);
                match c.kind {
                    BoundaryKind::Pressure => edge_integral(seq, edge, range, Slot::V1, |w, r| {
                        for j in 0..n1 {
                            b_pb[j] += w * c.value * (r[0][j] * n[0] + r[1][j] * n[1]);
                        }
                    }),
                    BoundaryKind::Tangential => {
                        t_ranges.push(range);
                        edge_integral(seq, edge, range, Slot::V0, |w, r| {
                            for i in 0..n0 {
                                b_ut[i] += w * c.value * r[0][i];
                            }
                        })
                    }
                    BoundaryKind::Normal => {}
                }
            }
            // Tangential trace term on the complement of the tangential pieces.
            t_ranges.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut rest = Vec::new();
            let mut cur = extent.0;
            for (lo, hi) in t_ranges {
                if lo > cur {
                    rest.push((cur, lo));
                }
                cur = cur.max(hi);
            }
            if cur < extent.1 {
                rest.push((cur, extent.1));
            }
            for range in rest {
                let mut p0 = Vec::new();
                edge_integral(seq, edge, range, Slot::V0, |w, r| p0.push((w, r[0].clone())));
                let mut k = 0;
                edge_integral(seq, edge, range, Slot::V1, |w, r| {
                    let om = &p0[k].1;
                    for i in 0..n0 {
                        if om[i] != 0.0 {
                            for j in 0..n1 {
                                let cross = r[0][j] * n[1] - r[1][j] * n[0];
                                bt[(i, j)] += w * om[i] * cross;
                            }
                        }
                    }
                    k += 1;
                });
            }
        }
        let grad_bl = -(&m1_inv * div_h.transpose() * &m2);
        let grad_fg = &grad_bl + &m1_inv * bn.transpose();

        let nodes: Vec<(f64, f64, f64)> = seq
            .x
            .qpts
            .iter()
            .zip(&seq.x.qwts)
            .flat_map(|(&x, &wx)| seq.y.qpts.iter().zip(&seq.y.qwts).map(move |(&y, &wy)| (x, y, wx * wy)))
            .collect();
        let nq = nodes.len();
        let mut e0 = DMatrix::zeros(nq, n0);
        let mut e1 = [DMatrix::zeros(nq, n1), DMatrix::zeros(nq, n1)];
        let mut e2 = DMatrix::zeros(nq, n2);
        let mut w = DVector::zeros(nq);
        for (q, &(x, y, wq)) in nodes.iter().enumerate() {
            w[q] = wq;
            let r0 = basis_row(seq, Slot::V0, x, y);
            let r1 = basis_row(seq, Slot::V1, x, y);
            let r2 = basis_row(seq, Slot::V2, x, y);
            for i in 0..n0 {
                e0[(q, i)] = r0[0][i];
            }
            for j in 0..n1 {
                e1[0][(q, j)] = r1[0][j];
                e1[1][(q, j)] = r1[1][j];
            }
            for i in 0..n2 {
                e2[(q, i)] = r2[0][i];
            }
        }
        Self {
            m0,
            m1,
            m2,
            m0_inv,
            m1_inv,
            m2_inv,
            div_h,
            curl,
            pc0,
            pn,
            interior,
            grad_bl,
            grad_fg,
            b_pb,
            bt,
            b_ut,
            w,
            e0,
            e1,
            e2,
        }
    }

    pub fn grad_pb(&self, q: &[f64]) -> Vec<f64> {
        let k = &self.div_h * &self.pn;
        let x = &self.m1_inv * (-(k.transpose() * &self.m2 * dvec(q)) + &self.b_pb);
        x.as_slice().to_vec()
    }

    pub fn curl_ut(&self, v: &[f64]) -> Vec<f64> {
        let r = self.curl.transpose() * &self.m1 * dvec(v) - &self.bt * dvec(v) - &self.b_ut;
        (&self.m0_inv * self.pc0.transpose() * r).as_slice().to_vec()
    }

    pub fn advection_form(&self, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
        let (u, v, w) = (dvec(u), dvec(v), dvec(w));
        let ux = &self.e1[0] * &u;
        let uy = &self.e1[1] * &u;
        let mut total = 0.0;
        for k in 0..2 {
            let iv = &self.interior[k] * &v;
            let iw = &self.interior[k] * &w;
            let gv = &self.grad_fg * &iv;
            let gw = &self.grad_bl * &iw;
            let (gvx, gvy) = (&self.e1[0] * &gv, &self.e1[1] * &gv);
            let (gwx, gwy) = (&self.e1[0] * &gw, &self.e1[1] * &gw);
            let ivq = &self.e2 * &iv;
            let iwq = &self.e2 * &iw;
            for q in 0..self.w.len() {
                total += self.w[q]
                    * (iwq[q] * (ux[q] * gvx[q] + uy[q] * gvy[q]) - ivq[q] * (ux[q] * gwx[q] + uy[q] * gwy[q]));
            }
        }
        0.5 * total
    }

    /// `r_j = c_h(u, v, e_j)` written as a dense linear map of the test slot.
    pub fn advection_residual(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let (u, v) = (dvec(u), dvec(v));
        let ux = &self.e1[0] * &u;
        let uy = &self.e1[1] * &u;
        let mut r = DVector::zeros(u.len());
        for k in 0..2 {
            let iv = &self.interior[k] * &v;
            let gv = &self.grad_fg * &iv;
            let (gvx, gvy) = (&self.e1[0] * &gv, &self.e1[1] * &gv);
            let ivq = &self.e2 * &iv;
            let a = DVector::from_fn(self.w.len(), |q, _| self.w[q] * (ux[q] * gvx[q] + uy[q] * gvy[q]));
            let bx = DVector::from_fn(self.w.len(), |q, _| self.w[q] * ivq[q] * ux[q]);
            let by = DVector::from_fn(self.w.len(), |q, _| self.w[q] * ivq[q] * uy[q]);
            let ik_t = self.interior[k].transpose();
            r += &ik_t * (self.e2.transpose() * a)
                - &ik_t * self.grad_bl.transpose() * (self.e1[0].transpose() * bx + self.e1[1].transpose() * by);
        }
        (0.5 * r).as_slice().to_vec()
    }
}
