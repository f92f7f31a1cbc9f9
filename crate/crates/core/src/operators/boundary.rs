use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gauss_legendre, QuadratureRule, SparseMatrix, TripletBuilder};
use crate::spline::{bilinear_order, BrokenSpace1D, DeRhamSequence, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];

    /// Direction of the coordinate that is constant on the edge.
    pub fn fixed_dir(self) -> usize {
        match self {
            Edge::Left | Edge::Right => 0,
            Edge::Bottom | Edge::Top => 1,
        }
    }

    /// Direction along the edge.
    pub fn along_dir(self) -> usize {
        1 - self.fixed_dir()
    }

    /// Sign of the outward normal's only nonzero component.
    pub fn normal_sign(self) -> f64 {
        match self {
            Edge::Left | Edge::Bottom => -1.0,
            Edge::Right | Edge::Top => 1.0,
        }
    }

    pub fn normal(self) -> [f64; 2] {
        let mut n = [0.0; 2];
        n[self.fixed_dir()] = self.normal_sign();
        n
    }

    fn is_high(self) -> bool {
        self.normal_sign() > 0.0
    }
}

/// Which boundary law a piece of an edge carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// Strong `u · n = value`.
    Normal,
    /// Weak `p = value`.
    Pressure,
    /// Weak `u × n = value`.
    Tangential,
}

/// One piece of boundary data: constant `value` on `range` (coordinates
/// along the edge, whole edge when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryCondition {
    pub edge: Edge,
    pub kind: BoundaryKind,
    #[serde(default)]
    pub value: f64,
    #[serde(default)]
    pub range: Option<(f64, f64)>,
}

impl BoundaryCondition {
    pub fn new(edge: Edge, kind: BoundaryKind, value: f64) -> Self {
        Self {
            edge,
            kind,
            value,
            range: None,
        }
    }

    pub fn on(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    #[serde(default)]
    pub conditions: Vec<BoundaryCondition>,
}

impl BoundarySpec {
    pub fn periodic() -> Self {
        Self::default()
    }

    pub fn new(conditions: Vec<BoundaryCondition>) -> Self {
        Self { conditions }
    }

    pub fn of_kind(&self, kind: BoundaryKind) -> impl Iterator<Item = &BoundaryCondition> {
        self.conditions.iter().filter(move |c| c.kind == kind)
    }

    pub fn has_kind(&self, kind: BoundaryKind) -> bool {
        self.of_kind(kind).next().is_some()
    }
}

/// Quadrature nodes along an edge restricted to a sub-range, tagged with the
/// segment of the along-edge factor that owns them.
struct EdgeQuadrature {
    nodes: Vec<(f64, f64, usize)>,
}

impl EdgeQuadrature {
    fn new(space: &BrokenSpace1D, rule: &QuadratureRule, lo: f64, hi: f64) -> Self {
        let mut nodes = Vec::new();
        for (s, seg) in space.segments().iter().enumerate() {
            let bp = seg.breakpoints();
            for c in 0..seg.n_cells() {
                let a = bp[c].max(lo);
                let b = bp[c + 1].min(hi);
                if b - a > 1e-14 * (bp[c + 1] - bp[c]) {
                    nodes.extend(rule.mapped(a, b).map(|(x, w)| (x, w, s)));
                }
            }
        }
        Self { nodes }
    }

    /// `∫ f_i g_j` for basis functions of `f` and `g` along the edge.
    fn gram(&self, f: &BrokenSpace1D, g: &BrokenSpace1D, mut push: impl FnMut(usize, usize, f64)) {
        for &(x, w, s) in &self.nodes {
            let fv = f.basis_at_in_segment(s, x);
            let gv = g.basis_at_in_segment(s, x);
            for &(i, a) in &fv {
                for &(j, b) in &gv {
                    push(i, j, w * a * b);
                }
            }
        }
    }

    /// `∫ f_i`.
    fn moments(&self, f: &BrokenSpace1D, mut push: impl FnMut(usize, f64)) {
        for &(x, w, s) in &self.nodes {
            for (i, a) in f.basis_at_in_segment(s, x) {
                push(i, w * a);
            }
        }
    }
}

/// Boundary matrices and data vectors of a sequence under a boundary spec.
#[derive(Clone, Debug)]
pub(crate) struct BoundaryOperators {
    /// `∫_∂Ω Λ²_i (Λ¹_j · n)`, shape `dim V2 × dim V1`.
    pub bn: SparseMatrix,
    /// `∫_{∂Ω∖Γ_t} (Λ¹_j × n) Λ⁰_i`, shape `dim V0 × dim V1`.
    pub bt: SparseMatrix,
    /// `∫_{Γ_p} p_b (Λ¹_j · n)`.
    pub b_pb: Vec<f64>,
    /// `∫_{Γ_t} u_t Λ⁰_i`.
    pub b_ut: Vec<f64>,
    /// False for flux DOFs on `Γ_n`.
    pub keep: Vec<bool>,
    /// Prescribed coefficients of the `Γ_n` flux DOFs.
    pub flux_values: Vec<(usize, f64)>,
}

impl BoundaryOperators {
    /// No boundary terms at all.
    pub fn none(seq: &DeRhamSequence) -> Self {
        let (n0, n1, n2) = (seq.dim(Slot::V0), seq.dim(Slot::V1), seq.dim(Slot::V2));
        Self {
            bn: SparseMatrix::zeros(n2, n1),
            bt: SparseMatrix::zeros(n0, n1),
            b_pb: vec![0.0; n1],
            b_ut: vec![0.0; n0],
            keep: vec![true; n1],
            flux_values: Vec::new(),
        }
    }
}

struct Layout {
    n0y: usize,
    n1x: usize,
    n1y_inner: usize,
    n1x_inner: usize,
    n2y: usize,
}

impl Layout {
    fn new(seq: &DeRhamSequence) -> Self {
        Self {
            n0y: seq.y.a.dim(),
            n1x: seq.n1x(),
            n1x_inner: seq.y.b.dim(),
            n1y_inner: seq.y.a.dim(),
            n2y: seq.y.b.dim(),
        }
    }

    fn v0(&self, ix: usize, iy: usize) -> usize {
        ix * self.n0y + iy
    }

    fn v1x(&self, ix: usize, iy: usize) -> usize {
        ix * self.n1x_inner + iy
    }

    fn v1y(&self, ix: usize, iy: usize) -> usize {
        self.n1x + ix * self.n1y_inner + iy
    }

    fn v2(&self, ix: usize, iy: usize) -> usize {
        ix * self.n2y + iy
    }
}

fn axis(seq: &DeRhamSequence, dir: usize) -> &crate::spline::Axis {
    if dir == 0 {
        &seq.x
    } else {
        &seq.y
    }
}

fn edge_extent(seq: &DeRhamSequence, edge: Edge) -> (f64, f64) {
    seq.domain()[edge.along_dir()]
}

fn clip_range(seq: &DeRhamSequence, c: &BoundaryCondition) -> Result<(f64, f64)> {
    let (a, b) = edge_extent(seq, c.edge);
    let tol = 1e-12 * (b - a);
    match c.range {
        None => Ok((a, b)),
        Some((lo, hi)) if lo < hi && lo >= a - tol && hi <= b + tol => Ok((lo.max(a), hi.min(b))),
        Some((lo, hi)) => Err(Error::Config(format!(
            "range [{lo}, {hi}] on the {:?} edge is empty or leaves [{a}, {b}]",
            c.edge
        ))),
    }
}

/// Complement of sorted, disjoint intervals inside `[a, b]`.
fn complement(mut parts: Vec<(f64, f64)>, a: f64, b: f64) -> Vec<(f64, f64)> {
    parts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut out = Vec::new();
    let mut cur = a;
    for (lo, hi) in parts {
        if lo > cur {
            out.push((cur, lo));
        }
        cur = cur.max(hi);
    }
    if cur < b {
        out.push((cur, b));
    }
    out
}

/// Checks that `parts` tile `[a, b]` without overlap.
fn check_tiling(mut parts: Vec<(f64, f64)>, a: f64, b: f64) -> bool {
    let tol = 1e-12 * (b - a);
    parts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut cur = a;
    for (lo, hi) in parts {
        if (lo - cur).abs() > tol {
            return false;
        }
        cur = hi;
    }
    (cur - b).abs() <= tol
}

fn check_disjoint(mut parts: Vec<(f64, f64)>) -> bool {
    parts.sort_by(|p, q| p.0.total_cmp(&q.0));
    parts.windows(2).all(|w| w[0].1 <= w[1].0 + 1e-12 * (w[1].1 - w[0].0).abs())
}

pub(crate) fn validate(seq: &DeRhamSequence, spec: &BoundarySpec) -> Result<()> {
    let periodic = seq.periodic();
    for c in &spec.conditions {
        if periodic[c.edge.fixed_dir()] {
            return Err(Error::Config(format!(
                "boundary condition on the {:?} edge of a periodic direction",
                c.edge
            )));
        }
        if !c.value.is_finite() {
            return Err(Error::Config(format!("non-finite boundary value on the {:?} edge", c.edge)));
        }
        clip_range(seq, c)?;
    }
    for edge in Edge::ALL {
        if periodic[edge.fixed_dir()] {
            continue;
        }
        let (a, b) = edge_extent(seq, edge);
        let ranges = |kinds: &[BoundaryKind]| -> Result<Vec<(f64, f64)>> {
            spec.conditions
                .iter()
                .filter(|c| c.edge == edge && kinds.contains(&c.kind))
                .map(|c| clip_range(seq, c))
                .collect()
        };
        if !check_tiling(ranges(&[BoundaryKind::Normal, BoundaryKind::Pressure])?, a, b) {
            return Err(Error::Config(format!(
                "normal-velocity and pressure pieces must partition the {edge:?} edge"
            )));
        }
        if !check_disjoint(ranges(&[BoundaryKind::Tangential])?) {
            return Err(Error::Config(format!("overlapping tangential pieces on the {edge:?} edge")));
        }
    }
    Ok(())
}

pub(crate) fn assemble(seq: &DeRhamSequence, spec: &BoundarySpec) -> Result<BoundaryOperators> {
    validate(seq, spec)?;
    let lay = Layout::new(seq);
    let (n0, n1, n2) = (seq.dim(Slot::V0), seq.dim(Slot::V1), seq.dim(Slot::V2));
    let rule = gauss_legendre(bilinear_order(seq.degree()))?;
    let mut bn = TripletBuilder::new(n2, n1);
    let mut bt = TripletBuilder::new(n0, n1);
    let mut b_pb = vec![0.0; n1];
    let mut b_ut = vec![0.0; n0];
    let mut keep = vec![true; n1];
    let mut flux: Vec<Option<f64>> = vec![None; n1];

    for edge in Edge::ALL {
        let fixed = edge.fixed_dir();
        if seq.periodic()[fixed] {
            continue;
        }
        let s = edge.normal_sign();
        let fa = if edge.is_high() { axis(seq, fixed).a.dim() - 1 } else { 0 };
        let fb = if edge.is_high() { axis(seq, fixed).b.dim() - 1 } else { 0 };
        let along = axis(seq, edge.along_dir());
        let (a, b) = edge_extent(seq, edge);
        // Index maps in edge-local terms: normal flux DOF, tangential trace
        // DOF, V0 and V2 traces, each from the along-edge index.
        let flux_dof = |j: usize| if fixed == 0 { lay.v1x(fa, j) } else { lay.v1y(j, fa) };
        let tang_dof = |j: usize| if fixed == 0 { lay.v1y(fb, j) } else { lay.v1x(j, fb) };
        let v0_dof = |i: usize| if fixed == 0 { lay.v0(fa, i) } else { lay.v0(i, fa) };
        let v2_dof = |i: usize| if fixed == 0 { lay.v2(fb, i) } else { lay.v2(i, fb) };
        // v × n = v1 n2 − v2 n1.
        let tang_sign = if fixed == 0 { -s } else { s };

        let whole = EdgeQuadrature::new(&along.b, &rule, a, b);
        whole.gram(&along.b, &along.b, |i, j, v| bn.push(v2_dof(i), flux_dof(j), s * v));

        let mut t_ranges = Vec::new();
        let mut n_dofs = Vec::new();
        let mut p_dofs = Vec::new();
        for c in spec.conditions.iter().filter(|c| c.edge == edge) {
            let (lo, hi) = clip_range(seq, c)?;
            let q = EdgeQuadrature::new(&along.b, &rule, lo, hi);
            match c.kind {
                BoundaryKind::Pressure => {
                    q.moments(&along.b, |j, v| b_pb[flux_dof(j)] += s * c.value * v);
                    p_dofs.extend(along.b.dofs_meeting(lo, hi));
                }
                BoundaryKind::Normal => {
                    for j in along.b.dofs_meeting(lo, hi) {
                        let dof = flux_dof(j);
                        let val = s * c.value;
                        match flux[dof] {
                            Some(prev) if (prev - val).abs() > 1e-14 * prev.abs().max(1.0) => {
                                return Err(Error::Config(format!(
                                    "flux DOF on the {edge:?} edge carries two different normal velocities"
                                )));
                            }
                            _ => flux[dof] = Some(val),
                        }
                        keep[dof] = false;
                        n_dofs.push(j);
                    }
                }
                BoundaryKind::Tangential => {
                    let q = EdgeQuadrature::new(&along.a, &rule, lo, hi);
                    q.moments(&along.a, |i, v| b_ut[v0_dof(i)] += c.value * v);
                    t_ranges.push((lo, hi));
                }
            }
        }
        if n_dofs.iter().any(|j| p_dofs.contains(j)) {
            return Err(Error::Config(format!(
                "a flux DOF on the {edge:?} edge straddles the normal-velocity/pressure split; move the split to a patch or cell boundary"
            )));
        }
        for (lo, hi) in complement(t_ranges, a, b) {
            let q = EdgeQuadrature::new(&along.a, &rule, lo, hi);
            q.gram(&along.a, &along.a, |i, j, v| bt.push(v0_dof(i), tang_dof(j), tang_sign * v));
        }
    }
    let flux_values = flux
        .into_iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .collect();
    Ok(BoundaryOperators {
        bn: bn.finalize(),
        bt: bt.finalize(),
        b_pb,
        b_ut,
        keep,
        flux_values,
    })
}
