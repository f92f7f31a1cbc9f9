use serde::{Deserialize, Serialize};

use super::stencil::{projection_stencil_1d, ProjectionStencil1D};
use crate::error::{check_len, Error, Result};
use crate::linalg::SparseMatrix;
use crate::spline::{build_derham_patch, AffineMap, BrokenSpace1D, DeRhamPatch, DeRhamSequence, Slot};

/// Discretization parameters of a (possibly broken) patch grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultipatchConfig {
    pub degree: usize,
    pub n_patches: [usize; 2],
    pub cells_per_patch: [usize; 2],
    pub domain: [(f64, f64); 2],
    pub periodic: [bool; 2],
    /// Stencil radius of the conforming projection; default `moment_order + 1`.
    pub stencil_radius: Option<usize>,
    /// Preserved moment degree; default `degree`.
    pub moment_order: Option<usize>,
}

impl MultipatchConfig {
    pub fn new(degree: usize, n_patches: [usize; 2], cells_per_patch: [usize; 2], domain: [(f64, f64); 2], periodic: [bool; 2]) -> Self {
        Self {
            degree,
            n_patches,
            cells_per_patch,
            domain,
            periodic,
            stencil_radius: None,
            moment_order: None,
        }
    }

    pub fn moment_order(&self) -> usize {
        self.moment_order.unwrap_or(self.degree)
    }

    pub fn stencil_radius(&self) -> usize {
        self.stencil_radius.unwrap_or(self.moment_order() + 1)
    }
}

/// Global broken space over a patch grid with its conforming projections and
/// jump penalization.
///
/// The patch grid is Cartesian, so the global broken sequence is itself a
/// tensor product of 1D broken factors and the conforming projections are
/// tensor products of 1D stencil projections:
/// `Pc0 = Px ⊗ Py`, `Pc1 = diag(Px ⊗ I, I ⊗ Py)`, `Pc2 = I`.
#[derive(Clone, Debug)]
pub struct MultipatchSpace {
    pub seq: DeRhamSequence,
    pub n_patches: [usize; 2],
    pub stencils: [Option<ProjectionStencil1D>; 2],
    pub px: SparseMatrix,
    pub py: SparseMatrix,
    pub pc0: SparseMatrix,
    pub pc1: SparseMatrix,
    pub pc2: SparseMatrix,
    /// `(I - Pc1)ᵀ M1 (I - Pc1)`.
    pub penalization: SparseMatrix,
    pub stencil_radius: usize,
    pub moment_order: usize,
}

pub fn build_multipatch(cfg: &MultipatchConfig) -> Result<MultipatchSpace> {
    let seq = DeRhamSequence::new(cfg.degree, cfg.n_patches, cfg.cells_per_patch, cfg.domain, cfg.periodic)?;
    MultipatchSpace::from_sequence(seq, cfg.stencil_radius(), cfg.moment_order())
}

fn check_matching(space: &BrokenSpace1D, dir: &str) -> Result<()> {
    let first = space.segment(0);
    let len = first.interval().1 - first.interval().0;
    for (s, seg) in space.segments().iter().enumerate() {
        let l = seg.interval().1 - seg.interval().0;
        if seg.n_cells() != first.n_cells() || seg.degree() != first.degree() || (l - len).abs() > 1e-12 * len {
            return Err(Error::Incompatible(format!(
                "patch {s} in {dir} direction does not match its neighbours"
            )));
        }
    }
    Ok(())
}

impl MultipatchSpace {
    pub fn from_sequence(seq: DeRhamSequence, stencil_radius: usize, moment_order: usize) -> Result<Self> {
        check_matching(&seq.x.a, "x")?;
        check_matching(&seq.y.a, "y")?;
        let build = |a: &BrokenSpace1D| -> Result<(Option<ProjectionStencil1D>, SparseMatrix)> {
            if a.interfaces().is_empty() {
                return Ok((None, SparseMatrix::identity(a.dim())));
            }
            let s = projection_stencil_1d(a.degree(), a.cells_per_segment(), stencil_radius, moment_order)?;
            let p = s.projection_matrix(a);
            Ok((Some(s), p))
        };
        let (sx, px) = build(&seq.x.a)?;
        let (sy, py) = build(&seq.y.a)?;
        let pc0 = px.kron(&py);
        let pc1x = px.kron(&SparseMatrix::identity(seq.y.b.dim()));
        let pc1y = SparseMatrix::identity(seq.x.b.dim()).kron(&py);
        let pc1 = SparseMatrix::block_diag(&[&pc1x, &pc1y]);
        let pc2 = SparseMatrix::identity(seq.dim(Slot::V2));
        let n1 = seq.dim(Slot::V1);
        let jump = SparseMatrix::identity(n1).add_scaled(1.0, &pc1, -1.0)?;
        let penalization = jump.transpose().matmul(&seq.m1)?.matmul(&jump)?;
        let n_patches = [seq.x.a.n_segments(), seq.y.a.n_segments()];
        Ok(Self {
            seq,
            n_patches,
            stencils: [sx, sy],
            px,
            py,
            pc0,
            pc1,
            pc2,
            penalization,
            stencil_radius,
            moment_order,
        })
    }

    pub fn projection(&self, slot: Slot) -> &SparseMatrix {
        match slot {
            Slot::V0 => &self.pc0,
            Slot::V1 => &self.pc1,
            Slot::V2 => &self.pc2,
        }
    }

    pub fn is_broken(&self) -> bool {
        self.n_patches[0] * self.n_patches[1] > 1
    }

    /// Affine map of patch `(ix, iy)` from the reference square.
    pub fn patch_map(&self, ix: usize, iy: usize) -> Result<AffineMap> {
        if ix >= self.n_patches[0] || iy >= self.n_patches[1] {
            return Err(Error::InvalidArgument(format!("no patch ({ix}, {iy})")));
        }
        let (x0, x1) = self.seq.x.a.segment(ix).interval();
        let (y0, y1) = self.seq.y.a.segment(iy).interval();
        AffineMap::new(x1 - x0, y1 - y0, x0, y0)
    }

    /// Stand-alone sequence of one patch.
    pub fn patch(&self, ix: usize, iy: usize) -> Result<DeRhamPatch> {
        let map = self.patch_map(ix, iy)?;
        let periodic = [
            self.seq.periodic()[0] && self.n_patches[0] == 1,
            self.seq.periodic()[1] && self.n_patches[1] == 1,
        ];
        let cells = [self.seq.x.a.cells_per_segment(), self.seq.y.a.cells_per_segment()];
        build_derham_patch(self.seq.degree(), cells, periodic, map)
    }

    /// `Pen u`, whose entries are `∫ (I - Pc1)u · (I - Pc1)Λ¹_j`.
    pub fn apply_penalization(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.seq.dim(Slot::V1), u.len(), "penalized velocity")?;
        Ok(self.penalization.matvec(u))
    }
}
