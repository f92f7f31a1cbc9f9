use super::space1d::SplineSpace1D;
use crate::error::{Error, Result};
use crate::linalg::{QuadratureRule, SparseMatrix};

/// One-dimensional factor of a patch grid: `n_segments` equal segments, each
/// carrying its own clamped spline space, concatenated in order.
///
/// With a single segment on a periodic interval the segment space is periodic
/// and there are no interfaces. With several segments on a periodic interval
/// the last segment is glued to the first through a wrap-around interface.
#[derive(Clone, Debug, PartialEq)]
pub struct BrokenSpace1D {
    segments: Vec<SplineSpace1D>,
    offsets: Vec<usize>,
    periodic: bool,
    interval: (f64, f64),
}

/// Interface between the last DOF of segment `left` and the first DOF of
/// segment `right`, located at `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interface1D {
    pub left: usize,
    pub right: usize,
    pub x: f64,
}

impl BrokenSpace1D {
    pub fn new(
        degree: usize,
        n_segments: usize,
        cells_per_segment: usize,
        interval: (f64, f64),
        periodic: bool,
    ) -> Result<Self> {
        if n_segments == 0 {
            return Err(Error::InvalidArgument("need at least one patch per direction".into()));
        }
        let (a, b) = interval;
        let len = (b - a) / n_segments as f64;
        let single_periodic = periodic && n_segments == 1;
        let mut segments = Vec::with_capacity(n_segments);
        for s in 0..n_segments {
            let lo = a + s as f64 * len;
            let hi = if s + 1 == n_segments { b } else { a + (s + 1) as f64 * len };
            segments.push(SplineSpace1D::new(degree, cells_per_segment, (lo, hi), single_periodic)?);
        }
        Ok(Self::from_segments(segments, periodic, interval))
    }

    fn from_segments(segments: Vec<SplineSpace1D>, periodic: bool, interval: (f64, f64)) -> Self {
        let mut offsets = Vec::with_capacity(segments.len() + 1);
        let mut total = 0;
        for s in &segments {
            offsets.push(total);
            total += s.dim();
        }
        offsets.push(total);
        Self {
            segments,
            offsets,
            periodic,
            interval,
        }
    }

    pub fn degree(&self) -> usize {
        self.segments[0].degree()
    }

    pub fn dim(&self) -> usize {
        self.offsets[self.segments.len()]
    }

    pub fn n_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn cells_per_segment(&self) -> usize {
        self.segments[0].n_cells()
    }

    pub fn n_cells(&self) -> usize {
        self.n_segments() * self.cells_per_segment()
    }

    pub fn segment(&self, s: usize) -> &SplineSpace1D {
        &self.segments[s]
    }

    pub fn segments(&self) -> &[SplineSpace1D] {
        &self.segments
    }

    pub fn offset(&self, s: usize) -> usize {
        self.offsets[s]
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn cell_width(&self) -> f64 {
        self.segments[0].cell_width()
    }

    /// True when the segments are glued (through interfaces) rather than a
    /// single periodic spline.
    pub fn is_broken(&self) -> bool {
        self.segments.len() > 1
    }

    pub fn interfaces(&self) -> Vec<Interface1D> {
        let n = self.segments.len();
        let mut out: Vec<Interface1D> = (1..n)
            .map(|s| Interface1D {
                left: s - 1,
                right: s,
                x: self.segments[s].interval().0,
            })
            .collect();
        if self.periodic && n > 1 {
            out.push(Interface1D {
                left: n - 1,
                right: 0,
                x: self.interval.0,
            });
        }
        out
    }

    /// Segment containing `x` (right-continuous at interfaces).
    pub fn find_segment(&self, x: f64) -> usize {
        let (a, b) = self.interval;
        let mut x = x;
        if self.periodic {
            x = a + (x - a).rem_euclid(b - a);
        }
        let n = self.segments.len();
        let s = ((x - a) / ((b - a) / n as f64)).floor();
        if s < 0.0 {
            0
        } else {
            (s as usize).min(n - 1)
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let (a, b) = self.interval;
        let tol = 1e-12 * (b - a);
        self.periodic || (x >= a - tol && x <= b + tol)
    }

    /// Nonzero basis functions at `x` as `(global index, value)` pairs.
    pub fn basis_at(&self, x: f64) -> Vec<(usize, f64)> {
        self.basis_at_in_segment(self.find_segment(x), x)
    }

    /// Like [`basis_at`](Self::basis_at) but evaluating the restriction to a
    /// given segment, for two-sided evaluation at interfaces.
    pub fn basis_at_in_segment(&self, s: usize, x: f64) -> Vec<(usize, f64)> {
        let off = self.offsets[s];
        let seg = &self.segments[s];
        let (lo, hi) = seg.interval();
        let x = if self.is_broken() { x.clamp(lo, hi) } else { x };
        seg.basis_at(x)
            .into_iter()
            .map(|(i, v)| (off + i, v))
            .collect()
    }

    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> f64 {
        self.basis_at(x).into_iter().map(|(i, v)| coeffs[i] * v).sum()
    }

    pub fn evaluate_in_segment(&self, coeffs: &[f64], s: usize, x: f64) -> f64 {
        self.basis_at_in_segment(s, x)
            .into_iter()
            .map(|(i, v)| coeffs[i] * v)
            .sum()
    }

    pub fn derivative_space(&self) -> Result<BrokenSpace1D> {
        let segs = self
            .segments
            .iter()
            .map(SplineSpace1D::derivative_space)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_segments(segs, self.periodic, self.interval))
    }

    pub fn derivative_incidence(&self) -> Result<SparseMatrix> {
        let blocks = self
            .segments
            .iter()
            .map(SplineSpace1D::derivative_incidence)
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseMatrix::block_diag(&blocks.iter().collect::<Vec<_>>()))
    }

    pub fn gram(&self, other: &BrokenSpace1D, rule: &QuadratureRule) -> Result<SparseMatrix> {
        if self.segments.len() != other.segments.len() {
            return Err(Error::Incompatible("gram of differently segmented spaces".into()));
        }
        let blocks = self
            .segments
            .iter()
            .zip(&other.segments)
            .map(|(a, b)| a.gram(b, rule))
            .collect::<Result<Vec<_>>>()?;
        Ok(SparseMatrix::block_diag(&blocks.iter().collect::<Vec<_>>()))
    }

    pub fn quadrature(&self, rule: &QuadratureRule) -> (Vec<f64>, Vec<f64>) {
        let mut pts = Vec::new();
        let mut wts = Vec::new();
        for s in &self.segments {
            let (p, w) = s.quadrature(rule);
            pts.extend(p);
            wts.extend(w);
        }
        (pts, wts)
    }

    /// Basis values at the nodes of [`quadrature`](Self::quadrature).
    pub fn collocation(&self, rule: &QuadratureRule) -> SparseMatrix {
        let blocks: Vec<SparseMatrix> = self.segments.iter().map(|s| s.collocation(rule)).collect();
        SparseMatrix::block_diag(&blocks.iter().collect::<Vec<_>>())
    }

    /// Global index of the first DOF of segment `s` (its left boundary value).
    pub fn first_dof(&self, s: usize) -> usize {
        self.offsets[s]
    }

    /// Global index of the last DOF of segment `s` (its right boundary value).
    pub fn last_dof(&self, s: usize) -> usize {
        self.offsets[s + 1] - 1
    }

    /// Global indices of the basis functions of segment `s` whose support
    /// meets the sub-interval `[lo, hi]` in a set of positive measure.
    pub fn dofs_meeting(&self, lo: f64, hi: f64) -> Vec<usize> {
        let mut out = Vec::new();
        for (s, seg) in self.segments.iter().enumerate() {
            let bp = seg.breakpoints();
            for i in 0..seg.dim() {
                let meets = seg.support_cells(i).into_iter().any(|c| {
                    let (a, b) = (bp[c], bp[c + 1]);
                    a.max(lo) < b.min(hi) - 1e-12 * (b - a)
                });
                if meets {
                    out.push(self.offsets[s] + i);
                }
            }
        }
        out
    }

}
