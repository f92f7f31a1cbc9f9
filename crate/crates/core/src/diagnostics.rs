//! Invariants, errors and convergence rates of discrete velocity fields.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::operators::OperatorContext;
use crate::spline::Slot;

/// One row of the diagnostics time series.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// `½ ∫ |u|²`.
    pub energy: f64,
    /// `∫ u`.
    pub momentum: [f64; 2],
    /// `‖Div Pc1 u‖_L2`.
    pub div_l2: f64,
    /// `∫ |(I − Pc1) u|²`.
    pub jump_energy: f64,
    /// `d_h(u, u)`.
    pub enstrophy_term: f64,
    pub picard_iterations: usize,
}

impl DiagnosticsRecord {
    pub fn at(mut self, time: f64, picard_iterations: usize) -> Self {
        self.time = time;
        self.picard_iterations = picard_iterations;
        self
    }
}

/// All invariants of `u` by quadrature on the elevated rule. `time` and
/// `picard_iterations` are left at zero; see [`DiagnosticsRecord::at`].
pub fn measure(ctx: &OperatorContext, u: &[f64]) -> Result<DiagnosticsRecord> {
    check_len(ctx.dim(Slot::V1), u.len(), "measured velocity")?;
    let seq = ctx.seq();
    let w = ctx.quad_weights();
    let (ux, uy) = seq.eval_v1_quad(u);
    let mut energy = 0.0;
    let mut momentum = [0.0; 2];
    for q in 0..w.len() {
        energy += 0.5 * w[q] * (ux[q] * ux[q] + uy[q] * uy[q]);
        momentum[0] += w[q] * ux[q];
        momentum[1] += w[q] * uy[q];
    }

    let div = seq.eval_v2_quad(&ctx.div_h.matvec(u));
    let div_l2 = w.iter().zip(&div).map(|(w, d)| w * d * d).sum::<f64>().sqrt();

    let conf = ctx.space.pc1.matvec(u);
    let jump: Vec<f64> = u.iter().zip(&conf).map(|(a, b)| a - b).collect();
    let (jx, jy) = seq.eval_v1_quad(&jump);
    let jump_energy = (0..w.len()).map(|q| w[q] * (jx[q] * jx[q] + jy[q] * jy[q])).sum();

    Ok(DiagnosticsRecord {
        time: 0.0,
        energy,
        momentum,
        div_l2,
        jump_energy,
        enstrophy_term: ctx.viscous_form(u, u)?,
        picard_iterations: 0,
    })
}

/// `ω = C̃ u`, with the tangential boundary data wherever the context has any.
pub fn vorticity(ctx: &OperatorContext, u: &[f64]) -> Result<Vec<f64>> {
    ctx.weak_curl_with_tangential_bc(u)
}

/// `√∫ |u − exact|²` over the quadrature nodes.
pub fn l2_error(ctx: &OperatorContext, u: &[f64], exact: impl Fn(f64, f64) -> [f64; 2]) -> Result<f64> {
    check_len(ctx.dim(Slot::V1), u.len(), "velocity in error norm")?;
    let seq = ctx.seq();
    let (ux, uy) = seq.eval_v1_quad(u);
    let ex = seq.sample_quad(exact);
    let sum: f64 = ctx
        .quad_weights()
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let dx = ux[q] - ex[q][0];
            let dy = uy[q] - ex[q][1];
            w * (dx * dx + dy * dy)
        })
        .sum();
    Ok(sum.sqrt())
}

/// Least-squares slope of `log e` against `log h`.
pub fn convergence_order(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::Data(format!("need at least two samples, got {}", samples.len())));
    }
    for pair in samples.windows(2) {
        if pair[1].0.partial_cmp(&pair[0].0) != Some(std::cmp::Ordering::Less) {
            return Err(Error::Data("mesh sizes must be strictly decreasing".into()));
        }
    }
    if samples.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite())) {
        return Err(Error::Data("mesh sizes and errors must be positive and finite".into()));
    }
    let n = samples.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(h, e) in samples {
        sx += h.ln();
        sy += e.ln();
    }
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(h, e) in samples {
        let dx = h.ln() - mx;
        sxy += dx * (e.ln() - my);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}
