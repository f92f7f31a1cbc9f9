//! Crank–Nicolson time stepping by Picard iteration with a pressure Poisson
//! solve, plus the CFL step-size estimate.

mod config;

pub use config::{StepReport, StepperConfig};

use crate::error::{check_len, Error, Result};
use crate::linalg::{cg_solve_from, cg_solve_scaled, dot, norm2, FnOperator, LinearOperator, LinearSolveReport};
use crate::operators::OperatorContext;
use crate::spline::Slot;

/// Result of one accepted step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
    pub report: StepReport,
}

/// Time stepper bound to one operator context.
///
/// The pressure of the last accepted step is kept and used to warm-start the
/// next pressure solve.
#[derive(Clone, Debug)]
pub struct Stepper<'a> {
    ctx: &'a OperatorContext,
    cfg: StepperConfig,
    forcing: Vec<f64>,
    eps: f64,
    pressure: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(ctx: &'a OperatorContext, cfg: StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let n1 = ctx.dim(Slot::V1);
        let n2 = ctx.dim(Slot::V2);
        let mut stepper = Self {
            ctx,
            cfg,
            forcing: vec![0.0; n1],
            eps: 0.0,
            pressure: vec![0.0; n2],
        };
        if !ctx.has_pressure_bc() && stepper.cfg.pressure_eps > 0.0 {
            let mut e0 = vec![0.0; n2];
            e0[0] = 1.0;
            let scale = stepper.apply_pressure_operator(&e0)[0];
            stepper.eps = stepper.cfg.pressure_eps * if scale > 0.0 { scale } else { 1.0 };
        }
        Ok(stepper)
    }

    /// Adds a constant-in-time body force, given as its functional
    /// `∫ f · Pc1 Λ¹_j` (see [`OperatorContext::forcing_functional`]).
    pub fn with_forcing(mut self, forcing: Vec<f64>) -> Result<Self> {
        check_len(self.ctx.dim(Slot::V1), forcing.len(), "forcing functional")?;
        self.forcing = forcing;
        Ok(self)
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn context(&self) -> &OperatorContext {
        self.ctx
    }

    pub fn set_dt(&mut self, dt: f64) -> Result<()> {
        let cfg = StepperConfig { dt, ..self.cfg.clone() };
        cfg.validate()?;
        self.cfg = cfg;
        Ok(())
    }

    /// Pressure of the last accepted step.
    pub fn pressure(&self) -> &[f64] {
        &self.pressure
    }

    /// Absolute regularization actually applied to the pressure system.
    pub fn pressure_regularization(&self) -> f64 {
        self.eps
    }

    pub fn m1_norm(&self, u: &[f64]) -> f64 {
        dot(u, &self.ctx.seq().m1.matvec(u)).max(0.0).sqrt()
    }

    /// Everything in the momentum equation except time derivative and
    /// pressure, tested against every `Λ¹_j`:
    /// `c_h(ū, ū, Λ¹_j) + ν d_h(ū, Λ¹_j) + α (Pen ū)_j − f_j`.
    pub fn residual(&self, u_bar: &[f64]) -> Result<Vec<f64>> {
        let ctx = self.ctx;
        let mut r = ctx.advection_residual(u_bar, u_bar)?;
        if self.cfg.nu > 0.0 {
            let v = ctx.viscous_residual(u_bar)?;
            r.iter_mut().zip(&v).for_each(|(a, b)| *a += self.cfg.nu * b);
        }
        if self.cfg.alpha > 0.0 {
            let v = ctx.space.apply_penalization(u_bar)?;
            r.iter_mut().zip(&v).for_each(|(a, b)| *a += self.cfg.alpha * b);
        }
        r.iter_mut().zip(&self.forcing).for_each(|(a, f)| *a -= f);
        Ok(r)
    }

    /// `ν d_h(ū, ū) + α ūᵀ Pen ū`, the rate at which a converged step
    /// removes energy.
    pub fn dissipation(&self, u_bar: &[f64]) -> Result<f64> {
        let mut d = 0.0;
        if self.cfg.nu > 0.0 {
            d += self.cfg.nu * self.ctx.viscous_form(u_bar, u_bar)?;
        }
        if self.cfg.alpha > 0.0 {
            d += self.cfg.alpha * dot(u_bar, &self.ctx.space.apply_penalization(u_bar)?);
        }
        Ok(d)
    }

    /// `A q = M2 K M1⁻¹ Kᵀ M2 q + ε M2 q` with `K = Div Pc1 Pn`.
    pub fn apply_pressure_operator(&self, q: &[f64]) -> Vec<f64> {
        let seq = self.ctx.seq();
        let m2q = seq.m2.matvec(q);
        let mut w = self.ctx.k.matvec_t(&m2q);
        seq.solve_mass_in_place(Slot::V1, &mut w);
        let mut out = seq.m2.matvec(&self.ctx.k.matvec(&w));
        if self.eps > 0.0 {
            out.iter_mut().zip(&m2q).for_each(|(a, b)| *a += self.eps * b);
        }
        out
    }

    /// Without a pressure boundary condition the constants span the kernel
    /// of the unregularized operator; their (roundoff-level) component is
    /// removed from a right-hand side so the tiny regularization cannot
    /// amplify it.
    fn project_compatible(&self, rhs: &mut [f64]) {
        if self.ctx.has_pressure_bc() {
            return;
        }
        let mean = rhs.iter().sum::<f64>() / rhs.len() as f64;
        rhs.iter_mut().for_each(|v| *v -= mean);
    }

    fn pressure_operator(&self) -> impl LinearOperator + '_ {
        FnOperator::new(self.ctx.dim(Slot::V2), move |x: &[f64], y: &mut [f64]| {
            y.copy_from_slice(&self.apply_pressure_operator(x));
        })
    }

    /// Solves for the pressure that keeps `Div Pc1 u` at zero after the
    /// update driven by `residual`, warm-started from `p`.
    ///
    /// Right-hand side: `M2 K M1⁻¹ (F + b_pb) − M2 Div Pc1 u^n / Δt`; the
    /// last term vanishes for a divergence-free `u^n` and otherwise removes
    /// accumulated drift.
    fn solve_pressure_for(&self, u_n: &[f64], residual: &[f64], p: &mut [f64]) -> Result<LinearSolveReport> {
        let ctx = self.ctx;
        let seq = ctx.seq();
        let mut w: Vec<f64> = residual
            .iter()
            .zip(ctx.pressure_boundary_vector())
            .map(|(r, b)| r + b)
            .collect();
        seq.solve_mass_in_place(Slot::V1, &mut w);
        let mut rhs = ctx.k.matvec(&w);
        let div = ctx.div_h.matvec(u_n);
        rhs.iter_mut().zip(&div).for_each(|(a, d)| *a -= d / self.cfg.dt);
        let mut rhs = seq.m2.matvec(&rhs);
        self.project_compatible(&mut rhs);
        let report = cg_solve_from(&self.pressure_operator(), &rhs, p, self.cfg.cg_tol, self.cfg.cg_max_iter)?;
        Ok(report)
    }

    /// Pressure for the midpoint field `u_bar`, warm-started from `p`.
    pub fn pressure_solve(&self, u_n: &[f64], u_bar: &[f64], p: &mut [f64]) -> Result<LinearSolveReport> {
        let n1 = self.ctx.dim(Slot::V1);
        check_len(n1, u_n.len(), "pressure solve velocity")?;
        check_len(n1, u_bar.len(), "pressure solve midpoint")?;
        check_len(self.ctx.dim(Slot::V2), p.len(), "pressure solve initial guess")?;
        let r = self.residual(u_bar)?;
        self.solve_pressure_for(u_n, &r, p)
    }

    fn update_for(&self, u_n: &[f64], residual: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let ctx = self.ctx;
        let seq = ctx.seq();
        let grad = ctx.k.matvec_t(&seq.m2.matvec(p));
        let mut w: Vec<f64> = residual
            .iter()
            .zip(ctx.pressure_boundary_vector())
            .zip(&grad)
            .map(|((r, b), g)| r + b - g)
            .collect();
        seq.solve_mass_in_place(Slot::V1, &mut w);
        let w = ctx.apply_pn(&w);
        let out: Vec<f64> = u_n.iter().zip(&w).map(|(u, d)| u - self.cfg.dt * d).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalBreakdown("velocity update produced non-finite values".into()));
        }
        Ok(out)
    }

    /// `u^n − Δt Pn M1⁻¹ (F(ū) + M1 G̃_pb p)`.
    pub fn velocity_update(&self, u_n: &[f64], u_bar: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let n1 = self.ctx.dim(Slot::V1);
        check_len(n1, u_n.len(), "velocity update")?;
        check_len(n1, u_bar.len(), "velocity update midpoint")?;
        check_len(self.ctx.dim(Slot::V2), p.len(), "velocity update pressure")?;
        let r = self.residual(u_bar)?;
        self.update_for(u_n, &r, p)
    }

    fn failure(iterations: usize, reason: String, solve: Option<LinearSolveReport>) -> Error {
        Error::StepFailure {
            iterations,
            reason,
            pressure_solve: solve,
        }
    }

    /// One Crank–Nicolson step by Picard iteration. The stored pressure is
    /// only replaced when the step succeeds.
    pub fn cn_step(&mut self, u_n: &[f64]) -> Result<StepOutcome> {
        check_len(self.ctx.dim(Slot::V1), u_n.len(), "step velocity")?;
        let scale = self.m1_norm(u_n);
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let mut p = self.pressure.clone();
        let mut u = u_n.to_vec();
        let mut last_solve = LinearSolveReport::default();
        for it in 1..=self.cfg.picard_max_iter {
            let u_bar: Vec<f64> = u.iter().zip(u_n).map(|(a, b)| 0.5 * (a + b)).collect();
            let r = self.residual(&u_bar)?;
            last_solve = self.solve_pressure_for(u_n, &r, &mut p)?;
            if !last_solve.converged {
                return Err(Self::failure(it, format!("pressure solve did not converge (relative residual {:e} after {} iterations)", last_solve.residual, last_solve.iterations), Some(last_solve)));
            }
            let u_new = match self.update_for(u_n, &r, &p) {
                Ok(v) => v,
                Err(e) => return Err(Self::failure(it, e.to_string(), Some(last_solve))),
            };
            let diff: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
            let change = self.m1_norm(&diff);
            u = u_new;
            if !change.is_finite() || change > 1e6 * scale {
                return Err(Self::failure(it, format!("Picard iteration diverged (update norm {change:e})"), Some(last_solve)));
            }
            if change <= self.cfg.picard_tol * scale {
                self.pressure.copy_from_slice(&p);
                return Ok(StepOutcome {
                    velocity: u,
                    pressure: p,
                    report: StepReport {
                        picard_iterations: it,
                        final_update_norm: change,
                        pressure_solve: last_solve,
                        dt_used: self.cfg.dt,
                    },
                });
            }
        }
        Err(Self::failure(
            self.cfg.picard_max_iter,
            "Picard iteration reached its iteration limit".into(),
            Some(last_solve),
        ))
    }

    /// [`cn_step`](Self::cn_step) with the failure policy: on failure the
    /// step size is halved (and stays halved) and the step retried once; a
    /// second failure is returned.
    pub fn advance(&mut self, u_n: &[f64]) -> Result<StepOutcome> {
        match self.cn_step(u_n) {
            Ok(out) => Ok(out),
            Err(Error::StepFailure { .. }) => {
                self.set_dt(0.5 * self.cfg.dt)?;
                self.cn_step(u_n)
            }
            Err(e) => Err(e),
        }
    }

    /// `safety / (C (‖u‖_∞ / h + ν / h²))`, with `‖u‖_∞` taken over the
    /// quadrature nodes and `h` the smallest cell width.
    pub fn cfl_dt(&self, u: &[f64]) -> Result<f64> {
        check_len(self.ctx.dim(Slot::V1), u.len(), "CFL velocity")?;
        let seq = self.ctx.seq();
        let (ux, uy) = seq.eval_v1_quad(u);
        let umax = ux.iter().zip(&uy).map(|(a, b)| a.hypot(*b)).fold(0.0, f64::max);
        let h = seq.h_min();
        let rate = self.cfg.cfl_constant * (umax / h + self.cfg.nu / (h * h));
        if rate <= 0.0 {
            return Ok(self.cfg.dt_max);
        }
        Ok((self.cfg.cfl_safety / rate).min(self.cfg.dt_max))
    }

    /// Discrete Leray correction: imposes the normal boundary data, then
    /// removes the discrete gradient part so that `Div Pc1 u = 0` to solver
    /// tolerance. The Poisson solve reuses the pressure operator.
    pub fn leray_project(&self, u: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
        let ctx = self.ctx;
        let seq = ctx.seq();
        check_len(ctx.dim(Slot::V1), u.len(), "Leray projection")?;
        let mut u = u.to_vec();
        ctx.impose_normal_data(&mut u);
        let div = ctx.div_h.matvec(&u);
        let mut rhs: Vec<f64> = seq.m2.matvec(&div).iter().map(|v| -v).collect();
        self.project_compatible(&mut rhs);
        // Residuals are measured against the two partial derivatives whose
        // sum is the divergence, so an almost solenoidal input does not push
        // the target below roundoff.
        let n1x = seq.n1x();
        let mut reference = 0.0;
        for block in [0..n1x, n1x..u.len()] {
            let mut part = vec![0.0; u.len()];
            part[block.clone()].copy_from_slice(&u[block]);
            reference += norm2(&seq.m2.matvec(&ctx.div_h.matvec(&part)));
        }
        let mut phi = vec![0.0; ctx.dim(Slot::V2)];
        let report = cg_solve_scaled(
            &self.pressure_operator(),
            &rhs,
            &mut phi,
            self.cfg.cg_tol,
            reference,
            self.cfg.cg_max_iter,
        )?;
        if !report.converged {
            return Err(Error::NumericalBreakdown(format!(
                "Leray correction did not converge (relative residual {:e})",
                report.residual
            )));
        }
        let mut w = ctx.k.matvec_t(&seq.m2.matvec(&phi));
        seq.solve_mass_in_place(Slot::V1, &mut w);
        let w = ctx.apply_pn(&w);
        u.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        Ok((u, report))
    }
}
