use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the Crank–Nicolson Picard stepper.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    pub dt: f64,
    /// Picard stops once `‖Δu‖_M1 ≤ picard_tol · ‖u^n‖_M1` (absolute when
    /// `u^n = 0`).
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Relative residual target of the pressure CG; must stay below
    /// `picard_tol`.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Pressure regularization relative to the scale of the Poisson operator
    /// diagonal. Only used when no pressure boundary condition pins the
    /// constant.
    pub pressure_eps: f64,
    /// Set from the physics section of a simulation config, never read
    /// from the stepper section.
    #[serde(skip)]
    pub nu: f64,
    #[serde(skip)]
    pub alpha: f64,
    pub cfl_safety: f64,
    pub cfl_constant: f64,
    /// Returned by the CFL estimate when velocity and viscosity both vanish.
    pub dt_max: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            picard_tol: 1e-8,
            picard_max_iter: 50,
            cg_tol: 1e-11,
            cg_max_iter: 5000,
            pressure_eps: 1e-12,
            nu: 0.0,
            alpha: 0.0,
            cfl_safety: 1.0,
            cfl_constant: 1.0,
            dt_max: 1.0,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("picard_tol", self.picard_tol),
            ("cg_tol", self.cg_tol),
            ("cfl_constant", self.cfl_constant),
            ("dt_max", self.dt_max),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [("nu", self.nu), ("alpha", self.alpha), ("pressure_eps", self.pressure_eps)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety)));
        }
        if self.picard_max_iter == 0 || self.cg_max_iter == 0 {
            return Err(Error::Config("iteration limits must be positive".into()));
        }
        if self.cg_tol >= self.picard_tol {
            return Err(Error::Config(format!(
                "cg_tol ({}) must be smaller than picard_tol ({})",
                self.cg_tol, self.picard_tol
            )));
        }
        Ok(())
    }
}

/// What one accepted step cost.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub picard_iterations: usize,
    /// `‖u^{n+1,r+1} − u^{n+1,r}‖_M1` of the last iteration.
    pub final_update_norm: f64,
    pub pressure_solve: crate::linalg::LinearSolveReport,
    pub dt_used: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        StepperConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            StepperConfig { dt: 0.0, ..Default::default() },
            StepperConfig { nu: -1.0, ..Default::default() },
            StepperConfig { cfl_safety: 1.5, ..Default::default() },
            StepperConfig { cg_tol: 1e-6, ..Default::default() },
            StepperConfig { picard_max_iter: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }
}
