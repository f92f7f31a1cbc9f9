use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::library::{CaseDefinition, CaseName};
use crate::error::{Error, Result};
use crate::multipatch::MultipatchConfig;
use crate::operators::{BoundaryCondition, BoundarySpec};
use crate::stepper::StepperConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub degree: usize,
    pub n_patches: [usize; 2],
    pub cells_per_patch: [usize; 2],
    /// Case domain when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<[(f64, f64); 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<[bool; 2]>,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            n_patches: [1, 1],
            cells_per_patch: [8, 8],
            domain: None,
            periodic: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Case default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    /// Case default on broken grids, zero on conforming ones, when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_final: f64,
    /// Pick each step from the CFL estimate instead of `stepper.dt`.
    pub cfl_auto: bool,
    /// Stop once `‖u^{n+1} − u^n‖_M1 / Δt` drops below this.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_tol: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_final: 0.01,
            cfl_auto: false,
            steady_tol: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Steps between snapshots; 0 writes diagnostics only.
    pub snapshot_every: usize,
    /// Points per direction of the snapshot sampling grid.
    pub sample: [usize; 2],
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_every: 0,
            sample: [33, 33],
        }
    }
}

/// Everything a run needs, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub case: CaseName,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default)]
    pub stepper: StepperConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Replaces the case boundary data when non-empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<BoundaryCondition>,
}

impl SimulationConfig {
    pub fn new(case: CaseName) -> Self {
        Self {
            case,
            grid: GridConfig::default(),
            physics: PhysicsConfig::default(),
            stepper: StepperConfig::default(),
            run: RunConfig::default(),
            output: OutputConfig::default(),
            boundary: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Case data with the configured viscosity, domain and boundary.
    pub fn case_definition(&self) -> CaseDefinition {
        let mut case = CaseDefinition::new(self.case);
        if let Some(nu) = self.physics.nu {
            case.nu = nu;
        }
        if let Some(d) = self.grid.domain {
            case.domain = d;
        }
        if let Some(p) = self.grid.periodic {
            case.periodic = p;
        }
        if !self.boundary.is_empty() {
            case.boundary = BoundarySpec::new(self.boundary.clone());
        }
        case
    }

    pub fn multipatch(&self) -> MultipatchConfig {
        let case = self.case_definition();
        MultipatchConfig::new(
            self.grid.degree,
            self.grid.n_patches,
            self.grid.cells_per_patch,
            case.domain,
            case.periodic,
        )
    }

    pub fn is_broken(&self) -> bool {
        self.grid.n_patches.iter().any(|&n| n > 1)
    }

    /// Stepper parameters with the resolved viscosity and penalization.
    pub fn stepper_config(&self) -> StepperConfig {
        let case = self.case_definition();
        let alpha = self
            .physics
            .alpha
            .unwrap_or(if self.is_broken() { case.alpha } else { 0.0 });
        StepperConfig {
            nu: case.nu,
            alpha,
            ..self.stepper.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.stepper_config().validate()?;
        let case = self.case_definition();
        if self.case == CaseName::TaylorGreen && case.periodic != [true, true] {
            return Err(Error::Config("taylor_green requires a fully periodic grid".into()));
        }
        if case.periodic == [true, true] && !case.boundary.conditions.is_empty() {
            return Err(Error::Config("boundary conditions given for a fully periodic grid".into()));
        }
        if self.grid.n_patches.contains(&0) || self.grid.cells_per_patch.contains(&0) {
            return Err(Error::Config("patch and cell counts must be positive".into()));
        }
        if !(self.run.t_final.is_finite() && self.run.t_final > 0.0) {
            return Err(Error::Config(format!("t_final must be positive, got {}", self.run.t_final)));
        }
        if let Some(tol) = self.run.steady_tol {
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::Config(format!("steady_tol must be positive, got {tol}")));
            }
        }
        if self.output.sample.iter().any(|&n| n < 2) {
            return Err(Error::Config("snapshot sampling needs at least 2 points per direction".into()));
        }
        Ok(())
    }
}
