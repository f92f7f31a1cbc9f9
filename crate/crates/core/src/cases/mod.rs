//! Test-case library, simulation configuration and the run driver.

mod config;
mod driver;
mod library;

pub use config::{GridConfig, OutputConfig, PhysicsConfig, RunConfig, SimulationConfig};
pub use driver::{
    convergence_study, run, write_convergence_csv, ConvergenceRow, RunOutcome, Simulation, DIAGNOSTICS_COLUMNS,
};
pub use library::{case_library, poiseuille, taylor_green, CaseDefinition, CaseName, SHEAR_DELTA, SHEAR_EPS};
