use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{BoundaryCondition, BoundaryKind, BoundarySpec, Edge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    TaylorGreen,
    Poiseuille,
    LidDrivenCavity,
    Blasius,
    DoubleShearLayer,
}

impl CaseName {
    pub const ALL: [CaseName; 5] = [
        CaseName::TaylorGreen,
        CaseName::Poiseuille,
        CaseName::LidDrivenCavity,
        CaseName::Blasius,
        CaseName::DoubleShearLayer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::TaylorGreen => "taylor_green",
            CaseName::Poiseuille => "poiseuille",
            CaseName::LidDrivenCavity => "lid_driven_cavity",
            CaseName::Blasius => "blasius",
            CaseName::DoubleShearLayer => "double_shear_layer",
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown case `{s}`")))
    }
}

/// Shear-layer thickness and perturbation amplitude of the double shear layer.
pub const SHEAR_DELTA: f64 = 1.0 / 15.0;
pub const SHEAR_EPS: f64 = 0.05;

/// Initial and boundary data of one test case, together with its
/// recommended setup.
#[derive(Clone, Debug, PartialEq)]
pub struct CaseDefinition {
    pub name: CaseName,
    pub nu: f64,
    pub domain: [(f64, f64); 2],
    pub periodic: [bool; 2],
    /// Penalization recommended for broken discretizations.
    pub alpha: f64,
    pub boundary: BoundarySpec,
}

/// Looks up a case with its default viscosity.
pub fn case_library(name: &str) -> Result<CaseDefinition> {
    Ok(CaseDefinition::new(name.parse()?))
}

impl CaseDefinition {
    pub fn new(name: CaseName) -> Self {
        use BoundaryKind::*;
        let c = BoundaryCondition::new;
        let (nu, domain, periodic, alpha, boundary) = match name {
            CaseName::TaylorGreen => (0.0, [(0.0, PI), (0.0, PI)], [true, true], 1000.0, BoundarySpec::periodic()),
            CaseName::Poiseuille => {
                let dp = 0.5 * PI * PI;
                let spec = BoundarySpec::new(vec![
                    c(Edge::Left, Normal, 0.0),
                    c(Edge::Right, Normal, 0.0),
                    c(Edge::Left, Tangential, 0.0),
                    c(Edge::Right, Tangential, 0.0),
                    c(Edge::Bottom, Pressure, -dp),
                    c(Edge::Top, Pressure, dp),
                    c(Edge::Bottom, Tangential, 0.0),
                    c(Edge::Top, Tangential, 0.0),
                ]);
                (1.0, [(0.0, PI), (0.0, PI)], [false, false], 100.0, spec)
            }
            CaseName::LidDrivenCavity => {
                let mut conds: Vec<_> = Edge::ALL.iter().map(|&e| c(e, Normal, 0.0)).collect();
                conds.extend(Edge::ALL.iter().map(|&e| c(e, Tangential, if e == Edge::Top { 1.0 } else { 0.0 })));
                (1e-2, [(0.0, 1.0), (0.0, 1.0)], [false, false], 100.0, BoundarySpec::new(conds))
            }
            CaseName::Blasius => {
                let spec = BoundarySpec::new(vec![
                    // Inflow u = (1, 0): u · n = -1 and u × n = 0 on the left.
                    c(Edge::Left, Normal, -1.0),
                    c(Edge::Left, Tangential, 0.0),
                    c(Edge::Bottom, Normal, 0.0),
                    c(Edge::Bottom, Tangential, 0.0).on(0.0, 1.0),
                    c(Edge::Top, Pressure, 0.0),
                    c(Edge::Right, Pressure, 0.0),
                ]);
                (1e-3, [(-1.0, 1.0), (0.0, 0.5)], [false, false], 100.0, spec)
            }
            CaseName::DoubleShearLayer => (2e-4, [(-1.0, 1.0), (-1.0, 1.0)], [true, true], 0.0, BoundarySpec::periodic()),
        };
        Self {
            name,
            nu,
            domain,
            periodic,
            alpha,
            boundary,
        }
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// Initial velocity.
    pub fn initial(&self, x: f64, y: f64) -> [f64; 2] {
        match self.name {
            CaseName::TaylorGreen => taylor_green(0.0, x, y),
            CaseName::Poiseuille | CaseName::LidDrivenCavity => [0.0, 0.0],
            CaseName::Blasius => [1.0, 0.0],
            CaseName::DoubleShearLayer => {
                let d = SHEAR_DELTA;
                [
                    ((y + 0.5) / d).tanh() - ((y - 0.5) / d).tanh() - 1.0,
                    SHEAR_EPS * (2.0 * PI * x).sin(),
                ]
            }
        }
    }

    pub fn has_exact(&self) -> bool {
        matches!(self.name, CaseName::TaylorGreen | CaseName::Poiseuille)
    }

    /// Exact velocity at time `t`, when the case has one. Poiseuille's is
    /// the steady state.
    pub fn exact(&self, t: f64, x: f64, y: f64) -> Option<[f64; 2]> {
        match self.name {
            CaseName::TaylorGreen => Some(taylor_green(t, x, y)),
            CaseName::Poiseuille => Some(poiseuille(self.nu, x)),
            _ => None,
        }
    }
}

/// Moving Taylor–Green vortex on the period-π torus.
pub fn taylor_green(t: f64, x: f64, y: f64) -> [f64; 2] {
    let (a, b) = (2.0 * (x - t), 2.0 * (y - t));
    [1.0 - 2.0 * a.cos() * b.sin(), 1.0 + 2.0 * b.cos() * a.sin()]
}

/// Steady channel flow for the pressure drop `π²` over `[0, π]`.
pub fn poiseuille(nu: f64, x: f64) -> [f64; 2] {
    [0.0, PI / nu * x * (x - PI) / 2.0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in CaseName::ALL {
            assert_eq!(c.as_str().parse::<CaseName>().unwrap(), c);
        }
        assert!(matches!(case_library("karman"), Err(Error::Config(_))));
    }

    #[test]
    fn point_values() {
        let tg = case_library("taylor_green").unwrap();
        assert_eq!(tg.initial(0.0, 0.0), [1.0, 1.0]);
        let p = case_library("poiseuille").unwrap();
        let u = p.exact(0.0, PI / 2.0, 0.3).unwrap();
        assert_eq!(u[0], 0.0);
        assert!((u[1] + PI.powi(3) / 8.0).abs() < 1e-14);
        let dsl = case_library("double_shear_layer").unwrap();
        let u = dsl.initial(0.3, 0.0);
        let d = SHEAR_DELTA;
        assert!((u[0] - ((0.5 / d).tanh() - (-0.5 / d).tanh() - 1.0)).abs() < 1e-15);
        assert!((u[1] - 0.05 * (2.0 * PI * 0.3).sin()).abs() < 1e-15);
    }

    #[test]
    fn defaults() {
        assert_eq!(case_library("lid_driven_cavity").unwrap().nu, 1e-2);
        let b = case_library("blasius").unwrap();
        assert_eq!((b.nu, b.alpha), (1e-3, 100.0));
        assert_eq!(case_library("taylor_green").unwrap().alpha, 1000.0);
        assert_eq!(case_library("double_shear_layer").unwrap().nu, 2e-4);
    }
}
