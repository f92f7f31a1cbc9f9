use serde::{Deserialize, Serialize};

use super::derham::DeRhamSequence;
use crate::error::{check_len, Error, Result};

/// Position of a field in the de Rham sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slot {
    /// Scalar potentials (vorticity).
    V0,
    /// Vector fields with normal continuity (velocity).
    V1,
    /// Discontinuous scalars (pressure).
    V2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conformity {
    Conforming,
    Broken,
}

/// Coefficient vector tagged with its space.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub slot: Slot,
    pub conformity: Conformity,
    pub coeffs: Vec<f64>,
}

impl Field {
    pub fn new(seq: &DeRhamSequence, slot: Slot, coeffs: Vec<f64>) -> Result<Self> {
        check_len(seq.dim(slot), coeffs.len(), "field coefficients")?;
        Ok(Self {
            slot,
            conformity: seq.conformity(),
            coeffs,
        })
    }

    pub fn zeros(seq: &DeRhamSequence, slot: Slot) -> Self {
        Self {
            slot,
            conformity: seq.conformity(),
            coeffs: vec![0.0; seq.dim(slot)],
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl DeRhamSequence {
    pub fn conformity(&self) -> Conformity {
        if self.x.a.is_broken() || self.y.a.is_broken() {
            Conformity::Broken
        } else {
            Conformity::Conforming
        }
    }

    /// Calls `f` at every node of the elevated quadrature grid, row-major over
    /// `(q_x, q_y)`.
    pub fn sample_quad<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.x.nq() * self.y.nq());
        for &x in &self.x.qpts {
            for &y in &self.y.qpts {
                out.push(f(x, y));
            }
        }
        out
    }
}

/// L2 projection of `f` onto `slot`. Scalar slots read the first component of
/// `f`'s value.
pub fn l2_project(seq: &DeRhamSequence, slot: Slot, f: impl Fn(f64, f64) -> [f64; 2]) -> Result<Field> {
    let w = seq.quad_weights();
    let vals = seq.sample_quad(&f);
    if vals.iter().any(|v| !v[0].is_finite() || !v[1].is_finite()) {
        return Err(Error::Data("non-finite value in projected function".into()));
    }
    let mut rhs = match slot {
        Slot::V0 | Slot::V2 => {
            let wf: Vec<f64> = vals.iter().zip(&w).map(|(v, w)| v[0] * w).collect();
            if slot == Slot::V0 {
                seq.test_v0(&wf)
            } else {
                seq.test_v2(&wf)
            }
        }
        Slot::V1 => {
            let wfx: Vec<f64> = vals.iter().zip(&w).map(|(v, w)| v[0] * w).collect();
            let wfy: Vec<f64> = vals.iter().zip(&w).map(|(v, w)| v[1] * w).collect();
            seq.test_v1(&wfx, &wfy)
        }
    };
    seq.solve_mass_in_place(slot, &mut rhs);
    Field::new(seq, slot, rhs)
}

/// Point values of a field, `[v, 0]` for scalar slots.
pub fn eval_field(seq: &DeRhamSequence, field: &Field, points: &[(f64, f64)]) -> Result<Vec<[f64; 2]>> {
    points
        .iter()
        .map(|&(x, y)| seq.eval_point(field.slot, &field.coeffs, x, y))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn seq(periodic: bool) -> DeRhamSequence {
        DeRhamSequence::new(2, [1, 1], [4, 5], [(0.0, 1.0), (0.0, 2.0)], [periodic, periodic]).unwrap()
    }

    #[test]
    fn zero_projects_to_zero() {
        let s = seq(false);
        let f = l2_project(&s, Slot::V1, |_, _| [0.0, 0.0]).unwrap();
        assert!(f.coeffs.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constants_are_reproduced() {
        for periodic in [false, true] {
            let s = seq(periodic);
            let f = l2_project(&s, Slot::V1, |_, _| [1.0, 0.0]).unwrap();
            for (x, y) in [(0.1, 0.2), (0.77, 1.9), (0.5, 0.5)] {
                let v = s.eval_point(Slot::V1, &f.coeffs, x, y).unwrap();
                assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(v[1], 0.0, epsilon = 1e-12);
            }
            let q = l2_project(&s, Slot::V2, |_, _| [1.0, 0.0]).unwrap();
            assert!(q.coeffs.iter().all(|c| (c - 1.0).abs() < 1e-13));
        }
    }

    #[test]
    fn non_finite_input_is_data_error() {
        let s = seq(false);
        let err = l2_project(&s, Slot::V2, |x, _| [1.0 / (x - x), 0.0]).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
    }

    #[test]
    fn out_of_domain_point() {
        let s = seq(false);
        let f = Field::zeros(&s, Slot::V2);
        assert!(matches!(
            eval_field(&s, &f, &[(2.0, 0.5)]),
            Err(Error::OutOfDomain { .. })
        ));
    }
}
