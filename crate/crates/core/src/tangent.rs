//! Tangent intervals and their exponentiated images on the group.

use crate::error::{ReachError, Result};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::interval::{Interval, IntervalVector};

/// An order interval `[lower, upper]` in algebra coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentInterval(IntervalVector);

impl TangentInterval {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        IntervalVector::from_bounds(lower, upper).map(TangentInterval)
    }

    /// Symmetric box `[-r, r]` per coordinate.
    pub fn symmetric(radius: &[f64]) -> Result<Self> {
        IntervalVector::centered(&vec![0.0; radius.len()], radius).map(TangentInterval)
    }

    pub fn point(v: &[f64]) -> Self {
        TangentInterval(IntervalVector::from_points(v))
    }

    pub fn lower(&self) -> AlgebraVector {
        AlgebraVector(self.0.lower())
    }

    pub fn upper(&self) -> AlgebraVector {
        AlgebraVector(self.0.upper())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_box(&self) -> &IntervalVector {
        &self.0
    }

    pub fn into_box(self) -> IntervalVector {
        self.0
    }

    pub fn midpoint(&self) -> AlgebraVector {
        AlgebraVector(self.0.iter().map(Interval::midpoint).collect())
    }

    pub fn widths(&self) -> Vec<f64> {
        self.0.widths()
    }
}

impl From<IntervalVector> for TangentInterval {
    fn from(b: IntervalVector) -> Self {
        TangentInterval(b)
    }
}

/// The set `{ center * exp(hat(v)) : v in tangent }`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpTangentInterval {
    pub center: GroupElement,
    pub tangent: TangentInterval,
}

impl ExpTangentInterval {
    pub fn new(center: GroupElement, tangent: TangentInterval) -> Result<Self> {
        let model = center.model();
        if tangent.dim() != model.dim() {
            return Err(ReachError::DimensionMismatch { expected: model.dim(), got: tangent.dim() });
        }
        Ok(ExpTangentInterval { center, tangent })
    }

    pub fn model(&self) -> GroupModel {
        self.center.model()
    }

    /// `center * exp(hat(v))`.
    pub fn element_at(&self, v: &[f64]) -> Result<GroupElement> {
        self.center.compose(&self.model().exp(v)?)
    }

    /// Tangent coordinates of `x` relative to the center: `vee(log(center^-1 x))`.
    pub fn coordinates_of(&self, x: &GroupElement) -> Result<AlgebraVector> {
        self.model().log(&self.center.inverse().compose(x)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inverted_bounds() {
        assert!(TangentInterval::new(&[0.0, 1.0], &[1.0, 0.5]).is_err());
        assert!(TangentInterval::new(&[0.0], &[0.0]).is_ok());
    }

    #[test]
    fn coordinates_round_trip() {
        let m = GroupModel::So3;
        let set = ExpTangentInterval::new(m.exp(&[0.3, -0.2, 1.0]).unwrap(), TangentInterval::symmetric(&[0.1; 3]).unwrap())
            .unwrap();
        let v = [0.05, -0.02, 0.08];
        let x = set.element_at(&v).unwrap();
        let back = set.coordinates_of(&x).unwrap();
        for k in 0..3 {
            assert!((back[k] - v[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn dimension_checked() {
        assert!(ExpTangentInterval::new(GroupModel::So3.identity(), TangentInterval::symmetric(&[0.1; 2]).unwrap()).is_err());
    }
}
