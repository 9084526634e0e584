//! Matrix Lie group primitives for SO(2)^k (tori) and SO(3).
//!
//! Algebra elements are handled in coordinates (the vee identification). For
//! SO(3) the basis is
//!
//! ```text
//! X = [0 0 0; 0 0 -1; 0 1 0]   Y = [0 0 1; 0 0 0; -1 0 0]   Z = [0 -1 0; 1 0 0; 0 0 0]
//! ```
//!
//! so that `[hat(u), hat(v)] = hat(u x v)`. For SO(2) the coordinate is the
//! rotation angle.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::interval::IntervalVector;

/// Below this rotation angle the Rodrigues coefficients switch to their Taylor series.
pub const SMALL_ANGLE: f64 = 1e-4;

/// Distance to pi inside which an SO(3) logarithm is refused.
pub const CUT_TOLERANCE: f64 = 1e-9;

/// Default margin kept between a tangent box and the boundary of the injectivity region.
pub const INJECTIVITY_MARGIN: f64 = 1e-6;

/// Coordinates of a Lie algebra element in the fixed basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlgebraVector(pub Vec<f64>);

impl AlgebraVector {
    pub fn zeros(n: usize) -> Self {
        AlgebraVector(vec![0.0; n])
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &[f64]) -> AlgebraVector {
        AlgebraVector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &[f64]) -> AlgebraVector {
        AlgebraVector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> AlgebraVector {
        AlgebraVector(self.0.iter().map(|a| c * a).collect())
    }

    pub fn neg(&self) -> AlgebraVector {
        self.scale(-1.0)
    }
}

impl Deref for AlgebraVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for AlgebraVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for AlgebraVector {
    fn from(v: Vec<f64>) -> Self {
        AlgebraVector(v)
    }
}

impl From<&[f64]> for AlgebraVector {
    fn from(v: &[f64]) -> Self {
        AlgebraVector(v.to_vec())
    }
}

/// The groups supported by the engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupModel {
    /// `SO(2)^factors`; `factors == 1` is the circle.
    Torus { factors: usize },
    So3,
}

/// A group element. Torus elements keep one planar rotation per factor.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    Torus(Vec<Matrix2<f64>>),
    So3(Matrix3<f64>),
}

impl GroupModel {
    pub const fn torus2() -> Self {
        GroupModel::Torus { factors: 2 }
    }

    /// Dimension of the Lie algebra.
    pub fn dim(&self) -> usize {
        match self {
            GroupModel::Torus { factors } => *factors,
            GroupModel::So3 => 3,
        }
    }

    pub fn is_abelian(&self) -> bool {
        matches!(self, GroupModel::Torus { .. })
    }

    pub fn identity(&self) -> GroupElement {
        match self {
            GroupModel::Torus { factors } => GroupElement::Torus(vec![Matrix2::identity(); *factors]),
            GroupModel::So3 => GroupElement::So3(Matrix3::identity()),
        }
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(ReachError::DimensionMismatch { expected: self.dim(), got: len });
        }
        Ok(())
    }

    fn check_element(&self, g: &GroupElement) -> Result<()> {
        match (self, g) {
            (GroupModel::Torus { factors }, GroupElement::Torus(blocks)) if blocks.len() == *factors => Ok(()),
            (GroupModel::So3, GroupElement::So3(_)) => Ok(()),
            _ => Err(ReachError::GroupMismatch(format!("{g:?} is not an element of {self:?}"))),
        }
    }

    /// Algebra element as a matrix. Torus elements are block diagonal.
    pub fn hat(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        self.check_dim(v.len())?;
        Ok(match self {
            GroupModel::Torus { factors } => {
                let mut m = DMatrix::zeros(2 * factors, 2 * factors);
                for (k, &w) in v.iter().enumerate() {
                    m[(2 * k, 2 * k + 1)] = -w;
                    m[(2 * k + 1, 2 * k)] = w;
                }
                m
            }
            GroupModel::So3 => {
                let h = hat3(&Vector3::new(v[0], v[1], v[2]));
                DMatrix::from_fn(3, 3, |i, j| h[(i, j)])
            }
        })
    }

    /// Inverse of [`hat`](Self::hat); reads the skew entries only.
    pub fn vee(&self, m: &DMatrix<f64>) -> Result<AlgebraVector> {
        let n = match self {
            GroupModel::Torus { factors } => 2 * factors,
            GroupModel::So3 => 3,
        };
        if m.nrows() != n || m.ncols() != n {
            return Err(ReachError::DimensionMismatch { expected: n, got: m.nrows() });
        }
        Ok(match self {
            GroupModel::Torus { factors } => AlgebraVector((0..*factors).map(|k| m[(2 * k + 1, 2 * k)]).collect()),
            GroupModel::So3 => AlgebraVector(vec![m[(2, 1)], m[(0, 2)], m[(1, 0)]]),
        })
    }

    /// Lie bracket in coordinates: `u x v` on SO(3), zero on the torus.
    pub fn bracket(&self, u: &[f64], v: &[f64]) -> AlgebraVector {
        match self {
            GroupModel::Torus { factors } => AlgebraVector::zeros(*factors),
            GroupModel::So3 => AlgebraVector(cross(u, v).to_vec()),
        }
    }

    /// Exponential map.
    pub fn exp(&self, v: &[f64]) -> Result<GroupElement> {
        self.check_dim(v.len())?;
        Ok(match self {
            GroupModel::Torus { .. } => GroupElement::Torus(v.iter().map(|&a| rot2(a)).collect()),
            GroupModel::So3 => GroupElement::So3(exp_so3(&Vector3::new(v[0], v[1], v[2]))),
        })
    }

    /// Principal logarithm.
    ///
    /// SO(2) factors return angles in `(-pi, pi]`. On SO(3) the rotation angle
    /// must stay at least [`CUT_TOLERANCE`] away from pi.
    pub fn log(&self, g: &GroupElement) -> Result<AlgebraVector> {
        self.check_element(g)?;
        match g {
            GroupElement::Torus(blocks) => Ok(AlgebraVector(blocks.iter().map(angle2).collect())),
            GroupElement::So3(r) => log_so3(r).map(|w| AlgebraVector(vec![w.x, w.y, w.z])),
        }
    }

    /// Conservative test that every point of `b` lies in the injectivity
    /// region of `exp`, keeping `margin` away from its boundary.
    pub fn box_in_injectivity_region(&self, b: &IntervalVector, margin: f64) -> bool {
        if b.len() != self.dim() {
            return false;
        }
        let limit = PI - margin;
        match self {
            GroupModel::Torus { .. } => b.iter().all(|i| i.lo() > -limit && i.hi() < limit),
            GroupModel::So3 => {
                let r2: f64 = b.iter().map(|i| i.mag() * i.mag()).sum();
                r2.sqrt() < limit
            }
        }
    }
}

impl GroupElement {
    /// Group product `self * other`.
    pub fn compose(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::Torus(a), GroupElement::Torus(b)) if a.len() == b.len() => {
                Ok(GroupElement::Torus(a.iter().zip(b).map(|(x, y)| x * y).collect()))
            }
            (GroupElement::So3(a), GroupElement::So3(b)) => Ok(GroupElement::So3(a * b)),
            _ => Err(ReachError::GroupMismatch("cannot compose elements of different groups".into())),
        }
    }

    /// Inverse; rotations invert by transposition.
    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::Torus(a) => GroupElement::Torus(a.iter().map(|m| m.transpose()).collect()),
            GroupElement::So3(r) => GroupElement::So3(r.transpose()),
        }
    }

    pub fn model(&self) -> GroupModel {
        match self {
            GroupElement::Torus(a) => GroupModel::Torus { factors: a.len() },
            GroupElement::So3(_) => GroupModel::So3,
        }
    }

    /// `max |R^T R - I|` over all factors.
    pub fn orthogonality_drift(&self) -> f64 {
        match self {
            GroupElement::Torus(a) => a
                .iter()
                .map(|m| (m.transpose() * m - Matrix2::identity()).amax())
                .fold(0.0, f64::max),
            GroupElement::So3(r) => (r.transpose() * r - Matrix3::identity()).amax(),
        }
    }

    /// Smallest determinant over all factors.
    pub fn min_determinant(&self) -> f64 {
        match self {
            GroupElement::Torus(a) => a.iter().map(|m| m.determinant()).fold(f64::INFINITY, f64::min),
            GroupElement::So3(r) => r.determinant(),
        }
    }

    /// Row-major entries of each factor (one block for SO(3)).
    pub fn to_blocks(&self) -> Vec<Vec<f64>> {
        match self {
            GroupElement::Torus(a) => a.iter().map(|m| vec![m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]]).collect(),
            GroupElement::So3(r) => vec![(0..3).flat_map(|i| (0..3).map(move |j| r[(i, j)])).collect()],
        }
    }

    /// Inverse of [`to_blocks`](Self::to_blocks).
    pub fn from_blocks(model: GroupModel, blocks: &[Vec<f64>]) -> Result<GroupElement> {
        let bad = || ReachError::Parse(format!("center blocks do not match {model:?}"));
        match model {
            GroupModel::Torus { factors } => {
                if blocks.len() != factors || blocks.iter().any(|b| b.len() != 4) {
                    return Err(bad());
                }
                Ok(GroupElement::Torus(blocks.iter().map(|b| Matrix2::new(b[0], b[1], b[2], b[3])).collect()))
            }
            GroupModel::So3 => {
                if blocks.len() != 1 || blocks[0].len() != 9 {
                    return Err(bad());
                }
                Ok(GroupElement::So3(Matrix3::from_row_slice(&blocks[0])))
            }
        }
    }

    /// Largest entrywise difference to another element of the same group.
    pub fn distance_max(&self, other: &GroupElement) -> f64 {
        match (self, other) {
            (GroupElement::Torus(a), GroupElement::Torus(b)) => {
                a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
            }
            (GroupElement::So3(a), GroupElement::So3(b)) => (a - b).amax(),
            _ => f64::INFINITY,
        }
    }
}

pub(crate) fn cross(u: &[f64], v: &[f64]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub fn hat3(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn rot2(a: f64) -> Matrix2<f64> {
    let (s, c) = a.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn angle2(m: &Matrix2<f64>) -> f64 {
    m[(1, 0)].atan2(m[(0, 0)])
}

/// Rodrigues formula.
pub fn exp_so3(v: &Vector3<f64>) -> Matrix3<f64> {
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < SMALL_ANGLE {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat3(v);
    Matrix3::identity() + k * a + k * k * b
}

/// Principal logarithm on SO(3); angle via `atan2` of the axial part and the trace.
pub fn log_so3(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let axial = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]) * 0.5;
    let s = axial.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let theta = s.atan2(c);
    if PI - theta < CUT_TOLERANCE {
        return Err(ReachError::AngleAtCut { tol: CUT_TOLERANCE });
    }
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        return Ok(axial * (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0));
    }
    if c > -0.9 {
        return Ok(axial * (theta / s));
    }
    // Near pi the axial part is small; read the axis off the symmetric part,
    // (R + R^T)/2 - cos(theta) I = (1 - cos(theta)) n n^T.
    let sym = (r + r.transpose()) * 0.5 - Matrix3::identity() * c;
    let d = sym.diagonal();
    let k = d.imax();
    let mut n: Vector3<f64> = sym.column(k).into_owned() / (sym[(k, k)]).sqrt();
    n /= n.norm();
    if n.dot(&axial) < 0.0 {
        n = -n;
    }
    Ok(n * theta)
}
