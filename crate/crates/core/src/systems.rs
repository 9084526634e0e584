//! The two worked systems: consensus of two oscillators on the torus and
//! attitude kinematics on SO(3).

use std::f64::consts::PI;

use crate::error::{ReachError, Result};
use crate::group::{AlgebraVector, GroupElement, GroupModel};
use crate::interval::{Interval, IntervalVector};
use crate::reach::{ButcherTableau, Mode, ReachConfig, RecenterPolicy, SystemModel};
use crate::series::{interval_dexpinv, TruncationOrder};
use crate::tangent::{ExpTangentInterval, TangentInterval};

/// `ẋ₁ = x₁(ω̂₁ + log(x₂x₁⁻¹))`, `ẋ₂ = x₂(ω̂₂ + log(x₁x₂⁻¹))` on `SO(2)²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusConsensus {
    pub omega: [f64; 2],
}

/// Principal angle of `x₂ x₁⁻¹`.
fn center_offset(center: &GroupElement) -> Result<f64> {
    match center {
        GroupElement::Torus(b) if b.len() == 2 => {
            let rel = b[1] * b[0].transpose();
            Ok(rel[(1, 0)].atan2(rel[(0, 0)]))
        }
        _ => Err(ReachError::GroupMismatch("consensus system lives on SO(2)^2".into())),
    }
}

fn check_branch(angle: Interval) -> Result<()> {
    for a in [angle.lo(), angle.hi()] {
        if !(a > -PI && a < PI) {
            return Err(ReachError::BranchViolation { angle: a });
        }
    }
    Ok(())
}

/// Lifted consensus field around `center` at algebra coordinates `theta`.
///
/// The relative angle is `log(x̊₂x̊₁⁻¹) + θ₂ - θ₁`, which must stay in `(-pi, pi)`.
pub fn torus_lifted_field(omega: [f64; 2], center: &GroupElement, theta: &[f64]) -> Result<AlgebraVector> {
    if theta.len() != 2 {
        return Err(ReachError::DimensionMismatch { expected: 2, got: theta.len() });
    }
    let rel = center_offset(center)? + theta[1] - theta[0];
    check_branch(Interval::point(rel))?;
    Ok(AlgebraVector(vec![omega[0] + rel, omega[1] - rel]))
}

/// True iff every corner of `theta` keeps the relative angle inside `(-pi, pi)`.
pub fn torus_monotone_check(center: &GroupElement, theta: &IntervalVector) -> bool {
    let Ok(offset) = center_offset(center) else {
        return false;
    };
    if theta.len() != 2 {
        return false;
    }
    [theta[1].lo() - theta[0].hi(), theta[1].hi() - theta[0].lo()]
        .iter()
        .all(|d| (offset + d).abs() < PI)
}

impl SystemModel for TorusConsensus {
    fn group(&self) -> GroupModel {
        GroupModel::torus2()
    }

    fn dynamics(&self, x: &GroupElement, _u: &[f64]) -> Result<AlgebraVector> {
        let rel = center_offset(x)?;
        Ok(AlgebraVector(vec![self.omega[0] + rel, self.omega[1] - rel]))
    }

    fn lifted_inclusion(
        &self,
        center: &GroupElement,
        theta: &IntervalVector,
        _u: &IntervalVector,
        _order: TruncationOrder,
    ) -> Result<IntervalVector> {
        if theta.len() != 2 {
            return Err(ReachError::DimensionMismatch { expected: 2, got: theta.len() });
        }
        let rel = Interval::point(center_offset(center)?) + theta[1] - theta[0];
        check_branch(rel)?;
        Ok(IntervalVector::new(vec![Interval::point(self.omega[0]) + rel, Interval::point(self.omega[1]) - rel]))
    }

    fn monotone_check(&self, center: &GroupElement, theta: &IntervalVector) -> Option<bool> {
        Some(torus_monotone_check(center, theta))
    }

    fn control_bounds(&self, _t: f64) -> IntervalVector {
        IntervalVector::empty()
    }
}

/// `Ṙ = R û` with `u = u_nom(t) + w`, `w ∈ [-d, d]³`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct So3Attitude {
    pub disturbance: f64,
}

impl Default for So3Attitude {
    fn default() -> Self {
        So3Attitude { disturbance: 0.01 }
    }
}

impl So3Attitude {
    pub fn nominal(t: f64) -> [f64; 3] {
        [(5.0 - t) / 5.0, 1.0 - (t / 5.0).powi(2), (PI * t / 2.0).sin()]
    }
}

/// `DEXPINV(theta, u)` for the attitude system.
pub fn so3_lifted_inclusion(theta: &IntervalVector, u: &IntervalVector, order: TruncationOrder) -> Result<IntervalVector> {
    interval_dexpinv(GroupModel::So3, theta, u, order)
}

impl SystemModel for So3Attitude {
    fn group(&self) -> GroupModel {
        GroupModel::So3
    }

    fn dynamics(&self, _x: &GroupElement, u: &[f64]) -> Result<AlgebraVector> {
        if u.len() != 3 {
            return Err(ReachError::DimensionMismatch { expected: 3, got: u.len() });
        }
        Ok(AlgebraVector::from(u))
    }

    fn lifted_inclusion(
        &self,
        _center: &GroupElement,
        theta: &IntervalVector,
        u: &IntervalVector,
        order: TruncationOrder,
    ) -> Result<IntervalVector> {
        so3_lifted_inclusion(theta, u, order)
    }

    fn control_bounds(&self, t: f64) -> IntervalVector {
        let d = self.disturbance;
        So3Attitude::nominal(t)
            .iter()
            .map(|&c| Interval::new(c - d, c + d).unwrap_or(Interval::point(c)))
            .collect()
    }
}

/// Either worked system, for code that picks one at run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseSystem {
    Torus(TorusConsensus),
    So3(So3Attitude),
}

impl SystemModel for CaseSystem {
    fn group(&self) -> GroupModel {
        match self {
            CaseSystem::Torus(s) => s.group(),
            CaseSystem::So3(s) => s.group(),
        }
    }

    fn dynamics(&self, x: &GroupElement, u: &[f64]) -> Result<AlgebraVector> {
        match self {
            CaseSystem::Torus(s) => s.dynamics(x, u),
            CaseSystem::So3(s) => s.dynamics(x, u),
        }
    }

    fn lifted_inclusion(
        &self,
        center: &GroupElement,
        theta: &IntervalVector,
        u: &IntervalVector,
        order: TruncationOrder,
    ) -> Result<IntervalVector> {
        match self {
            CaseSystem::Torus(s) => s.lifted_inclusion(center, theta, u, order),
            CaseSystem::So3(s) => s.lifted_inclusion(center, theta, u, order),
        }
    }

    fn monotone_check(&self, center: &GroupElement, theta: &IntervalVector) -> Option<bool> {
        match self {
            CaseSystem::Torus(s) => s.monotone_check(center, theta),
            CaseSystem::So3(s) => s.monotone_check(center, theta),
        }
    }

    fn control_bounds(&self, t: f64) -> IntervalVector {
        match self {
            CaseSystem::Torus(s) => s.control_bounds(t),
            CaseSystem::So3(s) => s.control_bounds(t),
        }
    }
}

/// A ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub name: &'static str,
    pub system: CaseSystem,
    pub config: ReachConfig,
    pub init: ExpTangentInterval,
}

/// Oscillators at angles pi/2 and pi with half-widths 0.6 and 0.1, run to 3 s.
pub fn torus_case_study() -> CaseStudy {
    let m = GroupModel::torus2();
    CaseStudy {
        name: "torus",
        system: CaseSystem::Torus(TorusConsensus { omega: [5.0, 2.0] }),
        config: ReachConfig::new(
            0.01,
            300,
            ButcherTableau::rk4(),
            Mode::Monotone,
            RecenterPolicy::Always,
            TruncationOrder::Three,
        )
        .expect("built-in torus config is valid"),
        init: ExpTangentInterval {
            center: m.exp(&[PI / 2.0, PI]).expect("torus exp"),
            tangent: TangentInterval::symmetric(&[0.6, 0.1]).expect("valid radii"),
        },
    }
}

/// Identity attitude with a ±0.01 box, run to 5 s.
pub fn so3_case_study() -> CaseStudy {
    CaseStudy {
        name: "so3",
        system: CaseSystem::So3(So3Attitude::default()),
        config: ReachConfig::new(
            0.01,
            500,
            ButcherTableau::rk4(),
            Mode::Embedding,
            RecenterPolicy::Always,
            TruncationOrder::Three,
        )
        .expect("built-in so3 config is valid"),
        init: ExpTangentInterval {
            center: GroupModel::So3.identity(),
            tangent: TangentInterval::symmetric(&[0.01; 3]).expect("valid radii"),
        },
    }
}

pub fn case_study_configs() -> Vec<CaseStudy> {
    vec![torus_case_study(), so3_case_study()]
}
