//! Runge–Kutta–Munthe-Kaas reachability in the Lie algebra.
//!
//! A reachable set is carried as `center * exp([lower, upper])`. Each step
//! integrates the bounds in algebra coordinates, either as two trajectories of
//! a monotone lifted system or as one trajectory of the mixed-monotone
//! embedding system, and then optionally moves the center to the box midpoint
//! with a BCH inclusion so the box stays near the origin.

mod tableau;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use tableau::{ButcherTableau, TableauName};

use crate::error::{ReachError, Result};
use crate::group::{AlgebraVector, GroupElement, GroupModel, INJECTIVITY_MARGIN};
use crate::interval::{Interval, IntervalVector};
use crate::series::{dexpinv, interval_bch, TruncationOrder};
use crate::tangent::{ExpTangentInterval, TangentInterval};

/// A control system `ẋ = x A(x, u)` with the pieces the engine needs.
pub trait SystemModel {
    fn group(&self) -> GroupModel;

    /// Left-trivialized dynamics `A(x, u)`.
    fn dynamics(&self, x: &GroupElement, u: &[f64]) -> Result<AlgebraVector>;

    /// Inclusion function for the lifted field `v ↦ dexp⁻¹_v A(center exp(v), u)`.
    fn lifted_inclusion(
        &self,
        center: &GroupElement,
        theta: &IntervalVector,
        u: &IntervalVector,
        order: TruncationOrder,
    ) -> Result<IntervalVector>;

    /// Whether the lifted system is known to be monotone on `theta`.
    /// `None` means the system offers no such check.
    fn monotone_check(&self, _center: &GroupElement, _theta: &IntervalVector) -> Option<bool> {
        None
    }

    /// Input bounds `[u_lo(t), u_hi(t)]`.
    fn control_bounds(&self, t: f64) -> IntervalVector;
}

impl<S: SystemModel + ?Sized> SystemModel for &S {
    fn group(&self) -> GroupModel {
        (**self).group()
    }
    fn dynamics(&self, x: &GroupElement, u: &[f64]) -> Result<AlgebraVector> {
        (**self).dynamics(x, u)
    }
    fn lifted_inclusion(
        &self,
        center: &GroupElement,
        theta: &IntervalVector,
        u: &IntervalVector,
        order: TruncationOrder,
    ) -> Result<IntervalVector> {
        (**self).lifted_inclusion(center, theta, u, order)
    }
    fn monotone_check(&self, center: &GroupElement, theta: &IntervalVector) -> Option<bool> {
        (**self).monotone_check(center, theta)
    }
    fn control_bounds(&self, t: f64) -> IntervalVector {
        (**self).control_bounds(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Two trajectories of the lifted system; requires monotonicity.
    Monotone,
    /// One trajectory of the mixed-monotone embedding system.
    Embedding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecenterPolicy {
    Always,
    Never,
    /// Recenter when the widest coordinate of the box exceeds the threshold.
    Width(f64),
}

impl RecenterPolicy {
    fn triggers(&self, b: &IntervalVector) -> bool {
        match *self {
            RecenterPolicy::Always => true,
            RecenterPolicy::Never => false,
            RecenterPolicy::Width(w) => b.max_width() > w,
        }
    }
}

impl fmt::Display for RecenterPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RecenterPolicy::Always => write!(f, "always"),
            RecenterPolicy::Never => write!(f, "never"),
            RecenterPolicy::Width(w) => write!(f, "width({w})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachConfig {
    pub h: f64,
    pub steps: usize,
    pub tableau: ButcherTableau,
    pub mode: Mode,
    pub recenter: RecenterPolicy,
    pub order: TruncationOrder,
    /// Distance kept from the boundary of the injectivity region.
    pub injectivity_margin: f64,
}

impl ReachConfig {
    pub fn new(
        h: f64,
        steps: usize,
        tableau: ButcherTableau,
        mode: Mode,
        recenter: RecenterPolicy,
        order: TruncationOrder,
    ) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ReachError::InvalidConfig(format!("time step must be positive, got {h}")));
        }
        if let RecenterPolicy::Width(w) = recenter {
            if !(w > 0.0) {
                return Err(ReachError::InvalidConfig(format!("width threshold must be positive, got {w}")));
            }
        }
        Ok(ReachConfig { h, steps, tableau, mode, recenter, order, injectivity_margin: INJECTIVITY_MARGIN })
    }

    /// Time of step `n`.
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.h
    }
}

/// One record of a reach tube.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeEntry {
    pub step: usize,
    pub t: f64,
    pub set: ExpTangentInterval,
    /// Whether the center moved at the end of the step producing this entry.
    pub recentered: bool,
    /// Result of the monotonicity check over the step, if the system has one.
    pub monotone_check: Option<bool>,
}

/// Time-indexed over-approximation of the reachable set.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachTube {
    pub entries: Vec<TubeEntry>,
}

impl ReachTube {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&TubeEntry> {
        self.entries.last()
    }
}

/// A run that stopped early; carries the tube computed so far.
#[derive(Debug, Clone)]
pub struct Aborted {
    pub tube: ReachTube,
    /// Index of the step that failed (the step from `step` to `step + 1`).
    pub step: usize,
    pub error: ReachError,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "reach run aborted at step {}: {}", self.step, self.error)
    }
}

impl std::error::Error for Aborted {}

/// Mixed-monotone embedding field built from an inclusion function.
///
/// Lower output `i` is the lower end of `F` evaluated with coordinate `i`
/// pinned to its lower bound; the upper output pins it to its upper bound.
pub fn embedding_field<F>(inclusion: F, state: &IntervalVector, input: &IntervalVector) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&IntervalVector, &IntervalVector) -> Result<IntervalVector>,
{
    let n = state.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for i in 0..n {
        let lo = inclusion(&state.with_component(i, Interval::point(state[i].lo())), input)?;
        let hi = inclusion(&state.with_component(i, Interval::point(state[i].hi())), input)?;
        if lo.len() != n || hi.len() != n {
            return Err(ReachError::DimensionMismatch { expected: n, got: lo.len() });
        }
        lower.push(lo[i].lo());
        upper.push(hi[i].hi());
    }
    Ok((lower, upper))
}

/// [`embedding_field`] on raw bound vectors; rejects `lower > upper`.
pub fn embedding_field_bounds<F>(
    inclusion: F,
    v_lo: &[f64],
    v_hi: &[f64],
    u_lo: &[f64],
    u_hi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(&IntervalVector, &IntervalVector) -> Result<IntervalVector>,
{
    let state = ordered_box(v_lo, v_hi)?;
    let input = ordered_box(u_lo, u_hi)?;
    embedding_field(inclusion, &state, &input)
}

fn ordered_box(lo: &[f64], hi: &[f64]) -> Result<IntervalVector> {
    if lo.len() != hi.len() {
        return Err(ReachError::DimensionMismatch { expected: lo.len(), got: hi.len() });
    }
    if let Some(index) = lo.iter().zip(hi).position(|(l, h)| !(l <= h)) {
        return Err(ReachError::OrderingViolation { index });
    }
    IntervalVector::from_bounds(lo, hi)
}

/// Moves the center to the box midpoint.
///
/// With `Ω` the midpoint, the new center is `center exp(Ω)` and the new box
/// `BCH_{-Ω}(box)`, so `center exp(box) ⊆ center' exp(box')` up to truncation.
pub fn recenter(
    model: GroupModel,
    center: &GroupElement,
    b: &IntervalVector,
    order: TruncationOrder,
) -> Result<(GroupElement, IntervalVector)> {
    let omega: Vec<f64> = b.iter().map(Interval::midpoint).collect();
    if omega.iter().all(|&x| x == 0.0) {
        return Ok((center.clone(), b.clone()));
    }
    let new_center = center.compose(&model.exp(&omega)?)?;
    let neg: Vec<f64> = omega.iter().map(|x| -x).collect();
    let new_box = interval_bch(model, &neg, b, order)?;
    Ok((new_center, new_box))
}

/// Result of a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub center: GroupElement,
    pub tangent: IntervalVector,
    pub recentered: bool,
    pub monotone_check: Option<bool>,
}

fn combine(base: &[f64], weights: impl Iterator<Item = (f64, usize)>, increments: &[Vec<f64>]) -> Vec<f64> {
    let mut out = base.to_vec();
    for (w, l) in weights {
        if w != 0.0 {
            for (o, f) in out.iter_mut().zip(&increments[l]) {
                *o += w * f;
            }
        }
    }
    out
}

fn merge_check(acc: Option<bool>, next: Option<bool>) -> Option<bool> {
    match (acc, next) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => Some(a && b),
    }
}

/// Advances `center * exp(tangent)` from `t_n` to `t_n + h`.
pub fn rkmk_step<S: SystemModel + ?Sized>(
    system: &S,
    config: &ReachConfig,
    center: &GroupElement,
    tangent: &IntervalVector,
    t_n: f64,
    step: usize,
) -> Result<StepOutput> {
    let model = system.group();
    let tab = &config.tableau;
    let h = config.h;
    let theta_lo = tangent.lower();
    let theta_hi = tangent.upper();
    let mut f_lo: Vec<Vec<f64>> = Vec::with_capacity(tab.stages());
    let mut f_hi: Vec<Vec<f64>> = Vec::with_capacity(tab.stages());
    let mut check: Option<bool> = None;

    for k in 0..tab.stages() {
        let omega_lo = combine(&theta_lo, (0..k).map(|l| (tab.a(k, l), l)), &f_lo);
        let omega_hi = combine(&theta_hi, (0..k).map(|l| (tab.a(k, l), l)), &f_hi);
        let stage_box = ordered_box(&omega_lo, &omega_hi)?;
        let u = system.control_bounds(t_n + tab.c()[k] * h);
        match config.mode {
            Mode::Monotone => {
                let ok = system.monotone_check(center, &stage_box);
                check = merge_check(check, ok);
                if ok != Some(true) {
                    return Err(ReachError::NonMonotoneStep { step });
                }
                let u_lo = u.lower();
                let u_hi = u.upper();
                let a_lo = system.dynamics(&center.compose(&model.exp(&omega_lo)?)?, &u_lo)?;
                let a_hi = system.dynamics(&center.compose(&model.exp(&omega_hi)?)?, &u_hi)?;
                f_lo.push(dexpinv(model, &omega_lo, &a_lo.scale(h), config.order).0);
                f_hi.push(dexpinv(model, &omega_hi, &a_hi.scale(h), config.order).0);
            }
            Mode::Embedding => {
                check = merge_check(check, system.monotone_check(center, &stage_box));
                let (lo, hi) = embedding_field(
                    |x: &IntervalVector, w: &IntervalVector| system.lifted_inclusion(center, x, w, config.order),
                    &stage_box,
                    &u,
                )?;
                f_lo.push(lo.iter().map(|x| h * x).collect());
                f_hi.push(hi.iter().map(|x| h * x).collect());
            }
        }
    }

    let new_lo = combine(&theta_lo, tab.b().iter().copied().zip(0..), &f_lo);
    let new_hi = combine(&theta_hi, tab.b().iter().copied().zip(0..), &f_hi);
    let updated = ordered_box(&new_lo, &new_hi)?;
    if !model.box_in_injectivity_region(&updated, config.injectivity_margin) {
        return Err(ReachError::InjectivityExceeded { step });
    }

    if config.recenter.triggers(&updated) {
        let (c, b) = recenter(model, center, &updated, config.order)?;
        if !model.box_in_injectivity_region(&b, config.injectivity_margin) {
            return Err(ReachError::InjectivityExceeded { step });
        }
        Ok(StepOutput { center: c, tangent: b, recentered: true, monotone_check: check })
    } else {
        Ok(StepOutput { center: center.clone(), tangent: updated, recentered: false, monotone_check: check })
    }
}

/// Runs `config.steps` steps from `init`, returning `steps + 1` entries.
pub fn rkmk_reach<S: SystemModel + ?Sized>(
    system: &S,
    config: &ReachConfig,
    init: &ExpTangentInterval,
) -> std::result::Result<ReachTube, Aborted> {
    let model = system.group();
    let abort = |tube: ReachTube, step: usize, error: ReachError| Aborted { tube, step, error };
    let mut tube = ReachTube { entries: Vec::with_capacity(config.steps + 1) };
    if init.model() != model {
        return Err(abort(tube, 0, ReachError::GroupMismatch("initial set lives on another group".into())));
    }
    if !model.box_in_injectivity_region(init.tangent.as_box(), config.injectivity_margin) {
        return Err(abort(tube, 0, ReachError::InjectivityExceeded { step: 0 }));
    }
    let init_check = system.monotone_check(&init.center, init.tangent.as_box());
    tube.entries.push(TubeEntry {
        step: 0,
        t: 0.0,
        set: init.clone(),
        recentered: false,
        monotone_check: init_check,
    });

    let mut center = init.center.clone();
    let mut tangent = init.tangent.as_box().clone();
    for n in 0..config.steps {
        match rkmk_step(system, config, &center, &tangent, config.time(n), n) {
            Ok(out) => {
                center = out.center;
                tangent = out.tangent;
                log::debug!("step {} widths {:?}", n + 1, tangent.widths());
                tube.entries.push(TubeEntry {
                    step: n + 1,
                    t: config.time(n + 1),
                    set: ExpTangentInterval { center: center.clone(), tangent: TangentInterval::from(tangent.clone()) },
                    recentered: out.recentered,
                    monotone_check: out.monotone_check,
                });
            }
            Err(e) => {
                log::info!("reach run stopped at step {n}: {e}");
                return Err(abort(tube, n, e));
            }
        }
    }
    Ok(tube)
}
