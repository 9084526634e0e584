//! Closed real intervals and interval vectors.
//!
//! Endpoints use plain double-precision arithmetic (no directed rounding).
//! Containment checks take an explicit slack instead.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};

/// Default slack used by containment checks.
pub const DEFAULT_SLACK: f64 = 1e-9;

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        // NaN fails this comparison too
        if !(lo <= hi) {
            return Err(ReachError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    /// Degenerate interval `[x, x]`.
    pub const fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Interval `[c - r, c + r]` for `r >= 0`.
    pub fn centered(c: f64, r: f64) -> Result<Self> {
        Interval::new(c - r, c + r)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_with_slack(&self, x: f64, slack: f64) -> bool {
        self.lo - slack <= x && x <= self.hi + slack
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Multiplication by a real scalar.
    pub fn scale(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval { lo: c * self.lo, hi: c * self.hi }
        } else {
            Interval { lo: c * self.hi, hi: c * self.lo }
        }
    }

    /// Largest absolute value attained on the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

impl TryFrom<[f64; 2]> for Interval {
    type Error = ReachError;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `[a.lo + b.lo, a.hi + b.hi]`.
pub fn iv_add(a: Interval, b: Interval) -> Interval {
    Interval { lo: a.lo + b.lo, hi: a.hi + b.hi }
}

pub fn iv_sub(a: Interval, b: Interval) -> Interval {
    Interval { lo: a.lo - b.hi, hi: a.hi - b.lo }
}

/// Min/max over the four endpoint products.
pub fn iv_mul(a: Interval, b: Interval) -> Interval {
    let p = [a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi];
    let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Interval { lo, hi }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        iv_add(self, rhs)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        iv_sub(self, rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        iv_mul(self, rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

/// A fixed-length vector of intervals, ordered componentwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalVector(Vec<Interval>);

impl IntervalVector {
    pub fn new(components: Vec<Interval>) -> Self {
        IntervalVector(components)
    }

    /// Builds `[lower, upper]` componentwise.
    pub fn from_bounds(lower: &[f64], upper: &[f64]) -> Result<Self> {
        check_len(lower.len(), upper.len())?;
        lower
            .iter()
            .zip(upper)
            .map(|(&l, &u)| Interval::new(l, u))
            .collect::<Result<Vec<_>>>()
            .map(IntervalVector)
    }

    pub fn from_points(x: &[f64]) -> Self {
        IntervalVector(x.iter().map(|&v| Interval::point(v)).collect())
    }

    /// `[c - r, c + r]` componentwise.
    pub fn centered(center: &[f64], radius: &[f64]) -> Result<Self> {
        check_len(center.len(), radius.len())?;
        center
            .iter()
            .zip(radius)
            .map(|(&c, &r)| Interval::centered(c, r))
            .collect::<Result<Vec<_>>>()
            .map(IntervalVector)
    }

    pub fn empty() -> Self {
        IntervalVector(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Interval] {
        &self.0
    }

    pub fn lower(&self) -> Vec<f64> {
        self.0.iter().map(Interval::lo).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.0.iter().map(Interval::hi).collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.0.iter().map(Interval::width).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    /// Replaces coordinate `i` by `value`.
    pub fn with_component(&self, i: usize, value: Interval) -> Self {
        let mut out = self.clone();
        out.0[i] = value;
        out
    }

    pub fn is_subset_of(&self, other: &IntervalVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset_of(b))
    }

    pub fn add(&self, other: &IntervalVector) -> Result<IntervalVector> {
        check_len(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(&a, &b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntervalVector) -> Result<IntervalVector> {
        check_len(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(&a, &b)| a - b).collect())
    }

    pub fn scale(&self, c: f64) -> IntervalVector {
        self.0.iter().map(|a| a.scale(c)).collect()
    }

    /// Translation by a point.
    pub fn shift(&self, x: &[f64]) -> Result<IntervalVector> {
        check_len(self.len(), x.len())?;
        Ok(self.0.iter().zip(x).map(|(a, &v)| *a + Interval::point(v)).collect())
    }
}

impl FromIterator<Interval> for IntervalVector {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalVector(iter.into_iter().collect())
    }
}

impl Index<usize> for IntervalVector {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalVector {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(ReachError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Natural inclusion of the cross product on 3-vectors.
pub fn iv_cross3(a: &IntervalVector, b: &IntervalVector) -> Result<IntervalVector> {
    check_len(3, a.len())?;
    check_len(3, b.len())?;
    Ok(IntervalVector(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]))
}

/// Membership test with slack: `lo - slack <= x_i <= hi + slack` for all `i`.
pub fn iv_contains(a: &IntervalVector, x: &[f64], slack: f64) -> Result<bool> {
    check_len(a.len(), x.len())?;
    Ok(a.iter().zip(x).all(|(i, &v)| i.contains_with_slack(v, slack)))
}

/// Largest amount by which `x` lies outside `a` (zero when inside).
pub fn escape_margin(a: &IntervalVector, x: &[f64]) -> f64 {
    a.iter()
        .zip(x)
        .map(|(i, &v)| (i.lo() - v).max(v - i.hi()).max(0.0))
        .fold(0.0, f64::max)
}

/// Componentwise `((lo + hi) / 2, hi - lo)`.
pub fn iv_midpoint_width(a: &IntervalVector) -> (Vec<f64>, Vec<f64>) {
    let mid = a.iter().map(Interval::midpoint).collect();
    let width = a.widths();
    (mid, width)
}
