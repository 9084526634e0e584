//! Interval reachability for control systems on matrix Lie groups.
//!
//! Reachable sets are kept as `center * exp([lower, upper])` with the box in
//! algebra coordinates. The box is integrated with a Runge–Kutta–Munthe-Kaas
//! scheme and periodically recentered with a Baker–Campbell–Hausdorff
//! inclusion. The torus `SO(2)^k` and `SO(3)` are supported.

pub mod config;
pub mod error;
pub mod group;
pub mod interval;
pub mod reach;
pub mod series;
pub mod systems;
pub mod tangent;
pub mod tube_io;
pub mod validation;

pub use error::{ReachError, Result};
pub use group::{AlgebraVector, GroupElement, GroupModel};
pub use interval::{Interval, IntervalVector};
pub use reach::{rkmk_reach, Aborted, Mode, ReachConfig, ReachTube, RecenterPolicy, SystemModel, TubeEntry};
pub use series::TruncationOrder;
pub use tangent::{ExpTangentInterval, TangentInterval};
