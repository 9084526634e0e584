//! Experiment files.
//!
//! ```toml
//! horizon = 3.0
//! h = 0.01
//! tableau = "rk4"
//! mode = "monotone"
//! recenter = "always"        # "never" or { width = 0.5 }
//! order = 3
//! seed = 0
//!
//! [system]
//! kind = "torus"
//! omega = [5.0, 2.0]
//!
//! [initial]
//! center = [1.5707963267948966, 3.141592653589793]
//! lower = [-0.6, -0.1]
//! upper = [0.6, 0.1]
//! ```
//!
//! The center is given in algebra coordinates and exponentiated: oscillator
//! angles on the torus, an axis-angle vector on SO(3).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::reach::{Mode, ReachConfig, RecenterPolicy, TableauName};
use crate::series::TruncationOrder;
use crate::systems::{CaseSystem, So3Attitude, TorusConsensus};
use crate::tangent::{ExpTangentInterval, TangentInterval};
use crate::validation::{Checkpoints, ValidationConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Torus { omega: [f64; 2] },
    So3 {
        #[serde(default = "default_disturbance")]
        disturbance: f64,
    },
}

fn default_disturbance() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSet {
    pub center: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Defaults for `reach validate`; command-line flags override them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationSpec {
    #[serde(default)]
    pub meshgrid: Option<usize>,
    #[serde(default = "default_uniform")]
    pub uniform: usize,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Checkpoints,
    #[serde(default = "default_slack")]
    pub slack: f64,
    #[serde(default = "default_substeps")]
    pub substeps: usize,
}

fn default_uniform() -> usize {
    500
}
fn default_checkpoints() -> Checkpoints {
    Checkpoints::Every
}
fn default_slack() -> f64 {
    1e-6
}
fn default_substeps() -> usize {
    10
}

impl Default for ValidationSpec {
    fn default() -> Self {
        ValidationSpec {
            meshgrid: None,
            uniform: default_uniform(),
            checkpoints: default_checkpoints(),
            slack: default_slack(),
            substeps: default_substeps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    pub initial: InitialSet,
    /// Final time `T`; must be a whole number of steps.
    pub horizon: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub tableau: TableauName,
    pub mode: Mode,
    #[serde(default = "default_recenter")]
    pub recenter: RecenterPolicy,
    #[serde(default = "default_order")]
    pub order: TruncationOrder,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub validation: ValidationSpec,
}

fn default_h() -> f64 {
    0.01
}
fn default_recenter() -> RecenterPolicy {
    RecenterPolicy::Always
}
fn default_order() -> TruncationOrder {
    TruncationOrder::Three
}

/// Everything needed to run and validate one experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub system: CaseSystem,
    pub reach: ReachConfig,
    pub init: ExpTangentInterval,
    pub validation: ValidationConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ReachError::Parse(e.to_string()))?;
        cfg.build()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    fn steps(&self) -> Result<usize> {
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return Err(ReachError::InvalidConfig(format!("horizon must be non-negative, got {}", self.horizon)));
        }
        let n = (self.horizon / self.h).round();
        if (n * self.h - self.horizon).abs() > 1e-9 * self.horizon.max(1.0) {
            return Err(ReachError::InvalidConfig(format!(
                "horizon {} is not a whole number of steps of {}",
                self.horizon, self.h
            )));
        }
        Ok(n as usize)
    }

    /// Validates the file and builds the run.
    pub fn build(&self) -> Result<Experiment> {
        let system = match self.system {
            SystemSpec::Torus { omega } => CaseSystem::Torus(TorusConsensus { omega }),
            SystemSpec::So3 { disturbance } => {
                if !(disturbance >= 0.0) {
                    return Err(ReachError::InvalidConfig(format!("disturbance must be non-negative, got {disturbance}")));
                }
                CaseSystem::So3(So3Attitude { disturbance })
            }
        };
        let model = crate::reach::SystemModel::group(&system);
        if self.initial.center.len() != model.dim() {
            return Err(ReachError::DimensionMismatch { expected: model.dim(), got: self.initial.center.len() });
        }
        let init = ExpTangentInterval::new(
            model.exp(&self.initial.center)?,
            TangentInterval::new(&self.initial.lower, &self.initial.upper)?,
        )?;
        let reach = ReachConfig::new(
            self.h,
            self.steps()?,
            self.tableau.tableau(),
            self.mode,
            self.recenter,
            self.order,
        )?;
        let v = &self.validation;
        if v.substeps == 0 || !(v.slack >= 0.0) {
            return Err(ReachError::InvalidConfig("validation needs substeps >= 1 and slack >= 0".into()));
        }
        let validation = ValidationConfig {
            meshgrid: v.meshgrid,
            uniform: v.uniform,
            seed: self.seed,
            checkpoints: v.checkpoints,
            slack: v.slack,
            substeps: v.substeps,
        };
        Ok(Experiment { system, reach, init, validation })
    }
}
