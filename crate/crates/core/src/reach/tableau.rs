use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};

/// Coefficients `{a_kl, b_l, c_k}` of an explicit Runge–Kutta scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

/// Named schemes accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TableauName {
    Euler,
    Midpoint,
    Heun,
    #[default]
    Rk4,
}

impl TableauName {
    pub fn tableau(self) -> ButcherTableau {
        match self {
            TableauName::Euler => ButcherTableau::euler(),
            TableauName::Midpoint => ButcherTableau::midpoint(),
            TableauName::Heun => ButcherTableau::heun(),
            TableauName::Rk4 => ButcherTableau::rk4(),
        }
    }
}

impl ButcherTableau {
    /// Validates an explicit tableau: `a` strictly lower triangular, `Σ b = 1`, `c_1 = 0`.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let nu = b.len();
        if nu == 0 || c.len() != nu || a.len() != nu || a.iter().any(|row| row.len() != nu) {
            return Err(ReachError::InvalidConfig(format!(
                "tableau shapes do not agree: a is {}x?, b has {}, c has {}",
                a.len(),
                nu,
                c.len()
            )));
        }
        for (k, row) in a.iter().enumerate() {
            if row[k..].iter().any(|&x| x != 0.0) {
                return Err(ReachError::InvalidConfig(format!(
                    "tableau is not explicit: row {k} has entries on or above the diagonal"
                )));
            }
        }
        let sum: f64 = b.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(ReachError::InvalidConfig(format!("tableau weights sum to {sum}, not 1")));
        }
        if c[0] != 0.0 {
            return Err(ReachError::InvalidConfig("tableau node c_1 must be 0".into()));
        }
        Ok(ButcherTableau { a, b, c })
    }

    pub fn euler() -> Self {
        ButcherTableau { a: vec![vec![0.0]], b: vec![1.0], c: vec![0.0] }
    }

    pub fn midpoint() -> Self {
        ButcherTableau {
            a: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
            b: vec![0.0, 1.0],
            c: vec![0.0, 0.5],
        }
    }

    pub fn heun() -> Self {
        ButcherTableau {
            a: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            b: vec![0.5, 0.5],
            c: vec![0.0, 1.0],
        }
    }

    /// Classical fourth-order scheme.
    pub fn rk4() -> Self {
        ButcherTableau {
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, k: usize, l: usize) -> f64 {
        self.a[k][l]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}
