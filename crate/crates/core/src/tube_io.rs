//! Line-delimited JSON tube files.
//!
//! Each line is one record
//! `{"n", "t", "center", "theta_lower", "theta_upper", "recentered", "monotone_check"}`
//! where `center` lists the row-major entries of each rotation block. A run
//! that stopped early ends with `{"truncated": true, "step": k, "error": "..."}`.
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the tube bit for bit.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::group::{GroupElement, GroupModel};
use crate::reach::{ReachTube, TubeEntry};
use crate::tangent::{ExpTangentInterval, TangentInterval};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TubeRecord {
    pub n: usize,
    pub t: f64,
    pub center: Vec<Vec<f64>>,
    pub theta_lower: Vec<f64>,
    pub theta_upper: Vec<f64>,
    pub recentered: bool,
    pub monotone_check: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub truncated: bool,
    pub step: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Line {
    Record(TubeRecord),
    Truncated(Truncation),
}

impl From<&TubeEntry> for TubeRecord {
    fn from(e: &TubeEntry) -> Self {
        TubeRecord {
            n: e.step,
            t: e.t,
            center: e.set.center.to_blocks(),
            theta_lower: e.set.tangent.lower().0,
            theta_upper: e.set.tangent.upper().0,
            recentered: e.recentered,
            monotone_check: e.monotone_check,
        }
    }
}

fn model_of(blocks: &[Vec<f64>]) -> Result<GroupModel> {
    match blocks {
        [b] if b.len() == 9 => Ok(GroupModel::So3),
        bs if !bs.is_empty() && bs.iter().all(|b| b.len() == 4) => Ok(GroupModel::Torus { factors: bs.len() }),
        _ => Err(ReachError::Parse("center blocks match no supported group".into())),
    }
}

impl TubeRecord {
    pub fn to_entry(&self) -> Result<TubeEntry> {
        let model = model_of(&self.center)?;
        let center = GroupElement::from_blocks(model, &self.center)?;
        let set = ExpTangentInterval::new(center, TangentInterval::new(&self.theta_lower, &self.theta_upper)?)?;
        Ok(TubeEntry { step: self.n, t: self.t, set, recentered: self.recentered, monotone_check: self.monotone_check })
    }
}

/// Writes `tube`, followed by a truncation marker when `truncated` is given.
pub fn write_tube<W: Write>(mut w: W, tube: &ReachTube, truncated: Option<&Truncation>) -> Result<()> {
    let enc = |e: serde_json::Error| ReachError::Io(e.to_string());
    for e in &tube.entries {
        serde_json::to_writer(&mut w, &TubeRecord::from(e)).map_err(enc)?;
        w.write_all(b"\n")?;
    }
    if let Some(t) = truncated {
        serde_json::to_writer(&mut w, t).map_err(enc)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a tube file; the truncation marker, if present, is returned alongside.
pub fn read_tube<R: BufRead>(r: R) -> Result<(ReachTube, Option<Truncation>)> {
    let mut entries = Vec::new();
    let mut trunc = None;
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if trunc.is_some() {
            return Err(ReachError::Parse(format!("line {}: data after truncation marker", i + 1)));
        }
        match serde_json::from_str::<Line>(&line).map_err(|e| ReachError::Parse(format!("line {}: {e}", i + 1)))? {
            Line::Record(rec) => {
                if rec.n != entries.len() {
                    return Err(ReachError::Parse(format!("line {}: expected record {}, got {}", i + 1, entries.len(), rec.n)));
                }
                entries.push(rec.to_entry()?);
            }
            Line::Truncated(t) => trunc = Some(t),
        }
    }
    Ok((ReachTube { entries }, trunc))
}
