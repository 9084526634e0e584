//! Monte-Carlo containment checks against an independent reference integrator.
//!
//! Trajectories are integrated on the group with a classical RK4 in canonical
//! coordinates that are reset every step, using the exact `dexp⁻¹`. None of
//! the engine's truncated series or interval code is involved.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ReachError, Result};
use crate::group::{cross, GroupElement, GroupModel};
use crate::interval::{escape_margin, IntervalVector};
use crate::reach::{ReachTube, SystemModel};
use crate::tangent::ExpTangentInterval;

/// Exact left-trivialized `dexp⁻¹_Θ(A)`.
///
/// On SO(3): `A + ½ Θ×A + ((1 - (θ/2)cot(θ/2)) / θ²) Θ×(Θ×A)`.
pub fn exact_dexpinv(model: GroupModel, theta: &[f64], a: &[f64]) -> Vec<f64> {
    if model.is_abelian() {
        return a.to_vec();
    }
    let t2: f64 = theta.iter().map(|x| x * x).sum();
    let coef = if t2 < 1e-6 {
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let t = t2.sqrt();
        (1.0 - 0.5 * t / (0.5 * t).tan()) / t2
    };
    let ta = cross(theta, a);
    let tta = cross(theta, &ta);
    (0..3).map(|i| a[i] + 0.5 * ta[i] + coef * tta[i]).collect()
}

fn axpy(base: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    base.iter().zip(x).map(|(b, xi)| b + a * xi).collect()
}

/// One RK4 step of `ẋ = x A(x, u(t))` from `x` at time `t`.
pub fn reference_step<S, U>(system: &S, x: &GroupElement, t: f64, h: f64, u: &U) -> Result<GroupElement>
where
    S: SystemModel + ?Sized,
    U: Fn(f64) -> Vec<f64>,
{
    let model = system.group();
    let n = model.dim();
    let zero = vec![0.0; n];
    let field = |theta: &[f64], tau: f64| -> Result<Vec<f64>> {
        let a = system.dynamics(&x.compose(&model.exp(theta)?)?, &u(tau))?;
        Ok(exact_dexpinv(model, theta, &a))
    };
    let k1 = field(&zero, t)?;
    let k2 = field(&axpy(&zero, 0.5 * h, &k1), t + 0.5 * h)?;
    let k3 = field(&axpy(&zero, 0.5 * h, &k2), t + 0.5 * h)?;
    let k4 = field(&axpy(&zero, h, &k3), t + h)?;
    let theta: Vec<f64> = (0..n).map(|i| h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    x.compose(&model.exp(&theta)?)
}

/// Integrates from `x0` over `steps` steps of size `h_ref`.
///
/// `u(k, t)` gives the input at time `t` during reference step `k`, so a
/// piecewise-constant signal can be keyed on the step index rather than on
/// floating-point time. Returns `steps + 1` states.
pub fn reference_integrate<S, U>(system: &S, x0: &GroupElement, u: U, steps: usize, h_ref: f64) -> Result<Vec<GroupElement>>
where
    S: SystemModel + ?Sized,
    U: Fn(usize, f64) -> Vec<f64>,
{
    if !(h_ref > 0.0) {
        return Err(ReachError::InvalidConfig(format!("reference step must be positive, got {h_ref}")));
    }
    let mut out = Vec::with_capacity(steps + 1);
    let mut x = x0.clone();
    out.push(x.clone());
    for k in 0..steps {
        x = reference_step(system, &x, k as f64 * h_ref, h_ref, &|t| u(k, t))?;
        out.push(x.clone());
    }
    Ok(out)
}

/// Observed convergence order `log2(|x_h - x_{h/2}| / |x_{h/2} - x_{h/4}|)` at `t_final`.
pub fn self_convergence_order<S, U>(system: &S, x0: &GroupElement, u: U, t_final: f64, h: f64) -> Result<f64>
where
    S: SystemModel + ?Sized,
    U: Fn(f64) -> Vec<f64>,
{
    let run = |div: usize| -> Result<GroupElement> {
        let steps = (t_final / h).round() as usize * div;
        let traj = reference_integrate(system, x0, |_, t| u(t), steps, h / div as f64)?;
        Ok(traj.last().cloned().expect("trajectory is never empty"))
    };
    let (a, b, c) = (run(1)?, run(2)?, run(4)?);
    Ok((a.distance_max(&b) / b.distance_max(&c)).log2())
}

/// How initial states are drawn from the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// `k` evenly spaced values per coordinate, corners included.
    Meshgrid(usize),
    /// `count` uniform draws from a ChaCha stream seeded with `seed`.
    Uniform { count: usize, seed: u64 },
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|j| if j + 1 == k { hi } else { lo + (hi - lo) * j as f64 / (k - 1) as f64 })
        .collect()
}

/// Algebra coordinates of the sample points.
pub fn sample_coordinates(b: &IntervalVector, mode: SampleMode) -> Result<Vec<Vec<f64>>> {
    match mode {
        SampleMode::Meshgrid(k) => {
            if k < 2 {
                return Err(ReachError::InvalidConfig(format!("meshgrid needs k >= 2, got {k}")));
            }
            let axes: Vec<Vec<f64>> = b.iter().map(|i| linspace(i.lo(), i.hi(), k)).collect();
            let mut points = vec![Vec::with_capacity(b.len())];
            for axis in &axes {
                points = points
                    .into_iter()
                    .flat_map(|p| {
                        axis.iter().map(move |&x| {
                            let mut q = p.clone();
                            q.push(x);
                            q
                        })
                    })
                    .collect();
            }
            Ok(points)
        }
        SampleMode::Uniform { count, seed } => {
            if count == 0 {
                return Err(ReachError::InvalidConfig("uniform sampling needs at least one sample".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok((0..count).map(|_| uniform_in(&mut rng, b)).collect())
        }
    }
}

fn uniform_in(rng: &mut ChaCha8Rng, b: &IntervalVector) -> Vec<f64> {
    b.iter()
        .map(|i| if i.is_degenerate() { i.lo() } else { rng.random_range(i.lo()..=i.hi()) })
        .collect()
}

/// States `center * exp(v)` for the sampled coordinates.
pub fn sample_initial(set: &ExpTangentInterval, mode: SampleMode) -> Result<Vec<GroupElement>> {
    sample_coordinates(set.tangent.as_box(), mode)?
        .iter()
        .map(|v| set.element_at(v))
        .collect()
}

/// Outcome of one membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub step: usize,
    pub contained: bool,
    /// Largest componentwise excursion outside the box; infinite when the
    /// logarithm was undefined.
    pub margin: f64,
}

/// Tests `log(center_n⁻¹ x_n) ∈ box_n` at each checkpoint step.
///
/// `trajectory[n]` is the state at tube step `n`.
pub fn containment_check(tube: &ReachTube, trajectory: &[GroupElement], checkpoints: &[usize], slack: f64) -> Vec<Membership> {
    checkpoints
        .iter()
        .map(|&n| {
            let (Some(entry), Some(x)) = (tube.entries.get(n), trajectory.get(n)) else {
                return Membership { step: n, contained: false, margin: f64::INFINITY };
            };
            match entry.set.coordinates_of(x) {
                Ok(v) => {
                    let margin = escape_margin(entry.set.tangent.as_box(), &v);
                    Membership { step: n, contained: margin <= slack, margin }
                }
                Err(e) => {
                    log::warn!("membership test at step {n} failed: {e}");
                    Membership { step: n, contained: false, margin: f64::INFINITY }
                }
            }
        })
        .collect()
}

/// Which tube steps are tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Checkpoints {
    Every,
    /// `count` evenly spaced steps ending at the last entry.
    Count(usize),
}

impl Checkpoints {
    pub fn steps(self, last: usize) -> Vec<usize> {
        match self {
            Checkpoints::Every => (0..=last).collect(),
            Checkpoints::Count(c) if c == 0 || last == 0 => vec![last],
            Checkpoints::Count(c) => {
                let mut v: Vec<usize> = (1..=c).map(|j| (j * last + c / 2) / c).collect();
                v.dedup();
                v
            }
        }
    }
}

/// Sampling plan for [`mc_validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationConfig {
    /// Meshgrid resolution for initial states; each such sample holds one
    /// vertex of the input box for the whole run.
    pub meshgrid: Option<usize>,
    /// Uniform initial states; each such sample redraws its input uniformly
    /// at every tube step.
    pub uniform: usize,
    pub seed: u64,
    pub checkpoints: Checkpoints,
    pub slack: f64,
    /// Reference steps per tube step.
    pub substeps: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            meshgrid: None,
            uniform: 500,
            seed: 0,
            checkpoints: Checkpoints::Every,
            slack: 1e-6,
            substeps: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: f64,
    pub step: usize,
    pub sample: usize,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub checkpoints: Vec<f64>,
    pub containment: Vec<f64>,
    pub first_violation: Option<Violation>,
    /// Largest escape margin seen over all samples and checkpoints.
    pub worst_margin: f64,
    /// Number of tube entries the samples were checked against.
    pub tube_len: usize,
}

impl ValidationReport {
    pub fn all_contained(&self) -> bool {
        self.first_violation.is_none() && self.containment.iter().all(|&f| f == 1.0)
    }
}

/// Input scaling `s ∈ [0, 1]^m`, giving `u = lo(t) + s ⊙ (hi(t) - lo(t))`.
enum InputDraw {
    Constant(Vec<f64>),
    PerStep(Vec<Vec<f64>>),
}

impl InputDraw {
    fn at(&self, n: usize) -> &[f64] {
        match self {
            InputDraw::Constant(s) => s,
            InputDraw::PerStep(v) => &v[n.min(v.len() - 1)],
        }
    }
}

struct Sample {
    id: usize,
    coords: Vec<f64>,
    input: InputDraw,
}

fn sample_rng(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

fn build_samples(init: &IntervalVector, m: usize, steps: usize, cfg: &ValidationConfig) -> Result<Vec<Sample>> {
    let mut out = Vec::new();
    if let Some(k) = cfg.meshgrid {
        for coords in sample_coordinates(init, SampleMode::Meshgrid(k))? {
            let mut rng = sample_rng(cfg.seed, out.len());
            let vertex = (0..m).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
            out.push(Sample { id: out.len(), coords, input: InputDraw::Constant(vertex) });
        }
    }
    for _ in 0..cfg.uniform {
        let mut rng = sample_rng(cfg.seed, out.len());
        let coords = uniform_in(&mut rng, init);
        let per_step = (0..steps.max(1)).map(|_| (0..m).map(|_| rng.random_range(0.0..=1.0)).collect()).collect();
        out.push(Sample { id: out.len(), coords, input: InputDraw::PerStep(per_step) });
    }
    if out.is_empty() {
        return Err(ReachError::InvalidConfig("validation needs at least one sample".into()));
    }
    Ok(out)
}

/// Samples initial states and input signals, integrates them with the
/// reference integrator and checks membership in `tube` at the checkpoints.
///
/// `h` is the tube step. The report is a deterministic function of its inputs.
pub fn mc_validate<S: SystemModel + ?Sized>(
    system: &S,
    tube: &ReachTube,
    h: f64,
    cfg: &ValidationConfig,
) -> Result<ValidationReport> {
    let Some(first) = tube.entries.first() else {
        return Err(ReachError::InvalidConfig("cannot validate an empty tube".into()));
    };
    if cfg.substeps == 0 || !(h > 0.0) {
        return Err(ReachError::InvalidConfig("validation needs h > 0 and at least one substep".into()));
    }
    let last = tube.len() - 1;
    let m = system.control_bounds(0.0).len();
    let samples = build_samples(first.set.tangent.as_box(), m, last, cfg)?;
    let checkpoints = cfg.checkpoints.steps(last);
    let h_ref = h / cfg.substeps as f64;

    let mut hits = vec![0usize; checkpoints.len()];
    let mut first_violation: Option<Violation> = None;
    let mut worst = 0.0f64;
    for s in &samples {
        let x0 = first.set.element_at(&s.coords)?;
        let control = |k: usize, t: f64| -> Vec<f64> {
            let b = system.control_bounds(t);
            let frac = s.input.at(k / cfg.substeps);
            b.iter().zip(frac).map(|(i, f)| i.lo() + f * (i.hi() - i.lo())).collect()
        };
        let fine = reference_integrate(system, &x0, control, last * cfg.substeps, h_ref)?;
        let traj: Vec<GroupElement> = fine.into_iter().step_by(cfg.substeps).collect();
        for (j, r) in containment_check(tube, &traj, &checkpoints, cfg.slack).iter().enumerate() {
            worst = worst.max(r.margin);
            if r.contained {
                hits[j] += 1;
            } else {
                let earlier = first_violation.as_ref().is_none_or(|v| (r.step, s.id) < (v.step, v.sample));
                if earlier {
                    first_violation = Some(Violation { t: r.step as f64 * h, step: r.step, sample: s.id, margin: r.margin });
                }
            }
        }
    }
    Ok(ValidationReport {
        samples: samples.len(),
        seed: cfg.seed,
        checkpoints: checkpoints.iter().map(|&n| n as f64 * h).collect(),
        containment: hits.iter().map(|&c| c as f64 / samples.len() as f64).collect(),
        first_violation,
        worst_margin: worst,
        tube_len: tube.len(),
    })
}
