//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use liereach::config::ExperimentConfig;
use liereach::group::GroupModel;
use liereach::interval::{iv_contains, IntervalVector, DEFAULT_SLACK};
use liereach::reach::{rkmk_reach, ReachTube};
use liereach::series::{bch, dexpinv, interval_bch, interval_dexpinv, TruncationOrder};
use liereach::systems::{So3Attitude, TorusConsensus};
use liereach::tube_io::read_tube;
use liereach::validation::{mc_validate, reference_integrate, self_convergence_order, Checkpoints, ValidationConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn load(name: &str) -> liereach::config::Experiment {
    ExperimentConfig::load(&config_path(name)).unwrap().build().unwrap()
}

fn full_run(name: &str) -> Result<ReachTube, String> {
    let exp = load(name);
    rkmk_reach(&exp.system, &exp.reach, &exp.init).map_err(|a| {
        format!("run stopped at step {} (t = {:.2} s): {}", a.step, a.step as f64 * exp.reach.h, a.error)
    })
}

fn torus_containment() -> Outcome {
    let exp = load("torus.toml");
    let tube = full_run("torus.toml")?;
    let vc = ValidationConfig {
        meshgrid: None,
        uniform: 500,
        seed: exp.validation.seed,
        checkpoints: Checkpoints::Count(10),
        slack: 1e-6,
        substeps: 10,
    };
    let rep = mc_validate(&exp.system, &tube, exp.reach.h, &vc).map_err(|e| e.to_string())?;
    let min = rep.containment.iter().cloned().fold(1.0, f64::min);
    let detail = format!(
        "{} samples, {} checkpoints, min fraction {min}, worst margin {:e}",
        rep.samples,
        rep.checkpoints.len(),
        rep.worst_margin
    );
    if rep.checkpoints.len() == 10 && rep.all_contained() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn torus_width_law() -> Outcome {
    let tube = full_run("torus.toml")?;
    let mut worst_sum = 0.0f64;
    for e in &tube.entries {
        let w = e.set.tangent.widths();
        worst_sum = worst_sum.max((w[0] + w[1] - 1.4).abs());
    }
    let w = tube.last().unwrap().set.tangent.widths();
    let e6 = (-6.0f64).exp();
    let (w1, w2) = (0.7 + 0.5 * e6, 0.7 - 0.5 * e6);
    let err = (w[0] - w1).abs().max((w[1] - w2).abs());
    let detail = format!("max |w1+w2-1.4| = {worst_sum:e}; final ({:.6}, {:.6}) vs ({w1:.6}, {w2:.6})", w[0], w[1]);
    if tube.len() == 301 && worst_sum <= 1e-6 && err <= 1e-4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn torus_monotone_guard() -> Outcome {
    let tube = full_run("torus.toml")?;
    let passed = tube.entries[1..].iter().filter(|e| e.monotone_check == Some(true)).count();
    let detail = format!("{passed} of {} steps passed the check", tube.len() - 1);
    if tube.len() == 301 && passed == 300 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn so3_containment() -> Outcome {
    let exp = load("so3.toml");
    let (tube, stopped) = match rkmk_reach(&exp.system, &exp.reach, &exp.init) {
        Ok(t) => (t, None),
        Err(a) => {
            let note = format!("run stopped at step {} (t = {:.2} s): {}", a.step, a.step as f64 * exp.reach.h, a.error);
            (a.tube, Some(note))
        }
    };
    let vc = ValidationConfig { meshgrid: Some(7), uniform: 200, slack: 1e-6, ..exp.validation };
    let rep = mc_validate(&exp.system, &tube, exp.reach.h, &vc).map_err(|e| e.to_string())?;
    let final_w = tube.last().unwrap().set.tangent.widths();
    let detail = format!(
        "{} samples over {} of 501 entries, all contained: {}, worst margin {:e}, last widths {:.3?}",
        rep.samples,
        tube.len(),
        rep.all_contained(),
        rep.worst_margin,
        final_w
    );
    match stopped {
        Some(note) => Err(format!("{note}; {detail}")),
        None if rep.all_contained() => Ok(detail),
        None => Err(detail),
    }
}

fn so3_never_fails_early() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_reach");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let tube = dir.path().join("never.jsonl");
    let report = dir.path().join("never.json");
    let cfg = config_path("so3_never.toml");
    let run = Command::new(bin).args(["run", "--config"]).arg(&cfg).arg("--out").arg(&tube).output().unwrap();
    let val = Command::new(bin)
        .args(["validate", "--tube"])
        .arg(&tube)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    let rep: liereach::validation::ValidationReport =
        serde_json::from_reader(std::fs::File::open(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let (entries, _) = read_tube(std::io::BufReader::new(std::fs::File::open(&tube).unwrap())).unwrap();
    let detail = format!(
        "run exit {:?} ({} records), validate exit {:?}, first violation {:?}",
        run.status.code(),
        entries.len(),
        val.status.code(),
        rep.first_violation.as_ref().map(|v| (v.t, v.margin))
    );
    let early = rep.first_violation.as_ref().is_some_and(|v| v.t > 0.0 && v.t <= 1.0);
    if val.status.code() == Some(3) && early {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn inclusion_soundness() -> Outcome {
    let m = GroupModel::So3;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let rand_center = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..=0.5)).collect();
            if v.iter().map(|x| x * x).sum::<f64>() <= 0.25 {
                return v;
            }
        }
    };
    let mut escapes = 0usize;
    let pairs = 10_000;
    for order in [TruncationOrder::Two, TruncationOrder::Three] {
        for _ in 0..pairs {
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=0.1)).collect();
            let tb = IntervalVector::centered(&rand_center(&mut rng), &w).unwrap();
            let w: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..=0.1)).collect();
            let ab = IntervalVector::centered(&rand_center(&mut rng), &w).unwrap();
            let pt = |rng: &mut ChaCha8Rng, b: &IntervalVector| -> Vec<f64> {
                b.iter().map(|i| rng.random_range(i.lo()..=i.hi())).collect()
            };
            let (th, a) = (pt(&mut rng, &tb), pt(&mut rng, &ab));
            let out = interval_dexpinv(m, &tb, &ab, order).unwrap();
            if !iv_contains(&out, &dexpinv(m, &th, &a, order), DEFAULT_SLACK).unwrap() {
                escapes += 1;
            }
            let c = rand_center(&mut rng);
            let out = interval_bch(m, &c, &tb, order).unwrap();
            if !iv_contains(&out, &bch(m, &c, &th, order), DEFAULT_SLACK).unwrap() {
                escapes += 1;
            }
        }
    }
    let detail = format!("{escapes} escapes over 4 x {pairs} pairs");
    if escapes == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn abelian_exactness() -> Outcome {
    let t = GroupModel::torus2();
    let mut rng = ChaCha8Rng::seed_from_u64(0xabe1);
    let dyadic = |rng: &mut ChaCha8Rng| rng.random_range(-(1i64 << 21)..=(1i64 << 21)) as f64 / (1u64 << 20) as f64;
    let mut mismatches = 0;
    let mut worst_ulps = 0.0f64;
    for _ in 0..10_000 {
        for order in [TruncationOrder::Two, TruncationOrder::Three] {
            let (a, b, c, d) = (dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng));
            let bx = IntervalVector::from_bounds(&[a.min(b), c.min(d)], &[a.max(b), c.max(d)]).unwrap();
            let th = [dyadic(&mut rng), dyadic(&mut rng)];
            let back = interval_bch(t, &[-th[0], -th[1]], &interval_bch(t, &th, &bx, order).unwrap(), order).unwrap();
            if back != bx {
                mismatches += 1;
            }
            let v = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let a_vec = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
            if dexpinv(t, &v, &a_vec, order).0 != a_vec.to_vec() {
                mismatches += 1;
            }
            // arbitrary floats: shifting is exact only up to rounding
            let g = IntervalVector::from_bounds(&[-0.6, -0.1], &[0.6, 0.1]).unwrap();
            let th = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let back = interval_bch(t, &[-th[0], -th[1]], &interval_bch(t, &th, &g, order).unwrap(), order).unwrap();
            for k in 0..2 {
                for (x, y) in [(back[k].lo(), g[k].lo()), (back[k].hi(), g[k].hi())] {
                    worst_ulps = worst_ulps.max((x - y).abs() / f64::EPSILON);
                }
            }
        }
    }
    let detail = format!(
        "{mismatches} mismatches on dyadic boxes and dexpinv; arbitrary-float round trip off by at most {worst_ulps:.0} eps"
    );
    if mismatches == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn geometry() -> Outcome {
    let m = GroupModel::So3;
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e0);
    let mut rt = 0.0f64;
    for _ in 0..1000 {
        let v: Vec<f64> = loop {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
            if v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 3.0 {
                break v;
            }
        };
        let back = m.log(&m.exp(&v).unwrap()).unwrap();
        rt = rt.max(back.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let mut comm = 0.0f64;
    for _ in 0..1000 {
        let u: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let v: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (hu, hv) = (m.hat(&u).unwrap(), m.hat(&v).unwrap());
        let diff = m.hat(&m.bracket(&u, &v)).unwrap() - (&hu * &hv - &hv * &hu);
        comm = comm.max(diff.amax());
    }
    // drift over every center the case-study runs produce, and over reference trajectories
    let mut drift = 0.0f64;
    let mut min_det = f64::INFINITY;
    for name in ["torus.toml", "so3.toml", "so3_never.toml"] {
        let exp = load(name);
        let tube = match rkmk_reach(&exp.system, &exp.reach, &exp.init) {
            Ok(t) => t,
            Err(a) => a.tube,
        };
        for e in &tube.entries {
            drift = drift.max(e.set.center.orthogonality_drift());
            min_det = min_det.min(e.set.center.min_determinant());
        }
    }
    let so3 = So3Attitude::default();
    let traj = reference_integrate(&so3, &m.identity(), |_, t| So3Attitude::nominal(t).to_vec(), 5000, 0.001).unwrap();
    drift = drift.max(traj.last().unwrap().orthogonality_drift());
    let so3_order =
        self_convergence_order(&so3, &m.identity(), |t| So3Attitude::nominal(t).to_vec(), 5.0, 0.1).unwrap();
    let torus = TorusConsensus { omega: [5.0, 2.0] };
    let x0 = GroupModel::torus2().exp(&[PI / 2.0 + 0.3, PI - 0.05]).unwrap();
    let torus_order = self_convergence_order(&torus, &x0, |_| Vec::new(), 3.0, 0.1).unwrap();
    let detail = format!(
        "round trip {rt:e}, commutator {comm:e}, drift {drift:e} (min det {min_det:.12}), orders so3 {so3_order:.2} torus {torus_order:.2}"
    );
    if rt <= 1e-10 && comm <= 1e-12 && drift <= 1e-9 && min_det > 0.0 && so3_order >= 3.5 && torus_order >= 3.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timing() -> Outcome {
    let mut lines = Vec::new();
    for (name, reference) in [("torus.toml", 0.039), ("so3.toml", 0.438)] {
        let exp = load(name);
        let mut times = Vec::new();
        for _ in 0..10 {
            let s = Instant::now();
            let _ = rkmk_reach(&exp.system, &exp.reach, &exp.init);
            times.push(s.elapsed().as_secs_f64());
        }
        let mean = times.iter().sum::<f64>() / times.len() as f64;
        let ratio = mean / reference;
        let within = (0.01..=100.0).contains(&ratio);
        lines.push(format!("{name} mean {mean:.4} s ({ratio:.3}x reference, within 100x: {within})"));
    }
    // informational only
    Ok(lines.join("; "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("torus containment", torus_containment),
        ("torus width law", torus_width_law),
        ("torus monotonicity guard", torus_monotone_guard),
        ("so3 containment with recentering to T=5", so3_containment),
        ("so3 recenter=never fails by t=1.0", so3_never_fails_early),
        ("inclusion soundness", inclusion_soundness),
        ("abelian exactness", abelian_exactness),
        ("geometry", geometry),
        ("timing (informational)", timing),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS  {name} [{secs:.1} s]: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1} s]: {d}");
            }
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
