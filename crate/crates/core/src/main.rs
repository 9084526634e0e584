use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use liereach::config::ExperimentConfig;
use liereach::reach::rkmk_reach;
use liereach::tube_io::{read_tube, write_tube, Truncation};
use liereach::validation::mc_validate;
use liereach::ReachError;

const EXIT_ABORT: u8 = 2;
const EXIT_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "reach", version, about = "Interval reachability on matrix Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a reach tube and write it as line-delimited JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check Monte-Carlo trajectories against a tube.
    Validate {
        #[arg(long)]
        tube: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Uniform samples (added to any meshgrid set in the config).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time repeated runs.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u32).range(3..))]
        repeats: u32,
    },
}

fn create(path: &Path) -> Result<BufWriter<File>, ReachError> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(config: &Path, out: &Path) -> Result<ExitCode, ReachError> {
    let exp = ExperimentConfig::load(config)?.build()?;
    match rkmk_reach(&exp.system, &exp.reach, &exp.init) {
        Ok(tube) => {
            write_tube(create(out)?, &tube, None)?;
            log::info!("wrote {} records to {}", tube.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Err(aborted) => {
            let marker = Truncation { truncated: true, step: aborted.step, error: aborted.error.to_string() };
            write_tube(create(out)?, &aborted.tube, Some(&marker))?;
            eprintln!("{aborted}");
            Ok(ExitCode::from(EXIT_ABORT))
        }
    }
}

fn validate(tube: &Path, config: &Path, samples: Option<usize>, seed: Option<u64>, out: &Path) -> Result<ExitCode, ReachError> {
    let exp = ExperimentConfig::load(config)?.build()?;
    let (tube, trunc) = read_tube(BufReader::new(File::open(tube)?))?;
    if let Some(t) = &trunc {
        log::warn!("tube is truncated at step {}: {}", t.step, t.error);
    }
    let mut vc = exp.validation;
    if let Some(s) = samples {
        vc.uniform = s;
    }
    if let Some(s) = seed {
        vc.seed = s;
    }
    let report = mc_validate(&exp.system, &tube, exp.reach.h, &vc)?;
    serde_json::to_writer_pretty(create(out)?, &report).map_err(|e| ReachError::Io(e.to_string()))?;
    match &report.first_violation {
        None if report.all_contained() => {
            println!("all {} samples contained at {} checkpoints", report.samples, report.checkpoints.len());
            Ok(ExitCode::SUCCESS)
        }
        v => {
            if let Some(v) = v {
                println!("first violation at t = {} (step {}, sample {}, margin {:e})", v.t, v.step, v.sample, v.margin);
            }
            Ok(ExitCode::from(EXIT_VIOLATION))
        }
    }
}

fn bench(config: &Path, repeats: u32) -> Result<ExitCode, ReachError> {
    let exp = ExperimentConfig::load(config)?.build()?;
    let mut times = Vec::with_capacity(repeats as usize);
    let mut aborted = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let res = rkmk_reach(&exp.system, &exp.reach, &exp.init);
        times.push(start.elapsed().as_secs_f64());
        if let Err(a) = res {
            aborted = Some(a.step);
        }
    }
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let std = (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let min = times.iter().cloned().fold(f64::INFINITY, f64::min);
    println!("repeats {repeats}: mean {mean:.6} s, std {std:.6} s, min {min:.6} s");
    if let Some(step) = aborted {
        println!("note: every run stopped early at step {step}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("REACH_LOG", "warn")).init();
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Validate { tube, config, samples, seed, out } => validate(tube, config, *samples, *seed, out),
        Command::Bench { config, repeats } => bench(config, *repeats),
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::FAILURE
    })
}
