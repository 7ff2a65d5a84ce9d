//! Command-line front end: single trials, batch tables, kernel
//! micro-benchmarks, and scenario validation.
//!
//! Exit codes: 0 on success, 2 when a trial ran but failed its success
//! criterion, 1 on any error (bad arguments, schema violations, I/O).

use crate::dynamics::NonInertialQuantities;
use crate::math::Vec3;
use crate::modulation::{ModulationParams, SampleCloud};
use crate::mpc::{self, MpcConfig};
use crate::sim::batch::{desk_template, run_batch, BatchConfig};
use crate::sim::scenario::ScenarioSpec;
use crate::sim::trial::{run_trial, TrialMetrics};
use crate::trajectory::{gen_trajectory, TrajectoryParams};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_TRIAL_FAILED: i32 = 2;

/// Reactive obstacle avoidance for a quadrotor in a ground vehicle's body
/// frame: simulation trials, batch evaluation, and benchmarks.
#[derive(Parser, Debug)]
#[command(name = "coni-oa", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a single closed-loop trial and write trace.csv + summary.json.
    Run(RunArgs),
    /// Run the seeded success-rate grid and write batch.csv + batch.json.
    Batch(BatchArgs),
    /// Micro-benchmark the trajectory generator and the tracker solve.
    Bench(BenchArgs),
    /// Parse and validate a scenario file without running it.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (created if absent).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
    /// Dotted-path scenario overrides, e.g. `duration=10` or
    /// `ugv.program.omega=0.7` (repeatable).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Print per-trial details.
    #[arg(short, long)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct BatchArgs {
    /// Template scenario; the built-in desk-scale template when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Trials per grid cell.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Base seed; trial i uses seed base + i in every cell.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub parallel: Option<usize>,
    /// Force one worker (equivalent to --parallel 1).
    #[arg(long)]
    pub single_thread: bool,
    /// Obstacle counts for sparse,medium,dense.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [8usize, 14, 20])]
    pub density_counts: Vec<usize>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Synthetic cloud size for the planner benchmark.
    #[arg(long, default_value_t = 4000)]
    pub points: usize,
    /// Trajectory length.
    #[arg(long, default_value_t = 20)]
    pub horizon: usize,
    /// Timed repetitions per kernel.
    #[arg(long, default_value_t = 50)]
    pub repeats: usize,
    /// Also write bench.json here (stdout only when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    pub scenario: PathBuf,
}

/// Entry point used by the binary; maps every command to its exit code.
pub fn dispatch(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(&args),
        Command::Batch(args) => cmd_batch(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Applies `key=value` overrides onto the scenario JSON tree before parsing.
fn apply_overrides(text: &str, overrides: &[String]) -> Result<String> {
    if overrides.is_empty() {
        return Ok(text.to_string());
    }
    let mut tree: serde_json::Value = serde_json::from_str(text)?;
    for entry in overrides {
        let (path, raw_value) = entry.split_once('=').ok_or_else(|| {
            Error::InvalidArgument(format!("override `{entry}` must look like key=value"))
        })?;
        let value = serde_json::from_str(raw_value)
            .unwrap_or_else(|_| serde_json::Value::String(raw_value.to_string()));
        let mut node = &mut tree;
        let segments: Vec<&str> = path.split('.').collect();
        for (i, segment) in segments.iter().enumerate() {
            let last = i + 1 == segments.len();
            match segment.parse::<usize>() {
                Ok(index) => {
                    let arr = node.as_array_mut().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "override `{path}`: `{segment}` is not an array index here"
                        ))
                    })?;
                    if index >= arr.len() {
                        return Err(Error::InvalidArgument(format!(
                            "override `{path}`: index {index} out of bounds"
                        )));
                    }
                    if last {
                        arr[index] = value.clone();
                        break;
                    }
                    node = &mut arr[index];
                }
                Err(_) => {
                    let obj = node.as_object_mut().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "override `{path}`: `{segment}` is not an object here"
                        ))
                    })?;
                    if last {
                        obj.insert(segment.to_string(), value.clone());
                        break;
                    }
                    node = obj
                        .entry(segment.to_string())
                        .or_insert(serde_json::json!({}));
                }
            }
        }
    }
    Ok(serde_json::to_string(&tree)?)
}

fn load_scenario(path: &Path, overrides: &[String], seed: Option<u64>) -> Result<ScenarioSpec> {
    let text = std::fs::read_to_string(path)?;
    let text = apply_overrides(&text, overrides)?;
    let mut spec = ScenarioSpec::from_json(&text)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn prepare_output(dir: &Path, files: &[&str], force: bool) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if !force {
        for f in files {
            let p = dir.join(f);
            if p.exists() {
                return Err(Error::OutputExists(p.display().to_string()));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TrialSummary<'a> {
    schema_version: u32,
    success: bool,
    exit_code: i32,
    metrics: &'a TrialMetrics,
    scenario: &'a ScenarioSpec,
}

fn write_trace_csv(path: &Path, metrics: &TrialMetrics) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in &metrics.trace {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<i32> {
    let spec = load_scenario(&args.scenario, &args.overrides, args.seed)?;
    prepare_output(&args.out, &["trace.csv", "summary.json"], args.force)?;
    let metrics = run_trial(&spec)?;
    let exit_code = if metrics.success {
        EXIT_OK
    } else {
        EXIT_TRIAL_FAILED
    };
    write_trace_csv(&args.out.join("trace.csv"), &metrics)?;
    let summary = TrialSummary {
        schema_version: 1,
        success: metrics.success,
        exit_code,
        metrics: &metrics,
        scenario: &spec,
    };
    std::fs::write(
        args.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    if args.verbose {
        println!(
            "success={} clearance={:?} rmse={:.4} goal_reached={} plan {:.2}/{:.2} ms solve {:.2}/{:.2} ms",
            metrics.success,
            metrics.min_clearance,
            metrics.tracking_rmse,
            metrics.goal_reached,
            1e3 * metrics.mean_plan_time,
            1e3 * metrics.max_plan_time,
            1e3 * metrics.mean_solve_time,
            1e3 * metrics.max_solve_time,
        );
    } else {
        println!(
            "trial {}: wrote {}",
            if metrics.success { "succeeded" } else { "FAILED" },
            args.out.display()
        );
    }
    Ok(exit_code)
}

pub fn cmd_batch(args: &BatchArgs) -> Result<i32> {
    let template = match &args.scenario {
        Some(path) => load_scenario(path, &args.overrides, None)?,
        None => {
            let text = serde_json::to_string(&desk_template())?;
            ScenarioSpec::from_json(&apply_overrides(&text, &args.overrides)?)?
        }
    };
    prepare_output(&args.out, &["batch.csv", "batch.json"], args.force)?;
    let cfg = BatchConfig {
        trials: args.trials,
        base_seed: args.seed,
        density_counts: [
            args.density_counts[0],
            args.density_counts[1],
            args.density_counts[2],
        ],
        threads: if args.single_thread {
            Some(1)
        } else {
            args.parallel
        },
    };
    let table = run_batch(&template, &cfg)?;
    std::fs::write(args.out.join("batch.csv"), table.to_csv())?;
    std::fs::write(
        args.out.join("batch.json"),
        serde_json::to_string_pretty(&table)?,
    )?;
    print!("{}", table.to_csv());
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct BenchReport {
    schema_version: u32,
    points: usize,
    horizon: usize,
    repeats: usize,
    plan_mean_ms: f64,
    plan_p95_ms: f64,
    plan_small_mean_ms: f64,
    /// plan_mean / plan_small_mean, for the ×10 point-count ratio.
    plan_scaling_ratio: f64,
    solve_mean_ms: f64,
    solve_p95_ms: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

fn p95(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[((sorted.len() as f64 * 0.95) as usize).min(sorted.len().saturating_sub(1))]
}

/// Synthetic cloud: points on a shell 1.5–6 m from the origin.
pub fn synthetic_cloud(n: usize, seed: u64) -> SampleCloud {
    let mut rng = StdRng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let dir = Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let dir = if dir.norm() < 1e-9 {
                Vec3::x()
            } else {
                dir.normalize()
            };
            dir * rng.gen_range(1.5..6.0)
        })
        .collect();
    SampleCloud::new(points, 0.05)
}

/// Times `gen_trajectory` on an `n`-point cloud; returns per-call seconds.
pub fn time_plan(points: usize, horizon: usize, repeats: usize) -> Vec<f64> {
    let cloud = synthetic_cloud(points, 7);
    let params = TrajectoryParams {
        horizon,
        ..Default::default()
    };
    let mod_params = ModulationParams::default();
    let n = NonInertialQuantities::degenerate();
    let goal = Vec3::new(4.0, 1.0, 1.0);
    let mut times = Vec::with_capacity(repeats);
    for i in 0..repeats {
        let start = Vec3::new(0.0, -0.2 + 1e-4 * i as f64, 0.5);
        let t0 = Instant::now();
        let traj = gen_trajectory(&start, &cloud, &n, &goal, &params, &mod_params);
        times.push(t0.elapsed().as_secs_f64());
        assert_eq!(traj.len(), horizon);
    }
    times
}

/// Times the tracker solve on a representative offset state, warm-started
/// the way the closed loop runs it.
pub fn time_solve(repeats: usize) -> Vec<f64> {
    use crate::dynamics::RelativeState;
    use crate::math::UnitQuat;
    let cfg = MpcConfig::default();
    let n = NonInertialQuantities::new(
        Vec3::new(0.0, 0.0, crate::GRAVITY),
        Vec3::new(0.0, 0.0, 0.5),
        Vec3::zeros(),
    );
    let traj = gen_trajectory(
        &Vec3::new(0.0, 0.0, 0.5),
        &SampleCloud::empty(),
        &n,
        &Vec3::new(1.0, 0.0, 0.5),
        &TrajectoryParams::default(),
        &ModulationParams::default(),
    );
    let mut times = Vec::with_capacity(repeats);
    let mut warm = None;
    for i in 0..repeats {
        let x0 = RelativeState::new(
            Vec3::new(-0.3, 0.2 + 1e-4 * i as f64, 0.6),
            Vec3::zeros(),
            UnitQuat::identity(),
        );
        let t0 = Instant::now();
        let sol = mpc::solve(&x0, &traj, &n, &cfg, warm.as_ref());
        times.push(t0.elapsed().as_secs_f64());
        warm = Some(sol);
    }
    times
}

pub fn cmd_bench(args: &BenchArgs) -> Result<i32> {
    let plan_times = time_plan(args.points, args.horizon, args.repeats);
    let small_points = (args.points / 10).max(1);
    let plan_small_times = time_plan(small_points, args.horizon, args.repeats);
    let solve_times = time_solve(args.repeats.max(2));

    let report = BenchReport {
        schema_version: 1,
        points: args.points,
        horizon: args.horizon,
        repeats: args.repeats,
        plan_mean_ms: 1e3 * mean(&plan_times),
        plan_p95_ms: 1e3 * p95(&plan_times),
        plan_small_mean_ms: 1e3 * mean(&plan_small_times),
        plan_scaling_ratio: mean(&plan_times) / mean(&plan_small_times),
        solve_mean_ms: 1e3 * mean(&solve_times),
        solve_p95_ms: 1e3 * p95(&solve_times),
    };
    let json = serde_json::to_string_pretty(&report)?;
    println!("{json}");
    if let Some(dir) = &args.out {
        prepare_output(dir, &["bench.json"], args.force)?;
        std::fs::write(dir.join("bench.json"), json)?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<i32> {
    let spec = ScenarioSpec::from_path(&args.scenario)?;
    println!(
        "ok: scenario `{}` (schema v{}) is valid",
        if spec.name.is_empty() {
            "<unnamed>"
        } else {
            &spec.name
        },
        spec.version
    );
    Ok(EXIT_OK)
}
