//! Seeded batch evaluation over the benchmark grid
//! {sparse, medium, dense} × {slow, fast} × {leader-follow, orbit-flight}.
//!
//! Trials are independent and fan out across a bounded worker pool; each
//! worker owns its trial end-to-end and results are merged by cell index, so
//! aggregation is order-independent and the table is reproducible for a
//! fixed base seed regardless of parallelism.

use crate::math::Vec3;
use crate::sim::scenario::{RandomObstacleSpec, ScenarioSpec};
use crate::sim::trial::run_trial;
use crate::sim::ugv::UgvProgram;
use crate::sim::world::TaskSpec;
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Obstacle-count tier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Sparse,
    Medium,
    Dense,
}

impl Density {
    pub const ALL: [Density; 3] = [Density::Sparse, Density::Medium, Density::Dense];
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Density::Sparse => "sparse",
            Density::Medium => "medium",
            Density::Dense => "dense",
        })
    }
}

/// UGV aggressiveness tier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedProfile {
    Slow,
    Fast,
}

impl SpeedProfile {
    pub const ALL: [SpeedProfile; 2] = [SpeedProfile::Slow, SpeedProfile::Fast];

    /// `(v_max, omega_max)` limits of the random-goal driver.
    pub fn limits(&self) -> (f64, f64) {
        match self {
            SpeedProfile::Slow => (0.5, 0.5),
            SpeedProfile::Fast => (1.5, 1.5),
        }
    }
}

impl fmt::Display for SpeedProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeedProfile::Slow => "slow",
            SpeedProfile::Fast => "fast",
        })
    }
}

/// Benchmark task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchTask {
    LeaderFollow,
    OrbitFlight,
}

impl BatchTask {
    pub const ALL: [BatchTask; 2] = [BatchTask::LeaderFollow, BatchTask::OrbitFlight];

    pub fn spec(&self) -> TaskSpec {
        match self {
            BatchTask::LeaderFollow => TaskSpec::LeaderFollow {
                offset: Vec3::new(1.0, 0.0, 0.5),
            },
            BatchTask::OrbitFlight => TaskSpec::Orbit {
                radius: 1.0,
                omega: 0.5,
                center: Vec3::new(1.0, 0.0, 0.5),
            },
        }
    }
}

impl fmt::Display for BatchTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BatchTask::LeaderFollow => "LF",
            BatchTask::OrbitFlight => "OF",
        })
    }
}

/// Batch controls.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BatchConfig {
    /// Trials per grid cell; the same seeds are reused across cells so that
    /// comparisons between cells are paired.
    pub trials: usize,
    pub base_seed: u64,
    /// Obstacle counts for sparse / medium / dense.
    pub density_counts: [usize; 3],
    /// Worker threads; `None` uses all cores, `Some(1)` forces sequential.
    pub threads: Option<usize>,
}

impl Default for BatchConfig {
    fn default() -> Self {
        Self {
            trials: 50,
            base_seed: 1,
            density_counts: [8, 14, 20],
            threads: None,
        }
    }
}

/// Aggregated outcome of one grid cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellResult {
    pub task: BatchTask,
    pub density: Density,
    pub speed: SpeedProfile,
    pub trials: usize,
    pub successes: usize,
    /// Trials aborted by an error (counted as failures in the rate).
    pub errors: usize,
    pub success_rate: f64,
    pub mean_min_clearance: f64,
}

/// Success-rate table over the full grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchTable {
    pub schema_version: u32,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub density_counts: [usize; 3],
    pub cells: Vec<CellResult>,
}

impl BatchTable {
    pub fn cell(&self, task: BatchTask, density: Density, speed: SpeedProfile) -> &CellResult {
        self.cells
            .iter()
            .find(|c| c.task == task && c.density == density && c.speed == speed)
            .expect("full grid")
    }

    /// CSV in the benchmark-table layout: one row per task × density, one
    /// success-rate column per UGV speed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task,density,slow_success_rate,fast_success_rate\n");
        for task in BatchTask::ALL {
            for density in Density::ALL {
                let slow = self.cell(task, density, SpeedProfile::Slow);
                let fast = self.cell(task, density, SpeedProfile::Fast);
                out.push_str(&format!(
                    "{task},{density},{:.3},{:.3}\n",
                    slow.success_rate, fast.success_rate
                ));
            }
        }
        out
    }
}

/// Desk-scale batch template: a 12 × 9 × 3 m map, random-goal UGV, and the
/// benchmark sensor model. Task, obstacle count, and UGV limits are filled
/// per cell by [`run_batch`].
pub fn desk_template() -> ScenarioSpec {
    let json = r#"{
        "name": "desk-batch",
        "map": {"bounds_min": [-6.0, -4.5, 0.0], "bounds_max": [6.0, 4.5, 3.0]},
        "ugv": {"start": [0.0, 0.0, 0.0], "program": {"type": "static"}},
        "task": {"type": "leader_follow", "offset": [1.0, 0.0, 0.5]},
        "duration": 20.0
    }"#;
    ScenarioSpec::from_json(json).expect("desk template is valid")
}

/// Scenario for one cell and trial index.
pub fn cell_scenario(
    template: &ScenarioSpec,
    task: BatchTask,
    density: Density,
    speed: SpeedProfile,
    cfg: &BatchConfig,
    trial: usize,
) -> ScenarioSpec {
    let mut spec = template.clone();
    let (v_max, omega_max) = speed.limits();
    let margin = 1.0;
    spec.task = task.spec();
    spec.uav_start = None;
    spec.ugv.program = UgvProgram::RandomGoals {
        bounds_min: [
            spec.map.bounds_min.x + margin,
            spec.map.bounds_min.y + margin,
        ],
        bounds_max: [
            spec.map.bounds_max.x - margin,
            spec.map.bounds_max.y - margin,
        ],
        v_max,
        omega_max,
    };
    let count = match density {
        Density::Sparse => cfg.density_counts[0],
        Density::Medium => cfg.density_counts[1],
        Density::Dense => cfg.density_counts[2],
    };
    spec.obstacles.random = Some(RandomObstacleSpec {
        count,
        ..spec.obstacles.random.unwrap_or_default()
    });
    spec.seed = cfg.base_seed.wrapping_add(trial as u64);
    spec
}

/// Runs the full grid and aggregates per-cell success rates.
pub fn run_batch(template: &ScenarioSpec, cfg: &BatchConfig) -> Result<BatchTable> {
    template.validate()?;
    let mut jobs = Vec::new();
    for task in BatchTask::ALL {
        for density in Density::ALL {
            for speed in SpeedProfile::ALL {
                for trial in 0..cfg.trials {
                    jobs.push((task, density, speed, trial));
                }
            }
        }
    }

    let run_job = |&(task, density, speed, trial): &(BatchTask, Density, SpeedProfile, usize)| {
        let spec = cell_scenario(template, task, density, speed, cfg, trial);
        run_trial(&spec).map(|mut m| {
            m.trace.clear();
            m
        })
    };

    let outcomes: Vec<Result<crate::sim::trial::TrialMetrics>> = match cfg.threads {
        Some(1) => jobs.iter().map(run_job).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("worker pool")
            .install(|| jobs.par_iter().map(run_job).collect()),
        None => jobs.par_iter().map(run_job).collect(),
    };

    let mut cells = Vec::new();
    for task in BatchTask::ALL {
        for density in Density::ALL {
            for speed in SpeedProfile::ALL {
                let mut successes = 0;
                let mut errors = 0;
                let mut clearance_sum = 0.0;
                let mut clearance_count = 0;
                for (job, outcome) in jobs.iter().zip(&outcomes) {
                    if (job.0, job.1, job.2) != (task, density, speed) {
                        continue;
                    }
                    match outcome {
                        Ok(m) => {
                            if m.success {
                                successes += 1;
                            }
                            if let Some(c) = m.min_clearance {
                                clearance_sum += c;
                                clearance_count += 1;
                            }
                        }
                        Err(_) => errors += 1,
                    }
                }
                cells.push(CellResult {
                    task,
                    density,
                    speed,
                    trials: cfg.trials,
                    successes,
                    errors,
                    success_rate: successes as f64 / cfg.trials.max(1) as f64,
                    mean_min_clearance: if clearance_count > 0 {
                        clearance_sum / clearance_count as f64
                    } else {
                        f64::NAN
                    },
                });
            }
        }
    }

    Ok(BatchTable {
        schema_version: 1,
        trials_per_cell: cfg.trials,
        base_seed: cfg.base_seed,
        density_counts: cfg.density_counts,
        cells,
    })
}
