//! Closed-loop trial execution: fixed-step ground truth, synthetic sensing,
//! planning, tracking, and metric accounting. Fully deterministic for a
//! fixed scenario and seed (wall-clock timing fields aside).

use crate::dynamics::{rk4_raw, ControlInput, NonInertialQuantities};
use crate::math::{UnitQuat, Vec3};
use crate::mpc::{self, MpcSolution};
use crate::sim::obstacles::{min_signed_distance, ObstaclePrimitive};
use crate::sim::scenario::ScenarioSpec;
use crate::sim::sensor::lidar_sample;
use crate::sim::ugv::{UgvSim, UgvState};
use crate::sim::world::{relative_observation, RigidBodyState, TaskSpec, WorldState};
use crate::trajectory::{gen_trajectory, ReferenceTrajectory};
use crate::Result;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::VecDeque;
use std::time::Instant;

/// Goal-attainment threshold, m.
const GOAL_TOLERANCE: f64 = 0.1;
/// Tracking statistics ignore this initial settling window, s.
const TRANSIENT_WINDOW: f64 = 3.0;
/// Landing termination: within this distance of touchdown, m ...
const LAND_POSITION_TOLERANCE: f64 = 0.05;
/// ... at relative speed below this, m/s.
const LAND_SPEED_TOLERANCE: f64 = 0.2;

/// One control-tick snapshot for the trace CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub time: f64,
    pub ugv_x: f64,
    pub ugv_y: f64,
    pub ugv_yaw: f64,
    pub uav_x: f64,
    pub uav_y: f64,
    pub uav_z: f64,
    pub uav_qw: f64,
    pub uav_qx: f64,
    pub uav_qy: f64,
    pub uav_qz: f64,
    pub rel_px: f64,
    pub rel_py: f64,
    pub rel_pz: f64,
    pub rel_vx: f64,
    pub rel_vy: f64,
    pub rel_vz: f64,
    pub ref_px: f64,
    pub ref_py: f64,
    pub ref_pz: f64,
    pub ref_vx: f64,
    pub ref_vy: f64,
    pub ref_vz: f64,
    pub goal_x: f64,
    pub goal_y: f64,
    pub goal_z: f64,
    pub thrust: f64,
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Ground-truth clearance minus robot radius; empty when the map has no
    /// obstacles.
    pub clearance: Option<f64>,
}

/// Outcome of one trial.
///
/// Everything except the wall-clock `*_time` fields is bitwise-reproducible
/// for a fixed scenario and seed; use [`TrialMetrics::same_outcome`] to
/// compare the deterministic payload.
#[derive(Clone, Debug, Serialize)]
pub struct TrialMetrics {
    /// True iff clearance stayed above the threshold for the whole trial and
    /// the state never diverged.
    pub success: bool,
    /// Minimum ground-truth clearance (inflated by the robot radius); `None`
    /// when the map has no obstacles.
    pub min_clearance: Option<f64>,
    /// RMS distance to the task goal after the settling window, m.
    pub tracking_rmse: f64,
    /// True iff the vehicle ended the trial within 0.1 m of the task goal
    /// (for landing tasks: touched down).
    pub goal_reached: bool,
    pub final_goal_distance: f64,
    pub landed: bool,
    /// Simulated seconds actually run (early landing shortens this).
    pub simulated: f64,
    pub mean_plan_time: f64,
    pub max_plan_time: f64,
    pub mean_solve_time: f64,
    pub max_solve_time: f64,
    pub diagnostic: Option<String>,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl TrialMetrics {
    /// Compares the deterministic payload (everything except wall-clock
    /// measurements), bitwise on floats.
    pub fn same_outcome(&self, other: &Self) -> bool {
        fn bits(x: f64) -> u64 {
            x.to_bits()
        }
        self.success == other.success
            && self.min_clearance.map(bits) == other.min_clearance.map(bits)
            && bits(self.tracking_rmse) == bits(other.tracking_rmse)
            && self.goal_reached == other.goal_reached
            && bits(self.final_goal_distance) == bits(other.final_goal_distance)
            && self.landed == other.landed
            && bits(self.simulated) == bits(other.simulated)
            && self.diagnostic == other.diagnostic
            && self.trace == other.trace
    }
}

struct Accumulator {
    min_clearance: f64,
    tracking_sq_sum: f64,
    tracking_count: usize,
    plan_times: Vec<f64>,
    solve_times: Vec<f64>,
}

fn mean_max(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let sum: f64 = values.iter().sum();
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (sum / values.len() as f64, max)
}

/// Deterministic Gaussian via Box-Muller on the trial's measurement RNG.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn measured_quantities(
    truth: &NonInertialQuantities,
    spec: &ScenarioSpec,
    rng: &mut ChaCha8Rng,
) -> NonInertialQuantities {
    let knobs = &spec.knobs;
    if knobs.imu_accel_noise_std == 0.0 && knobs.imu_gyro_noise_std == 0.0 {
        return *truth;
    }
    let noise3 = |rng: &mut ChaCha8Rng, std: f64| {
        Vec3::new(
            std * gaussian(rng),
            std * gaussian(rng),
            std * gaussian(rng),
        )
    };
    NonInertialQuantities::new(
        truth.a_imu + noise3(rng, knobs.imu_accel_noise_std),
        truth.omega_n + noise3(rng, knobs.imu_gyro_noise_std),
        truth.beta_n,
    )
}

/// Runs one closed-loop trial of the full pipeline.
///
/// Ground-truth physics advance at `spec.sim_dt`; the sensor sweeps and the
/// planner replan at the sensor rate; the tracker re-solves at the control
/// rate, applying its first input zero-order-hold. Divergence aborts the
/// trial as a failure with a diagnostic.
pub fn run_trial(spec: &ScenarioSpec) -> Result<TrialMetrics> {
    spec.validate()?;
    let obstacles = spec.build_obstacles();
    run_trial_on(spec, &obstacles)
}

/// Trial with an already-materialized obstacle field (used by the batch
/// runner, which owns field generation).
pub fn run_trial_on(spec: &ScenarioSpec, obstacles: &[ObstaclePrimitive]) -> Result<TrialMetrics> {
    let dt = spec.sim_dt;
    let total_steps = (spec.duration / dt).round() as u64;
    let control_every = ((1.0 / spec.control_rate) / dt).round().max(1.0) as u64;
    let sensor_every = ((1.0 / spec.sensor.rate) / dt).round().max(1.0) as u64;

    let ugv_start = UgvState::at(spec.ugv.start[0], spec.ugv.start[1], spec.ugv.start[2]);
    let mut ugv = UgvSim::new(spec.ugv.program.clone(), ugv_start, spec.seed);
    let mut uav = RigidBodyState {
        position: spec.uav_start_world(),
        velocity: Vec3::zeros(),
        orientation: ugv_start.orientation(),
        body_rate: Vec3::zeros(),
    };
    let mut noise_rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x6e5f_3c2a_9d1b_0047);

    let mut plan: Option<(ReferenceTrajectory, f64)> = None;
    let mut warm: Option<MpcSolution> = None;
    let mut last_window_base: Option<f64> = None;
    let mut applied_input = ControlInput::hover();
    let mut delay_queue: VecDeque<ControlInput> = VecDeque::new();

    let mut acc = Accumulator {
        min_clearance: f64::INFINITY,
        tracking_sq_sum: 0.0,
        tracking_count: 0,
        plan_times: Vec::new(),
        solve_times: Vec::new(),
    };
    let mut trace = Vec::new();
    let mut diagnostic = None;
    let mut landed = false;
    let mut simulated = 0.0;
    let mut final_goal_distance = f64::INFINITY;

    let transient = TRANSIENT_WINDOW.min(0.5 * spec.duration);
    let divergence_radius = 10.0 * spec.map.extent().norm();

    for step in 0..total_steps {
        let t = step as f64 * dt;
        let world = WorldState {
            ugv: RigidBodyState {
                position: ugv.state.position(),
                velocity: ugv.state.velocity_world(),
                orientation: ugv.state.orientation(),
                body_rate: ugv.state.body_rate(),
            },
            ugv_accel: ugv.state.accel_world,
            uav,
            time: t,
        };
        let rel = relative_observation(&world);
        let goal = spec.task.goal(t);
        final_goal_distance = (rel.p - goal).norm();

        if !rel.is_finite() || rel.p.norm() > divergence_radius {
            diagnostic = Some(format!(
                "state diverged at t = {t:.3}: relative position {:?}",
                rel.p
            ));
            break;
        }

        if step % sensor_every == 0 {
            let cloud = lidar_sample(&world, obstacles, &spec.sensor);
            let quantities =
                measured_quantities(&ugv.state.non_inertial_quantities(), spec, &mut noise_rng);
            let started = Instant::now();
            let traj = gen_trajectory(
                &rel.p,
                &cloud,
                &quantities,
                &goal,
                &spec.planner,
                &spec.modulation,
            );
            acc.plan_times.push(started.elapsed().as_secs_f64());
            plan = Some((traj, t));
        }

        if step % control_every == 0 {
            let (traj, t_plan) = plan.as_ref().expect("plan exists before first control tick");
            let window_start = (((t - t_plan) / traj.dt) + 1e-9).floor().max(0.0) as usize;
            let window = traj.window(window_start, spec.mpc.horizon_steps + 1);
            let window_base = t_plan + window_start as f64 * traj.dt;
            let shifted_warm = warm.as_ref().map(|w| {
                let shift = last_window_base
                    .map(|b| ((window_base - b) / traj.dt).round().max(0.0) as usize)
                    .unwrap_or(0);
                w.shifted(shift)
            });
            last_window_base = Some(window_base);
            let quantities =
                measured_quantities(&ugv.state.non_inertial_quantities(), spec, &mut noise_rng);
            let started = Instant::now();
            let solution = mpc::solve(&rel, &window, &quantities, &spec.mpc, shifted_warm.as_ref());
            acc.solve_times.push(started.elapsed().as_secs_f64());
            let commanded = solution.inputs[0];
            warm = Some(solution);

            applied_input = if spec.knobs.input_delay_ticks == 0 {
                commanded
            } else {
                delay_queue.push_back(commanded);
                if delay_queue.len() > spec.knobs.input_delay_ticks {
                    delay_queue.pop_front().unwrap()
                } else {
                    ControlInput::hover()
                }
            };

            if t >= transient {
                acc.tracking_sq_sum += (rel.p - goal).norm_squared();
                acc.tracking_count += 1;
            }
            let clearance = clearance_of(obstacles, &uav.position, spec);
            let sample = &window.samples[0];
            let uav_q = uav.orientation.quaternion();
            trace.push(TraceRow {
                time: t,
                ugv_x: ugv.state.x,
                ugv_y: ugv.state.y,
                ugv_yaw: ugv.state.yaw,
                uav_x: uav.position.x,
                uav_y: uav.position.y,
                uav_z: uav.position.z,
                uav_qw: uav_q.w,
                uav_qx: uav_q.i,
                uav_qy: uav_q.j,
                uav_qz: uav_q.k,
                rel_px: rel.p.x,
                rel_py: rel.p.y,
                rel_pz: rel.p.z,
                rel_vx: rel.v.x,
                rel_vy: rel.v.y,
                rel_vz: rel.v.z,
                ref_px: sample.p_ref.x,
                ref_py: sample.p_ref.y,
                ref_pz: sample.p_ref.z,
                ref_vx: sample.v_ref.x,
                ref_vy: sample.v_ref.y,
                ref_vz: sample.v_ref.z,
                goal_x: goal.x,
                goal_y: goal.y,
                goal_z: goal.z,
                thrust: applied_input.thrust,
                omega_x: applied_input.omega.x,
                omega_y: applied_input.omega.y,
                omega_z: applied_input.omega.z,
                clearance,
            });
        }

        // Ground truth: UGV unicycle, then the UAV rigid body under the held
        // input (world frame == degenerate parameter set).
        ugv.step(dt);
        let (p, v, q_raw) = rk4_raw(
            &uav.position,
            &uav.velocity,
            uav.orientation.quaternion(),
            &applied_input,
            &NonInertialQuantities::degenerate(),
            dt,
        );
        uav.position = p;
        uav.velocity = v;
        uav.orientation = UnitQuat::from_quaternion(q_raw);
        uav.body_rate = applied_input.omega;
        simulated = t + dt;

        if !obstacles.is_empty() {
            if let Some(c) = clearance_of(obstacles, &uav.position, spec) {
                acc.min_clearance = acc.min_clearance.min(c);
            }
        }

        if let TaskSpec::Land { touchdown, .. } = &spec.task {
            let world_now = WorldState {
                ugv: RigidBodyState {
                    position: ugv.state.position(),
                    velocity: ugv.state.velocity_world(),
                    orientation: ugv.state.orientation(),
                    body_rate: ugv.state.body_rate(),
                },
                ugv_accel: ugv.state.accel_world,
                uav,
                time: simulated,
            };
            let rel_now = relative_observation(&world_now);
            if (rel_now.p - touchdown).norm() < LAND_POSITION_TOLERANCE
                && rel_now.v.norm() < LAND_SPEED_TOLERANCE
            {
                landed = true;
                final_goal_distance = (rel_now.p - touchdown).norm();
                break;
            }
        }
    }

    let min_clearance = if obstacles.is_empty() {
        None
    } else {
        Some(acc.min_clearance)
    };
    let clearance_ok = min_clearance.map_or(true, |c| c > spec.success_clearance);
    let success = clearance_ok && diagnostic.is_none();
    let tracking_rmse = if acc.tracking_count > 0 {
        (acc.tracking_sq_sum / acc.tracking_count as f64).sqrt()
    } else {
        0.0
    };
    let goal_reached = if matches!(spec.task, TaskSpec::Land { .. }) {
        landed
    } else {
        final_goal_distance < GOAL_TOLERANCE
    };
    let (mean_plan_time, max_plan_time) = mean_max(&acc.plan_times);
    let (mean_solve_time, max_solve_time) = mean_max(&acc.solve_times);

    Ok(TrialMetrics {
        success,
        min_clearance,
        tracking_rmse,
        goal_reached,
        final_goal_distance,
        landed,
        simulated,
        mean_plan_time,
        max_plan_time,
        mean_solve_time,
        max_solve_time,
        diagnostic,
        trace,
    })
}

fn clearance_of(
    obstacles: &[ObstaclePrimitive],
    uav_position: &Vec3,
    spec: &ScenarioSpec,
) -> Option<f64> {
    if obstacles.is_empty() {
        return None;
    }
    Some(min_signed_distance(obstacles, uav_position) - spec.modulation.robot_radius)
}
