//! Finite-horizon nonlinear tracking MPC over the relative dynamics.
//!
//! Quadratic tracking cost around a reference trajectory with a hover
//! reference input, thrust and body-rate box constraints, and the RK4
//! discretization of the relative flow as the shooting model.
//!
//! The solver is an iterative LQR: finite-difference linearization around the
//! current rollout, a regularized Riccati backward pass, and a line-searched
//! forward rollout with inputs clamped to the box. Accepted steps strictly
//! decrease cost, and the initial trajectory is never worse than the all-hover
//! input sequence, so the returned cost is always bounded by the hover
//! baseline. The scheme trades constrained optimality at the box boundary for
//! speed and robustness; constraint satisfaction itself is exact by
//! construction.

use crate::dynamics::{rk4_raw, ControlInput, NonInertialQuantities, RelativeState};
use crate::math::{Quat, UnitQuat, Vec3};
use crate::trajectory::{ReferenceTrajectory, TrajectorySample};
use crate::{Error, Result, GRAVITY};
use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};
use std::time::Instant;

const NX: usize = 10;
const NU: usize = 4;

type StateVec = SVector<f64, NX>;
type InputVec = SVector<f64, NU>;
type StateMat = SMatrix<f64, NX, NX>;
type InputMat = SMatrix<f64, NU, NU>;
type DynMat = SMatrix<f64, NX, NU>;
type GainMat = SMatrix<f64, NU, NX>;

/// Tracker configuration: horizon, weights, input box, solver limits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MpcConfig {
    /// Number of shooting intervals.
    pub horizon_steps: usize,
    /// Discretization step, s.
    pub dt: f64,
    /// Stage state weights: position (3), velocity (3), quaternion (4).
    pub q_weights: [f64; NX],
    /// Input weights: thrust, body rates (3).
    pub r_weights: [f64; NU],
    /// Terminal state weights.
    pub q_final: [f64; NX],
    /// Thrust bounds, m/s².
    pub t_min: f64,
    pub t_max: f64,
    /// Roll/pitch rate bound, rad/s.
    pub omega_rp: f64,
    /// Yaw rate bound, rad/s.
    pub omega_yaw: f64,
    /// Iteration cap per solve.
    pub max_iterations: usize,
    /// Relative cost-improvement threshold that declares convergence.
    pub convergence_tol: f64,
}

impl Default for MpcConfig {
    fn default() -> Self {
        Self {
            horizon_steps: 20,
            dt: 0.1,
            q_weights: [
                120.0, 120.0, 120.0, // position
                15.0, 15.0, 15.0, // velocity
                40.0, 40.0, 40.0, 40.0, // quaternion
            ],
            r_weights: [0.4, 1.0, 1.0, 1.0],
            q_final: [
                240.0, 240.0, 240.0, //
                30.0, 30.0, 30.0, //
                80.0, 80.0, 80.0, 80.0,
            ],
            t_min: 2.0,
            t_max: 20.0,
            omega_rp: 3.0,
            omega_yaw: 1.5,
            max_iterations: 25,
            convergence_tol: 1e-4,
        }
    }
}

impl MpcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_steps < 1 {
            return Err(Error::InvalidArgument("horizon_steps must be ≥ 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "mpc dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_min < GRAVITY && GRAVITY < self.t_max) {
            return Err(Error::InvalidArgument(format!(
                "thrust box [{}, {}] must contain hover thrust {GRAVITY}",
                self.t_min, self.t_max
            )));
        }
        if !(self.omega_rp > 0.0 && self.omega_yaw > 0.0) {
            return Err(Error::InvalidArgument("rate bounds must be positive".into()));
        }
        if self
            .q_weights
            .iter()
            .chain(self.q_final.iter())
            .chain(self.r_weights.iter())
            .any(|w| !(*w >= 0.0))
        {
            return Err(Error::InvalidArgument("weights must be non-negative".into()));
        }
        if self.max_iterations < 1 || !(self.convergence_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "max_iterations ≥ 1 and convergence_tol > 0 required".into(),
            ));
        }
        Ok(())
    }

    /// Clamps an input to the box, componentwise.
    pub fn clamp_input(&self, u: &ControlInput) -> ControlInput {
        ControlInput::new(
            u.thrust.clamp(self.t_min, self.t_max),
            Vec3::new(
                u.omega.x.clamp(-self.omega_rp, self.omega_rp),
                u.omega.y.clamp(-self.omega_rp, self.omega_rp),
                u.omega.z.clamp(-self.omega_yaw, self.omega_yaw),
            ),
        )
    }

    /// True iff `u` satisfies the box constraints.
    pub fn input_feasible(&self, u: &ControlInput) -> bool {
        u.thrust >= self.t_min
            && u.thrust <= self.t_max
            && u.omega.x.abs() <= self.omega_rp
            && u.omega.y.abs() <= self.omega_rp
            && u.omega.z.abs() <= self.omega_yaw
    }
}

/// Result of one solve.
#[derive(Clone, Debug)]
pub struct MpcSolution {
    /// Input sequence, one per shooting interval. Always box-feasible.
    pub inputs: Vec<ControlInput>,
    /// Rollout of the inputs from the initial state (`horizon_steps + 1`
    /// states). Empty only when the fail-safe path triggered.
    pub predicted_states: Vec<RelativeState>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Wall-clock solve time, s.
    pub solve_time: f64,
}

impl MpcSolution {
    /// Warm-start guess shifted by `steps` control intervals (the last input
    /// is repeated). Only the input sequence matters for warm starts.
    pub fn shifted(&self, steps: usize) -> MpcSolution {
        let mut inputs = self.inputs.clone();
        if steps > 0 && !inputs.is_empty() {
            let last = *inputs.last().unwrap();
            let shift = steps.min(inputs.len());
            inputs.rotate_left(shift);
            let n = inputs.len();
            for u in inputs.iter_mut().skip(n.saturating_sub(steps)) {
                *u = last;
            }
        }
        MpcSolution {
            inputs,
            ..self.clone()
        }
    }
}

/// Hover reference input `u_h = [g; 0]`.
pub fn hover_input() -> ControlInput {
    ControlInput::hover()
}

fn state_to_vec(x: &RelativeState) -> StateVec {
    let q = x.q.quaternion();
    StateVec::from_column_slice(&[x.p.x, x.p.y, x.p.z, x.v.x, x.v.y, x.v.z, q.w, q.i, q.j, q.k])
}

fn input_to_vec(u: &ControlInput) -> InputVec {
    InputVec::new(u.thrust, u.omega.x, u.omega.y, u.omega.z)
}

fn vec_to_input(u: &InputVec) -> ControlInput {
    ControlInput::new(u[0], Vec3::new(u[1], u[2], u[3]))
}

/// RK4 shooting step on the flat state vector; the quaternion part may be
/// slightly off the unit sphere during finite-difference probes.
fn step_vec(z: &StateVec, u: &ControlInput, n: &NonInertialQuantities, dt: f64) -> StateVec {
    let p = Vec3::new(z[0], z[1], z[2]);
    let v = Vec3::new(z[3], z[4], z[5]);
    let q = Quat::new(z[6], z[7], z[8], z[9]);
    let (p2, v2, q2) = rk4_raw(&p, &v, &q, u, n, dt);
    let q2 = UnitQuat::from_quaternion(q2);
    let qq = q2.quaternion();
    StateVec::from_column_slice(&[p2.x, p2.y, p2.z, v2.x, v2.y, v2.z, qq.w, qq.i, qq.j, qq.k])
}

fn step_state(
    x: &RelativeState,
    u: &ControlInput,
    n: &NonInertialQuantities,
    dt: f64,
) -> RelativeState {
    let (p, v, q) = rk4_raw(&x.p, &x.v, x.q.quaternion(), u, n, dt);
    RelativeState::new(p, v, UnitQuat::from_quaternion(q))
}

/// Componentwise state error with quaternion sign alignment: the reference
/// quaternion is negated when `⟨q, q_ref⟩ < 0` so that `q` and `-q` (the same
/// rotation) produce the same error.
fn state_error(x: &RelativeState, x_ref: &TrajectorySample) -> StateVec {
    let q = x.q.quaternion();
    let mut qr = *x_ref.q_ref.quaternion();
    if q.dot(&qr) < 0.0 {
        qr = -qr;
    }
    StateVec::from_column_slice(&[
        x.p.x - x_ref.p_ref.x,
        x.p.y - x_ref.p_ref.y,
        x.p.z - x_ref.p_ref.z,
        x.v.x - x_ref.v_ref.x,
        x.v.y - x_ref.v_ref.y,
        x.v.z - x_ref.v_ref.z,
        q.w - qr.w,
        q.i - qr.i,
        q.j - qr.j,
        q.k - qr.k,
    ])
}

fn weighted_square(e: &StateVec, w: &[f64; NX]) -> f64 {
    (0..NX).map(|i| w[i] * e[i] * e[i]).sum()
}

/// Stage cost `‖x ⊖ x_ref‖²_Q + ‖u − u_h‖²_R`.
pub fn stage_cost(
    x: &RelativeState,
    x_ref: &TrajectorySample,
    u: &ControlInput,
    cfg: &MpcConfig,
) -> f64 {
    let e = state_error(x, x_ref);
    let du = input_to_vec(u) - input_to_vec(&hover_input());
    weighted_square(&e, &cfg.q_weights) + (0..NU).map(|j| cfg.r_weights[j] * du[j] * du[j]).sum::<f64>()
}

/// Terminal cost `‖x ⊖ x_ref‖²_Q_final`.
pub fn terminal_cost(x: &RelativeState, x_ref: &TrajectorySample, cfg: &MpcConfig) -> f64 {
    weighted_square(&state_error(x, x_ref), &cfg.q_final)
}

/// Rolls the inputs out from `x0`; returns states and total cost, or `None`
/// if the model diverges to non-finite values.
fn rollout(
    x0: &RelativeState,
    inputs: &[ControlInput],
    refs: &[TrajectorySample],
    n: &NonInertialQuantities,
    cfg: &MpcConfig,
) -> Option<(Vec<RelativeState>, f64)> {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    states.push(*x0);
    let mut cost = 0.0;
    for (k, u) in inputs.iter().enumerate() {
        let x = states[k];
        cost += stage_cost(&x, &refs[k], u, cfg);
        let next = step_state(&x, u, n, cfg.dt);
        if !next.is_finite() {
            return None;
        }
        states.push(next);
    }
    cost += terminal_cost(states.last().unwrap(), &refs[inputs.len()], cfg);
    cost.is_finite().then_some((states, cost))
}

/// Forward-difference Jacobians of the shooting step around `(x, u)`.
fn linearize(
    x: &RelativeState,
    u: &ControlInput,
    n: &NonInertialQuantities,
    dt: f64,
) -> (StateMat, DynMat) {
    const H: f64 = 1e-6;
    let z0 = state_to_vec(x);
    let u0 = input_to_vec(u);
    let f0 = step_vec(&z0, u, n, dt);
    let mut a = StateMat::zeros();
    for i in 0..NX {
        let mut z = z0;
        z[i] += H;
        let fi = step_vec(&z, u, n, dt);
        a.set_column(i, &((fi - f0) / H));
    }
    let mut b = DynMat::zeros();
    for j in 0..NU {
        let mut uj = u0;
        uj[j] += H;
        let fj = step_vec(&z0, &vec_to_input(&uj), n, dt);
        b.set_column(j, &((fj - f0) / H));
    }
    (a, b)
}

struct BackwardPass {
    gains_ff: Vec<InputVec>,
    gains_fb: Vec<GainMat>,
}

#[allow(clippy::too_many_arguments)]
fn backward_pass(
    states: &[RelativeState],
    inputs: &[ControlInput],
    refs: &[TrajectorySample],
    jacobians: &[(StateMat, DynMat)],
    cfg: &MpcConfig,
    mu: f64,
) -> Option<BackwardPass> {
    let n_steps = inputs.len();
    let q_diag = StateVec::from_column_slice(&cfg.q_weights);
    let r_diag = InputVec::from_column_slice(&cfg.r_weights);
    let qf_diag = StateVec::from_column_slice(&cfg.q_final);

    let e_n = state_error(&states[n_steps], &refs[n_steps]);
    let mut v_z: StateVec = 2.0 * qf_diag.component_mul(&e_n);
    let mut v_zz = StateMat::from_diagonal(&(2.0 * qf_diag));

    let mut gains_ff = vec![InputVec::zeros(); n_steps];
    let mut gains_fb = vec![GainMat::zeros(); n_steps];

    for k in (0..n_steps).rev() {
        let (a, b) = &jacobians[k];
        let e = state_error(&states[k], &refs[k]);
        let du = input_to_vec(&inputs[k]) - input_to_vec(&hover_input());
        let l_z: StateVec = 2.0 * q_diag.component_mul(&e);
        let l_u: InputVec = 2.0 * r_diag.component_mul(&du);
        let l_zz = StateMat::from_diagonal(&(2.0 * q_diag));
        let l_uu = InputMat::from_diagonal(&(2.0 * r_diag));

        let q_z = l_z + a.transpose() * v_z;
        let q_u = l_u + b.transpose() * v_z;
        let q_zz = l_zz + a.transpose() * v_zz * a;
        let q_uu = l_uu + b.transpose() * v_zz * b;
        let q_uz = b.transpose() * v_zz * a;

        let q_uu_reg = q_uu + InputMat::identity() * mu;
        let chol = q_uu_reg.cholesky()?;
        let k_ff = -chol.solve(&q_u);
        let k_fb = -chol.solve(&q_uz);

        v_z = q_z
            + k_fb.transpose() * (q_uu * k_ff)
            + k_fb.transpose() * q_u
            + q_uz.transpose() * k_ff;
        v_zz = q_zz
            + k_fb.transpose() * q_uu * k_fb
            + k_fb.transpose() * q_uz
            + q_uz.transpose() * k_fb;
        v_zz = 0.5 * (v_zz + v_zz.transpose());

        gains_ff[k] = k_ff;
        gains_fb[k] = k_fb;
    }
    Some(BackwardPass { gains_ff, gains_fb })
}

fn fail_safe(cfg: &MpcConfig, start: Instant) -> MpcSolution {
    MpcSolution {
        inputs: vec![hover_input(); cfg.horizon_steps],
        predicted_states: Vec::new(),
        cost: f64::INFINITY,
        iterations: 0,
        converged: false,
        solve_time: start.elapsed().as_secs_f64(),
    }
}

/// Solves the tracking problem from `x0` along `traj` (padded to the horizon
/// by repeating its last sample).
///
/// The returned inputs always satisfy the box constraints exactly, the
/// predicted states are the exact RK4 rollout of those inputs, and the cost
/// never exceeds the all-hover baseline. A non-finite model rollout yields
/// the hover sequence flagged as not converged.
pub fn solve(
    x0: &RelativeState,
    traj: &ReferenceTrajectory,
    n: &NonInertialQuantities,
    cfg: &MpcConfig,
    warm_start: Option<&MpcSolution>,
) -> MpcSolution {
    let start = Instant::now();
    let refs = traj.window(0, cfg.horizon_steps + 1).samples;

    if !x0.is_finite() || !n.is_finite() {
        return fail_safe(cfg, start);
    }

    let hover_seq = vec![cfg.clamp_input(&hover_input()); cfg.horizon_steps];
    let Some((mut states, mut cost)) = rollout(x0, &hover_seq, &refs, n, cfg) else {
        return fail_safe(cfg, start);
    };
    let mut inputs = hover_seq;

    if let Some(ws) = warm_start {
        if ws.inputs.len() == cfg.horizon_steps {
            let clamped: Vec<ControlInput> =
                ws.inputs.iter().map(|u| cfg.clamp_input(u)).collect();
            if let Some((s, c)) = rollout(x0, &clamped, &refs, n, cfg) {
                if c < cost {
                    states = s;
                    cost = c;
                    inputs = clamped;
                }
            }
        }
    }

    let mut mu = 1e-6;
    let mut iterations = 0;
    let mut converged = false;
    let alphas = [1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125];

    while iterations < cfg.max_iterations {
        iterations += 1;
        let jacobians: Vec<(StateMat, DynMat)> = (0..cfg.horizon_steps)
            .map(|k| linearize(&states[k], &inputs[k], n, cfg.dt))
            .collect();

        let pass = loop {
            match backward_pass(&states, &inputs, &refs, &jacobians, cfg, mu) {
                Some(p) => break Some(p),
                None => {
                    mu *= 10.0;
                    if mu > 1e8 {
                        break None;
                    }
                }
            }
        };
        let Some(pass) = pass else {
            break;
        };

        let nominal_vecs: Vec<StateVec> = states.iter().map(state_to_vec).collect();
        let mut accepted = false;
        for &alpha in &alphas {
            let mut trial_inputs = Vec::with_capacity(cfg.horizon_steps);
            let mut x = *x0;
            let mut trial_states = Vec::with_capacity(cfg.horizon_steps + 1);
            trial_states.push(x);
            let mut trial_cost = 0.0;
            let mut finite = true;
            for k in 0..cfg.horizon_steps {
                let dz = state_to_vec(&x) - nominal_vecs[k];
                let du = alpha * pass.gains_ff[k] + pass.gains_fb[k] * dz;
                let u = cfg.clamp_input(&vec_to_input(&(input_to_vec(&inputs[k]) + du)));
                trial_cost += stage_cost(&x, &refs[k], &u, cfg);
                let next = step_state(&x, &u, n, cfg.dt);
                if !next.is_finite() {
                    finite = false;
                    break;
                }
                trial_inputs.push(u);
                trial_states.push(next);
                x = next;
            }
            if !finite {
                continue;
            }
            trial_cost += terminal_cost(trial_states.last().unwrap(), &refs[cfg.horizon_steps], cfg);
            if trial_cost.is_finite() && trial_cost < cost {
                let improvement = cost - trial_cost;
                inputs = trial_inputs;
                states = trial_states;
                cost = trial_cost;
                accepted = true;
                mu = (mu * 0.5).max(1e-8);
                if improvement <= cfg.convergence_tol * cost.max(1.0) {
                    converged = true;
                }
                break;
            }
        }
        if !accepted {
            // No descent direction under the line search: stationary.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    MpcSolution {
        inputs,
        predicted_states: states,
        cost,
        iterations,
        converged,
        solve_time: start.elapsed().as_secs_f64(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate_rk4;
    use crate::trajectory::TrajectorySample;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn hover_reference(at: Vec3, len: usize) -> ReferenceTrajectory {
        ReferenceTrajectory {
            samples: vec![
                TrajectorySample {
                    p_ref: at,
                    v_ref: Vec3::zeros(),
                    q_ref: UnitQuat::identity(),
                };
                len
            ],
            dt: 0.1,
            collided: false,
        }
    }

    #[test]
    fn stage_cost_zero_at_reference() {
        let cfg = MpcConfig::default();
        let s = TrajectorySample {
            p_ref: Vec3::new(1.0, 2.0, 3.0),
            v_ref: Vec3::new(0.1, 0.0, -0.1),
            q_ref: UnitQuat::from_axis_angle(&Vec3::y_axis(), 0.4),
        };
        let x = RelativeState::new(s.p_ref, s.v_ref, s.q_ref);
        assert_eq!(stage_cost(&x, &s, &hover_input(), &cfg), 0.0);
    }

    #[test]
    fn stage_cost_respects_double_cover() {
        let cfg = MpcConfig::default();
        let q = UnitQuat::from_axis_angle(&Vec3::x_axis(), 1.0);
        let neg = UnitQuat::new_unchecked(-q.quaternion());
        let s = TrajectorySample {
            p_ref: Vec3::zeros(),
            v_ref: Vec3::zeros(),
            q_ref: neg,
        };
        let x = RelativeState::new(Vec3::zeros(), Vec3::zeros(), q);
        assert_relative_eq!(stage_cost(&x, &s, &hover_input(), &cfg), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn stage_cost_single_position_term() {
        let mut cfg = MpcConfig::default();
        cfg.q_weights = [200.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        cfg.r_weights = [0.0; 4];
        let s = TrajectorySample {
            p_ref: Vec3::zeros(),
            v_ref: Vec3::zeros(),
            q_ref: UnitQuat::identity(),
        };
        let x = RelativeState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::zeros(), UnitQuat::identity());
        assert_relative_eq!(stage_cost(&x, &s, &hover_input(), &cfg), 200.0);
    }

    #[test]
    fn equilibrium_tracking_stays_hover() {
        let cfg = MpcConfig::default();
        let traj = hover_reference(Vec3::zeros(), 20);
        let sol = solve(
            &RelativeState::at_rest(),
            &traj,
            &NonInertialQuantities::degenerate(),
            &cfg,
            None,
        );
        assert!(sol.converged);
        for u in &sol.inputs {
            assert!((u.thrust - GRAVITY).abs() < 0.2, "thrust {}", u.thrust);
            assert!(u.omega.norm() < 0.1);
        }
        let terminal = sol.predicted_states.last().unwrap();
        assert!(terminal.p.norm() < 1e-3, "drift {}", terminal.p.norm());
    }

    #[test]
    fn constraints_hold_exactly_and_dynamics_are_consistent() {
        let cfg = MpcConfig::default();
        let n = NonInertialQuantities::new(
            Vec3::new(0.3, -0.1, GRAVITY),
            Vec3::new(0.0, 0.0, 0.4),
            Vec3::zeros(),
        );
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..10 {
            let x0 = RelativeState::new(
                Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0)),
                Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
                UnitQuat::from_axis_angle(&Vec3::x_axis(), rng.gen_range(-0.4..0.4)),
            );
            let traj = hover_reference(Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)), 20);
            let sol = solve(&x0, &traj, &n, &cfg, None);
            assert_eq!(sol.inputs.len(), 20);
            assert_eq!(sol.predicted_states.len(), 21);
            for u in &sol.inputs {
                assert!(cfg.input_feasible(u), "constraint violated: {u:?}");
            }
            assert_eq!(sol.predicted_states[0], x0);
            for k in 0..20 {
                let expected =
                    integrate_rk4(&sol.predicted_states[k], &sol.inputs[k], &n, cfg.dt).unwrap();
                assert!(
                    (expected.p - sol.predicted_states[k + 1].p).norm() < 1e-9
                        && (expected.v - sol.predicted_states[k + 1].v).norm() < 1e-9
                );
            }
        }
    }

    #[test]
    fn cost_never_exceeds_hover_baseline() {
        let cfg = MpcConfig::default();
        let n = NonInertialQuantities::degenerate();
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..20 {
            let x0 = RelativeState::new(
                Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0)),
                Vec3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
                UnitQuat::identity(),
            );
            let traj = hover_reference(Vec3::from_fn(|_, _| rng.gen_range(-2.0..2.0)), 20);
            let refs = traj.window(0, 21).samples;
            let hover_seq = vec![hover_input(); 20];
            let (_, hover_cost) = rollout(&x0, &hover_seq, &refs, &n, &cfg).unwrap();
            let sol = solve(&x0, &traj, &n, &cfg, None);
            assert!(
                sol.cost <= hover_cost + 1e-9,
                "cost {} above hover {}",
                sol.cost,
                hover_cost
            );
        }
    }

    #[test]
    fn fail_safe_on_divergent_state() {
        let cfg = MpcConfig::default();
        let x0 = RelativeState::new(
            Vec3::zeros(),
            Vec3::new(1e308, 0.0, 0.0),
            UnitQuat::identity(),
        );
        let n = NonInertialQuantities::new(
            Vec3::new(0.0, 0.0, GRAVITY),
            Vec3::new(0.0, 0.0, 1.0),
            Vec3::zeros(),
        );
        let sol = solve(&x0, &hover_reference(Vec3::zeros(), 20), &n, &cfg, None);
        assert!(!sol.converged);
        assert_eq!(sol.inputs.len(), 20);
        for u in &sol.inputs {
            assert_eq!(*u, hover_input());
        }
    }

    #[test]
    fn closed_loop_offset_recovery() {
        // Re-solve at 100 Hz, apply the first input for 10 ms; the 0.5 m
        // offset should shrink well below 5 cm within 3 s.
        let cfg = MpcConfig::default();
        let n = NonInertialQuantities::degenerate();
        let traj = hover_reference(Vec3::zeros(), 20);
        let mut x = RelativeState::new(
            Vec3::new(0.5, 0.0, 0.0),
            Vec3::zeros(),
            UnitQuat::identity(),
        );
        let mut warm: Option<MpcSolution> = None;
        for _ in 0..300 {
            let sol = solve(&x, &traj, &n, &cfg, warm.as_ref());
            let u = sol.inputs[0];
            warm = Some(sol);
            x = integrate_rk4(&x, &u, &n, 0.01).unwrap();
        }
        assert!(x.p.norm() < 0.05, "residual offset {}", x.p.norm());
    }

    #[test]
    fn shifted_warm_start_repeats_last_input() {
        let sol = MpcSolution {
            inputs: (0..4)
                .map(|i| ControlInput::new(i as f64, Vec3::zeros()))
                .collect(),
            predicted_states: Vec::new(),
            cost: 0.0,
            iterations: 1,
            converged: true,
            solve_time: 0.0,
        };
        let shifted = sol.shifted(1);
        let thrusts: Vec<f64> = shifted.inputs.iter().map(|u| u.thrust).collect();
        assert_eq!(thrusts, vec![1.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn config_validation() {
        assert!(MpcConfig::default().validate().is_ok());
        let mut bad = MpcConfig::default();
        bad.t_min = 10.0;
        assert!(bad.validate().is_err());
        let mut bad = MpcConfig::default();
        bad.q_weights[0] = -1.0;
        assert!(bad.validate().is_err());
    }
}
