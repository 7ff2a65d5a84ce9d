//! CoNi-OA: cooperative non-inertial-frame obstacle avoidance for a quadrotor
//! controlled in a ground vehicle's body frame.
//!
//! The pipeline has three stages, all operating on relative states expressed
//! in the UGV body frame `N`:
//!
//! 1. [`modulation`] — builds a sample-based modulation matrix from one sweep
//!    of raw range-sensor points and deflects a nominal velocity field around
//!    obstacles.
//! 2. [`trajectory`] — iterates the modulated velocity field into a short
//!    collision-free reference trajectory (position, velocity, attitude),
//!    dynamically consistent with the relative rigid-body dynamics.
//! 3. [`mpc`] — a nonlinear tracking MPC over the relative dynamics with
//!    thrust and body-rate box constraints.
//!
//! [`sim`] provides a deterministic ground-truth world (UGV motion programs,
//! analytic obstacle primitives, synthetic LiDAR, closed-loop trials and
//! batch evaluation); [`cli`] is the command-line front end.

pub mod cli;
pub mod dynamics;
pub mod math;
pub mod modulation;
pub mod mpc;
pub mod sim;
pub mod trajectory;

mod error;

pub use error::Error;

/// Gravity used throughout, m/s².
pub const GRAVITY: f64 = 9.8;

/// Convenience result alias.
pub type Result<T> = std::result::Result<T, Error>;
