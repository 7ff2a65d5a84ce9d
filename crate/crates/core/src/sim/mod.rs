//! Deterministic ground-truth world for closed-loop evaluation: obstacle
//! primitives, a planar-unicycle UGV with scripted or random motion,
//! synthetic LiDAR, relative-state synthesis, task goal generators, trial
//! execution, and batch success-rate tables.

pub mod batch;
pub mod obstacles;
pub mod scenario;
pub mod sensor;
pub mod trial;
pub mod ugv;
pub mod world;

pub use batch::{run_batch, BatchConfig, BatchTable, BatchTask, Density, SpeedProfile};
pub use obstacles::ObstaclePrimitive;
pub use scenario::{ScenarioSpec, SCENARIO_SCHEMA_VERSION};
pub use sensor::{lidar_sample, SensorModel};
pub use trial::{run_trial, TraceRow, TrialMetrics};
pub use ugv::{UgvProgram, UgvSim, UgvState};
pub use world::{relative_observation, RigidBodyState, TaskSpec, WorldState};
