//! Deterministic swarm simulator.

pub mod config;
pub mod log;
pub mod rng;
pub mod scenario;
pub mod truth;

pub use config::{ConfigError, Mode, ScenarioConfig};
pub use log::{RunSummary, SimLog};
pub use scenario::{run_scenario, SimError};
pub use truth::{emit_imu_sample, emit_relative_detection, step_truth, UavTruth};
