//! Anchor-free lateral state estimation and formation control for UAV swarms.
//!
//! Every UAV tracks its neighbors from relative detections, fits a floating frame
//! (a circle through the neighbors) and estimates its own position in that frame.
//! A velocity feedback law then holds the formation without any global reference.
//!
//! ```
//! use swa_core::{estimate_frame, FrameDecision, FrameParams, Vec2};
//!
//! let neighbors = [Vec2::new(10.0, 0.0), Vec2::new(0.0, 10.0), Vec2::new(-10.0, 0.0)];
//! let FrameDecision::Fresh(frame) = estimate_frame(&neighbors, Vec2::ZERO, &FrameParams::default()).unwrap() else {
//!     unreachable!()
//! };
//! assert!(frame.center.norm() < 1e-9);
//! ```

pub mod analysis;
pub mod belief;
pub mod control;
pub mod error;
pub mod floating_frame;
pub mod focal_estimator;
pub mod geometry;
pub mod linalg;
pub mod sim;
pub mod surroundings;

pub use belief::{Belief, Matrix6, Vector6};
pub use control::{compute_velocity_command, select_neighborhood, ControlParams};
pub use error::{Error, Result};
pub use floating_frame::{estimate_frame, FrameDecision, FrameError, FrameEstimate, FrameParams};
pub use focal_estimator::{FocalBelief, FocalEstimator, FocalEvent, FocalParams, ImuSample, PredictionModel};
pub use geometry::{rotate_body_to_stable, rotate_stable_to_body, Pose2, Rot2, Vec2};
pub use surroundings::{AgentId, IngestOutcome, NeighborTrack, SurroundingsParams, TrackBank};
