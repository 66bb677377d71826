//! Offline analysis: observability, filter consistency and swarm metrics.

pub mod consistency;
pub mod focal_consistency;
pub mod metrics;
pub mod observability;

pub use consistency::{anees_bounds, anees_from_nees, anees_series, nees, AneesReport};
pub use metrics::{centroid, metric_drift_velocity, metric_neighbor_distance, neighbor_pairs};
pub use observability::{build_combined_system, observability_rank, unobservable_basis_check, CombinedSystem};
pub use focal_consistency::{run_focal_consistency, FocalConsistencyConfig, FocalConsistencyReport};
