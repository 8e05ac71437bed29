//! Mean-shift clustering with a seeded, batched, early-stopped engine.
//!
//! Two engines share the same window, pruning and labelling primitives:
//!
//! - [`run_baseline`] climbs from every input point (`O(T·n²)` work).
//! - [`run_faster`] climbs from `N` random seeds in lock-step, streaming the
//!   full point set in fixed-size blocks, and stops once a `gamma` fraction of
//!   seeds has converged.
//!
//! [`run_adaptive`] wraps the seeded engine with a controller that picks `N`
//! from the number of modes found. [`datagen`] and [`eval`] provide synthetic
//! datasets, agreement metrics and a benchmark harness.

pub mod bandwidth;
pub mod baseline;
pub mod controller;
pub mod datagen;
mod error;
pub mod eval;
pub mod faster;
pub mod metric;
pub mod modes;
mod types;

pub use bandwidth::{estimate_bandwidth, DEFAULT_QUANTILE, DEFAULT_SAMPLE_CAP};
pub use baseline::{run_baseline, shift_once, PointTrajectory};
pub use controller::{
    coverage_probability, min_seed_bound, next_seed_count, run_adaptive, ControllerRecord, ControllerState,
    SeedAction, SeedController,
};
pub use datagen::{DatasetKind, GenSpec};
pub use error::{Result, ShiftError};
pub use eval::{mode_match, rand_index, BandwidthSource, BenchRecord, Method, ModeMatch};
pub use faster::{batch_shift_iteration, early_stop_check, run_faster, sample_seeds, SeedBatch};
pub use metric::{euclidean_distance, kde_value, window_mask};
pub use modes::{assign_labels, prune_modes};
pub use types::{ClusterResult, ModeSet, ShiftConfig, VectorSet};
