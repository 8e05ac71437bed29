//! Classical mean-shift: every input point climbs to its own mode.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::Result;
use crate::metric::{check_dim, sq_dist, Window, WindowSum};
use crate::modes::{assign_labels, prune_modes};
use crate::types::{ClusterResult, ShiftConfig, VectorSet};

/// State of one point's climb.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTrajectory {
    pub current: Vec<f64>,
    pub converged: bool,
    /// Number of shift steps taken.
    pub iterations: usize,
}

/// Moves `x` to the mean of the points within `h` of it. Returns the new
/// position and the window population; an empty window leaves `x` in place.
pub fn shift_once(x: &[f64], points: &VectorSet, h: f64) -> Result<(Vec<f64>, usize)> {
    check_dim(x, points)?;
    let mut acc = WindowSum::new(x.len());
    acc.accumulate(x, points.as_slice(), Window::new(h));
    Ok((acc.mean_or(x), acc.count))
}

/// Runs one trajectory from `start` until the step length drops to
/// `conv_tol · h` or `max_iter` steps have been taken. `on_step` sees every
/// visited position, including the start.
pub fn climb(
    start: &[f64],
    points: &VectorSet,
    cfg: &ShiftConfig,
    mut on_step: impl FnMut(&[f64]),
) -> PointTrajectory {
    let window = Window::new(cfg.bandwidth_h);
    let threshold = cfg.shift_threshold();
    let mut acc = WindowSum::new(start.len());
    let mut current = start.to_vec();
    on_step(&current);
    for step in 1..=cfg.max_iter {
        acc.reset();
        acc.accumulate(&current, points.as_slice(), window);
        let next = acc.mean_or(&current);
        let moved = sq_dist(&next, &current).sqrt();
        current = next;
        on_step(&current);
        if moved <= threshold {
            return PointTrajectory { current, converged: true, iterations: step };
        }
    }
    PointTrajectory { current, converged: false, iterations: cfg.max_iter }
}

/// Classical mean-shift over every input point, followed by pruning and
/// nearest-mode labelling.
pub fn run_baseline(points: &VectorSet, cfg: &ShiftConfig) -> Result<ClusterResult> {
    cfg.validate()?;
    let started = Instant::now();
    let n = points.len();

    let trajectories: Vec<PointTrajectory> = (0..n)
        .into_par_iter()
        .map(|i| climb(points.row(i), points, cfg, |_| {}))
        .collect();

    let iterations_run = trajectories.iter().map(|t| t.iterations).max().unwrap_or(0);
    let distance_evals = trajectories.iter().map(|t| t.iterations as u64 * n as u64).sum();
    let raw: Vec<Vec<f64>> = trajectories.into_iter().map(|t| t.current).collect();
    let supports = vec![1; raw.len()];
    let mode_set = prune_modes(&raw, &supports, cfg.bandwidth_h, cfg.min_mode_support)?;
    let labels = assign_labels(points, &mode_set)?;

    Ok(ClusterResult {
        labels,
        mode_set,
        iterations_run,
        seeds_used: 0,
        seeds_discarded: 0,
        distance_evals,
        peak_batch_bytes: 0,
        wall_time: started.elapsed(),
    })
}
