//! Seeded, batched mean-shift with early stopping.
//!
//! Instead of climbing from every input point, a random subset of seeds climbs
//! in lock-step. Each batch iteration computes, for every live seed, the mean
//! of all points inside its window by streaming over the full point set in
//! fixed-size blocks; no neighbor search is done. Iteration stops once a
//! `gamma` fraction of seeds has converged and the stragglers are discarded.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, ShiftError};
use crate::metric::{sq_dist, Window, WindowSum};
use crate::modes::{assign_labels, prune_modes};
use crate::types::{ClusterResult, ShiftConfig, VectorSet};

/// Positions and flags for a batch of seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedBatch {
    positions: Vec<f64>,
    d: usize,
    /// False once a seed has been discarded.
    pub active: Vec<bool>,
    pub converged: Vec<bool>,
    /// Length of each seed's most recent step; infinite before the first.
    pub last_shift: Vec<f64>,
}

impl SeedBatch {
    /// A batch starting at the given rows, all active and unconverged.
    pub fn from_positions(positions: Vec<f64>, d: usize) -> Self {
        let n = positions.len() / d;
        Self {
            positions,
            d,
            active: vec![true; n],
            converged: vec![false; n],
            last_shift: vec![f64::INFINITY; n],
        }
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.d)
    }

    /// Seeds that still move: active and not yet converged.
    pub fn live(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.active[i] && !self.converged[i]).collect()
    }

    pub fn converged_count(&self) -> usize {
        self.converged.iter().zip(&self.active).filter(|(&c, &a)| c && a).count()
    }

    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Marks every active, unconverged seed as discarded and returns how many
    /// were dropped.
    pub fn discard_unconverged(&mut self) -> usize {
        let mut dropped = 0;
        for (a, &c) in self.active.iter_mut().zip(&self.converged) {
            if *a && !c {
                *a = false;
                dropped += 1;
            }
        }
        dropped
    }
}

/// Draws `n_seeds` distinct input points (clamped to `n`) as starting seeds.
pub fn sample_seeds(points: &VectorSet, n_seeds: usize, rng_seed: u64) -> Result<SeedBatch> {
    sample_seeds_from_stream(points, n_seeds, rng_seed, 0)
}

/// As [`sample_seeds`], reading from an independent stream of the same seed so
/// that retries draw fresh seeds.
pub fn sample_seeds_from_stream(points: &VectorSet, n_seeds: usize, rng_seed: u64, stream: u64) -> Result<SeedBatch> {
    if n_seeds == 0 {
        return Err(ShiftError::Config("seed count must be at least 1".into()));
    }
    let n = points.len();
    let take = n_seeds.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(stream);
    let picks = rand::seq::index::sample(&mut rng, n, take);
    let positions = picks.iter().flat_map(|i| points.row(i).iter().copied()).collect();
    Ok(SeedBatch::from_positions(positions, points.dim()))
}

/// Moves every live seed to the mean of the points within `h`, streaming the
/// point set in blocks of `cfg.chunk_size`. Seeds whose step is at most
/// `conv_tol · h` are marked converged. Returns the number of distance
/// evaluations performed, always `live seeds × n`.
pub fn batch_shift_iteration(batch: &mut SeedBatch, points: &VectorSet, cfg: &ShiftConfig) -> u64 {
    let live = batch.live();
    if live.is_empty() {
        return 0;
    }
    let d = points.dim();
    let window = Window::new(cfg.bandwidth_h);
    let mut sums: Vec<WindowSum> = live.iter().map(|_| WindowSum::new(d)).collect();
    let mut evals = 0u64;
    for block in points.as_slice().chunks(cfg.chunk_size * d) {
        let positions = &batch.positions;
        evals += sums
            .par_iter_mut()
            .zip(live.par_iter())
            .map(|(acc, &s)| acc.accumulate(&positions[s * d..(s + 1) * d], block, window))
            .sum::<u64>();
    }

    let threshold = cfg.shift_threshold();
    for (acc, &s) in sums.iter().zip(&live) {
        let current = &mut batch.positions[s * d..(s + 1) * d];
        let next = acc.mean_or(current);
        let moved = sq_dist(&next, current).sqrt();
        current.copy_from_slice(&next);
        batch.last_shift[s] = moved;
        if moved <= threshold {
            batch.converged[s] = true;
        }
    }
    evals
}

/// True once the converged share of active seeds reaches `gamma`.
pub fn early_stop_check(batch: &SeedBatch, gamma: f64) -> bool {
    let active = batch.active_count();
    if active == 0 {
        return true;
    }
    batch.converged_count() as f64 / active as f64 >= gamma
}

/// Seeded mean-shift over `n_seeds` random seeds.
pub fn run_faster(points: &VectorSet, n_seeds: usize, cfg: &ShiftConfig) -> Result<ClusterResult> {
    run_faster_stream(points, n_seeds, cfg, 0)
}

pub(crate) fn run_faster_stream(points: &VectorSet, n_seeds: usize, cfg: &ShiftConfig, stream: u64) -> Result<ClusterResult> {
    cfg.validate()?;
    let started = Instant::now();
    let mut batch = sample_seeds_from_stream(points, n_seeds, cfg.rng_seed, stream)?;
    let seeds_used = batch.len();

    let mut iterations_run = 0;
    let mut distance_evals = 0u64;
    while iterations_run < cfg.max_iter && !batch.live().is_empty() {
        distance_evals += batch_shift_iteration(&mut batch, points, cfg);
        iterations_run += 1;
        if early_stop_check(&batch, cfg.early_stop_gamma) {
            break;
        }
    }
    let seeds_discarded = batch.discard_unconverged();

    let raw: Vec<Vec<f64>> = (0..batch.len())
        .filter(|&i| batch.active[i])
        .map(|i| batch.position(i).to_vec())
        .collect();
    if raw.is_empty() {
        return Err(ShiftError::NoSeedsConverged);
    }
    let supports = vec![1; raw.len()];
    let mode_set = prune_modes(&raw, &supports, cfg.bandwidth_h, cfg.min_mode_support)?;
    let labels = assign_labels(points, &mode_set)?;

    Ok(ClusterResult {
        labels,
        mode_set,
        iterations_run,
        seeds_used,
        seeds_discarded,
        distance_evals,
        peak_batch_bytes: peak_batch_bytes(seeds_used, points.len(), cfg.chunk_size),
        wall_time: started.elapsed(),
    })
}

/// Bytes of one block of the seed-by-point distance matrix.
pub fn peak_batch_bytes(n_seeds: usize, n_points: usize, chunk_size: usize) -> u64 {
    (n_seeds as u64) * (chunk_size.min(n_points) as u64) * std::mem::size_of::<f64>() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{run_baseline, shift_once};
    use crate::metric::kde_value;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn blobs(seed: u64, centers: &[[f64; 2]], per: usize, sigma: f64) -> VectorSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = Vec::new();
        for c in centers {
            for _ in 0..per {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                data.extend([c[0] + sigma * dx, c[1] + sigma * dy]);
            }
        }
        VectorSet::new(data, 2).unwrap()
    }

    fn batch_of(counts: (usize, usize)) -> SeedBatch {
        let (conv, total) = counts;
        let mut b = SeedBatch::from_positions(vec![0.0; total], 1);
        b.converged.iter_mut().take(conv).for_each(|c| *c = true);
        b
    }

    #[test]
    fn exhaustive_sample_is_a_permutation() {
        let pts = blobs(1, &[[0.0, 0.0]], 40, 1.0);
        let b = sample_seeds(&pts, 40, 3).unwrap();
        let mut got: Vec<Vec<u64>> = b.positions().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
        let mut want: Vec<Vec<u64>> = pts.rows().map(|p| p.iter().map(|v| v.to_bits()).collect()).collect();
        got.sort();
        want.sort();
        assert_eq!(got, want);
        assert!(b.active.iter().all(|&a| a) && b.converged.iter().all(|&c| !c));
    }

    #[test]
    fn sample_clamps_and_draws_members() {
        let pts = blobs(2, &[[0.0, 0.0]], 10, 1.0);
        assert_eq!(sample_seeds(&pts, 1000, 0).unwrap().len(), 10);
        let one = sample_seeds(&pts, 1, 4).unwrap();
        assert_eq!(one.len(), 1);
        assert!(pts.rows().any(|p| p == one.position(0)));
        assert!(sample_seeds(&pts, 0, 4).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let pts = blobs(2, &[[0.0, 0.0]], 100, 1.0);
        assert_eq!(sample_seeds(&pts, 17, 99).unwrap(), sample_seeds(&pts, 17, 99).unwrap());
        assert_ne!(
            sample_seeds_from_stream(&pts, 17, 99, 0).unwrap(),
            sample_seeds_from_stream(&pts, 17, 99, 1).unwrap()
        );
    }

    #[test]
    fn seed_at_window_mean_converges_in_one_call() {
        let pts = VectorSet::from_rows(&[[0.0, 0.0], [2.0, 0.0], [1.0, 1.0], [1.0, -1.0]]).unwrap();
        let mut b = SeedBatch::from_positions(vec![1.0, 0.0], 2);
        let cfg = ShiftConfig::default().with_bandwidth(1.5);
        batch_shift_iteration(&mut b, &pts, &cfg);
        assert!(b.converged[0]);
        assert_eq!(b.position(0), &[1.0, 0.0]);
        assert_eq!(b.last_shift[0], 0.0);
    }

    #[test]
    fn batch_equals_independent_shifts() {
        let pts = blobs(7, &[[0.0, 0.0], [2.0, 1.0]], 100, 0.7);
        let cfg = ShiftConfig::default().with_bandwidth(0.9);
        let mut b = sample_seeds(&pts, 8, 5).unwrap();
        let expected: Vec<Vec<f64>> = b.positions().map(|p| shift_once(p, &pts, 0.9).unwrap().0).collect();
        let evals = batch_shift_iteration(&mut b, &pts, &cfg);
        assert_eq!(evals, 8 * 200);
        for (i, e) in expected.iter().enumerate() {
            assert_eq!(b.position(i), e.as_slice());
        }
    }

    #[test]
    fn chunk_size_does_not_change_positions() {
        let pts = blobs(8, &[[0.0, 0.0], [3.0, 0.0]], 150, 0.8);
        let mut small = ShiftConfig::default().with_bandwidth(1.0);
        small.chunk_size = 1;
        let mut whole = small.clone();
        whole.chunk_size = pts.len();
        let mut a = sample_seeds(&pts, 20, 1).unwrap();
        let mut b = a.clone();
        for _ in 0..5 {
            batch_shift_iteration(&mut a, &pts, &small);
            batch_shift_iteration(&mut b, &pts, &whole);
        }
        assert_eq!(a, b);
    }

    #[test]
    fn early_stop_thresholds() {
        assert!(!early_stop_check(&batch_of((9, 10)), 1.0));
        assert!(early_stop_check(&batch_of((10, 10)), 1.0));
        assert!(early_stop_check(&batch_of((95, 100)), 0.95));
        assert!(!early_stop_check(&batch_of((94, 100)), 0.95));
    }

    #[test]
    fn exhaustive_seeding_reproduces_baseline() {
        let centers = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]];
        let pts = blobs(4, &centers, 100, 0.2);
        let mut cfg = ShiftConfig::default().with_bandwidth(1.0);
        cfg.early_stop_gamma = 1.0;
        let slow = run_baseline(&pts, &cfg).unwrap();
        let fast = run_faster(&pts, pts.len(), &cfg).unwrap();
        assert_eq!(fast.mode_set.len(), slow.mode_set.len());
        for (a, b) in fast.mode_set.modes().zip(slow.mode_set.modes()) {
            assert!(sq_dist(a, b).sqrt() <= cfg.shift_threshold());
        }
        assert_eq!(fast.labels, slow.labels);
        assert_eq!(fast.seeds_used, 300);
        assert_eq!(fast.seeds_discarded, 0);
    }

    #[test]
    fn work_counter_matches_live_seeds() {
        let pts = blobs(10, &[[0.0, 0.0], [4.0, 4.0]], 200, 0.5);
        let cfg = ShiftConfig::default().with_bandwidth(1.0);
        let mut b = sample_seeds(&pts, 32, 2).unwrap();
        let mut expected = 0u64;
        let mut counted = 0u64;
        while !b.live().is_empty() {
            expected += b.live().len() as u64 * pts.len() as u64;
            counted += batch_shift_iteration(&mut b, &pts, &cfg);
        }
        assert_eq!(counted, expected);

        let res = run_faster(&pts, 32, &cfg).unwrap();
        assert_eq!(res.seeds_used - res.seeds_discarded, res.mode_set.support().iter().sum::<usize>());
    }

    #[test]
    fn kde_never_decreases_per_seed() {
        let pts = blobs(12, &[[0.0, 0.0], [2.5, 0.0]], 150, 0.6);
        let cfg = ShiftConfig::default().with_bandwidth(0.7);
        let mut b = sample_seeds(&pts, 30, 8).unwrap();
        let mut last: Vec<f64> = b.positions().map(|p| kde_value(p, &pts, 0.7).unwrap()).collect();
        for _ in 0..30 {
            batch_shift_iteration(&mut b, &pts, &cfg);
            for (i, p) in b.positions().enumerate() {
                let v = kde_value(p, &pts, 0.7).unwrap();
                assert!(v >= last[i] - 1e-12);
                last[i] = v;
            }
        }
    }

    #[test]
    fn nothing_converges_within_budget() {
        // Both seeds step to the midpoint and neither gets another iteration.
        let pts = VectorSet::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let mut cfg = ShiftConfig::default().with_bandwidth(2.0);
        cfg.max_iter = 1;
        cfg.conv_tol = 1e-12;
        assert_eq!(run_faster(&pts, 16, &cfg), Err(ShiftError::NoSeedsConverged));
    }

    #[test]
    fn analytic_peak_bytes() {
        assert_eq!(peak_batch_bytes(128, 200_000, 4096), 128 * 4096 * 8);
        assert_eq!(peak_batch_bytes(10, 100, 4096), 10 * 100 * 8);
    }
}
