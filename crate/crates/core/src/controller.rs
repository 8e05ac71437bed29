//! Adaptive seed-count control.
//!
//! A run is accepted when the seed count `N` is at least `L·M`, where `M` is
//! the number of modes it found. Below that the count is doubled and the run
//! is repeated at once with fresh seeds. Above `H·M` the run is still
//! accepted, but the next frame of a sequence starts with `N − M` seeds.

use std::time::Duration;

use crate::error::Result;
use crate::faster::run_faster_stream;
use crate::types::{ClusterResult, ShiftConfig, VectorSet};

/// Probability that each of `m` equally sized clusters receives at least one
/// of `n` seeds, under the model where every multiset of cluster counts is
/// equally likely: `C(n−1, m−1) / C(n+m−1, m−1)`.
///
/// Returns 0 when `n < m`.
pub fn coverage_probability(n: u64, m: u64) -> f64 {
    if m == 0 {
        return 1.0;
    }
    if n < m {
        return 0.0;
    }
    // C(n-1, m-1) / C(n+m-1, m-1) = prod_{j=1}^{m-1} (n - j) / (n + m - j)
    let mut log_p = 0.0;
    for j in 1..m {
        log_p += ((n - j) as f64).ln() - ((n + m - j) as f64).ln();
    }
    log_p.exp()
}

/// Smallest seed count accepted for `m` modes.
pub fn min_seed_bound(m: usize, low: usize) -> usize {
    m * low
}

/// What the controller decided after a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedAction {
    /// Too few seeds for the modes found: redo now with the new count.
    RetryNow,
    Accept,
    /// Result accepted; use the new, smaller count for the next frame.
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControllerRecord {
    pub n_seeds: usize,
    pub modes: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerState {
    /// Seed count for the next run.
    pub n_seeds: usize,
    pub last_modes: usize,
    /// Retries spent on the most recent frame.
    pub retries: usize,
    /// Set when the most recent frame was accepted only because `N` reached
    /// the dataset size while still below `L·M`.
    pub exhausted: bool,
    pub history: Vec<ControllerRecord>,
}

impl ControllerState {
    pub fn new(n_initial: usize) -> Self {
        Self { n_seeds: n_initial.max(1), last_modes: 0, retries: 0, exhausted: false, history: Vec::new() }
    }
}

/// Applies the seed band to a finished run with `observed_modes` modes.
///
/// `state.n_seeds` is the count that produced the run. Never returns a count
/// below 1 or above `n`.
pub fn next_seed_count(state: &ControllerState, observed_modes: usize, cfg: &ShiftConfig, n: usize) -> (SeedAction, usize) {
    let m = observed_modes.max(1);
    let current = state.n_seeds.clamp(1, n.max(1));
    if current < min_seed_bound(m, cfg.seed_low_l) && current < n {
        (SeedAction::RetryNow, (current * 2).min(n))
    } else if current > cfg.seed_high_h * m {
        (SeedAction::Decay, (current - m).clamp(1, n))
    } else {
        (SeedAction::Accept, current)
    }
}

/// Drives seeded runs over one dataset or over a sequence of frames.
#[derive(Debug, Clone)]
pub struct SeedController {
    cfg: ShiftConfig,
    state: ControllerState,
}

impl SeedController {
    pub fn new(cfg: ShiftConfig) -> Self {
        let state = ControllerState::new(cfg.n_initial);
        Self { cfg, state }
    }

    pub fn state(&self) -> &ControllerState {
        &self.state
    }

    /// Clusters one frame. Retries with doubled seed counts until the band's
    /// lower bound holds or the seed count reaches the frame size. The
    /// returned result carries the accepted pass's seed telemetry and the
    /// summed cost of all passes.
    pub fn cluster_frame(&mut self, points: &VectorSet) -> Result<ClusterResult> {
        let n = points.len();
        self.state.n_seeds = self.state.n_seeds.clamp(1, n);
        self.state.retries = 0;
        self.state.exhausted = false;

        let mut spent_evals = 0u64;
        let mut spent_time = Duration::ZERO;
        loop {
            let stream = self.state.history.len() as u64;
            let mut result = run_faster_stream(points, self.state.n_seeds, &self.cfg, stream)?;
            let m = result.mode_set.len();
            spent_evals += result.distance_evals;
            spent_time += result.wall_time;

            let (action, next) = next_seed_count(&self.state, m, &self.cfg, n);
            self.state.last_modes = m;
            let accepted = action != SeedAction::RetryNow;
            self.state.history.push(ControllerRecord { n_seeds: self.state.n_seeds, modes: m, accepted });
            if accepted {
                self.state.exhausted = self.state.n_seeds < min_seed_bound(m, self.cfg.seed_low_l);
                self.state.n_seeds = next;
                result.distance_evals = spent_evals;
                result.wall_time = spent_time;
                return Ok(result);
            }
            self.state.retries += 1;
            self.state.n_seeds = next;
        }
    }
}

/// Adaptive clustering of a single dataset starting from `cfg.n_initial` seeds.
pub fn run_adaptive(points: &VectorSet, cfg: &ShiftConfig) -> Result<(ClusterResult, ControllerState)> {
    cfg.validate()?;
    let mut ctl = SeedController::new(cfg.clone());
    let result = ctl.cluster_frame(points)?;
    Ok((result, ctl.state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> f64 {
        let mut r = 1.0f64;
        for i in 0..k {
            r = r * (n - i) as f64 / (i + 1) as f64;
        }
        r
    }

    fn state(n: usize) -> ControllerState {
        ControllerState::new(n)
    }

    #[test]
    fn coverage_small_cases() {
        assert!((coverage_probability(2, 2) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(coverage_probability(17, 1), 1.0);
        assert_eq!(coverage_probability(3, 5), 0.0);
        let p80 = coverage_probability(80, 10);
        assert!(p80 > 0.0 && p80 < 1.0);
        assert!(p80 > coverage_probability(40, 10));
    }

    #[test]
    fn coverage_matches_direct_binomials() {
        for m in 1..=8u64 {
            for n in m..=30 {
                let direct = binom(n - 1, m - 1) / binom(n + m - 1, m - 1);
                let got = coverage_probability(n, m);
                assert!((got - direct).abs() <= 1e-12 * direct.max(1e-300), "n={n} m={m}");
            }
        }
    }

    #[test]
    fn coverage_monotone_in_seed_count() {
        for m in 1..=20u64 {
            let mut prev = 0.0;
            for n in m..=200 {
                let p = coverage_probability(n, m);
                assert!(p >= prev - 1e-15, "n={n} m={m}");
                assert!((0.0..=1.0).contains(&p));
                prev = p;
            }
        }
    }

    #[test]
    fn coverage_large_arguments_stay_finite() {
        let p = coverage_probability(1_000_000, 500);
        assert!(p.is_finite() && p > 0.0 && p < 1.0);
    }

    #[test]
    fn lower_bound() {
        assert_eq!(min_seed_bound(10, 8), 80);
        assert_eq!(min_seed_bound(1, 8), 8);
        assert_eq!(min_seed_bound(3, 1), 3);
    }

    #[test]
    fn band_decisions() {
        let cfg = ShiftConfig::default();
        assert_eq!(next_seed_count(&state(128), 20, &cfg, 10_000), (SeedAction::RetryNow, 256));
        assert_eq!(next_seed_count(&state(128), 10, &cfg, 10_000), (SeedAction::Accept, 128));
        assert_eq!(next_seed_count(&state(512), 10, &cfg, 10_000), (SeedAction::Decay, 502));
    }

    #[test]
    fn retry_caps_at_dataset_size() {
        let cfg = ShiftConfig::default();
        assert_eq!(next_seed_count(&state(128), 50, &cfg, 200), (SeedAction::RetryNow, 200));
        assert_eq!(next_seed_count(&state(200), 50, &cfg, 200), (SeedAction::Accept, 200));
    }

    #[test]
    fn next_count_stays_in_range() {
        let cfg = ShiftConfig::default();
        for n in [1usize, 2, 7, 100, 1000] {
            for start in [1usize, 3, 64, 128, 999, 5000] {
                for m in 1..40 {
                    let (_, next) = next_seed_count(&state(start), m, &cfg, n);
                    assert!(next >= 1 && next <= n, "n={n} start={start} m={m} next={next}");
                }
            }
        }
    }
}
