//! Domain types shared by both engines.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};

/// A set of `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSet {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl VectorSet {
    /// Builds a set from row-major data. Rejects empty input, ragged length
    /// and non-finite entries.
    pub fn new(data: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(ShiftError::InvalidInput("dimension must be at least 1".into()));
        }
        if data.is_empty() {
            return Err(ShiftError::InvalidInput("vector set must contain at least one point".into()));
        }
        if data.len() % d != 0 {
            return Err(ShiftError::InvalidInput(format!(
                "{} values do not divide into rows of dimension {d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(ShiftError::InvalidInput(format!(
                "non-finite value in row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        let n = data.len() / d;
        Ok(Self { data, n, d })
    }

    /// Builds a set from a list of rows, all of which must share a dimension.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(ShiftError::DimensionMismatch { expected: d, actual: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(data, d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Always false; a `VectorSet` holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.data
    }
}

/// Tuning knobs shared by the baseline engine, the seeded engine and the
/// seed-count controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftConfig {
    /// Window radius `h`.
    pub bandwidth_h: f64,
    /// Convergence threshold as a fraction of `h`.
    pub conv_tol: f64,
    pub max_iter: usize,
    /// Fraction of converged seeds at which a batch is stopped.
    pub early_stop_gamma: f64,
    /// Starting seed count for the adaptive controller.
    pub n_initial: usize,
    /// Accepted runs require `N >= seed_low_l * M`.
    pub seed_low_l: usize,
    /// Runs with `N > seed_high_h * M` decay the seed count for the next frame.
    pub seed_high_h: usize,
    pub rng_seed: u64,
    pub min_mode_support: usize,
    /// Number of points processed per block in the batched update.
    pub chunk_size: usize,
}

impl Default for ShiftConfig {
    fn default() -> Self {
        Self {
            bandwidth_h: 1.0,
            conv_tol: 1e-3,
            max_iter: 300,
            early_stop_gamma: 0.95,
            n_initial: 128,
            seed_low_l: 8,
            seed_high_h: 32,
            rng_seed: 0,
            min_mode_support: 1,
            chunk_size: 4096,
        }
    }
}

impl ShiftConfig {
    pub fn with_bandwidth(mut self, h: f64) -> Self {
        self.bandwidth_h = h;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(ShiftError::Config(msg));
        if !(self.bandwidth_h.is_finite() && self.bandwidth_h > 0.0) {
            return fail(format!("bandwidth must be positive and finite, got {}", self.bandwidth_h));
        }
        if !(self.conv_tol.is_finite() && self.conv_tol > 0.0) {
            return fail(format!("conv_tol must be positive, got {}", self.conv_tol));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be at least 1".into());
        }
        if !(self.early_stop_gamma > 0.0 && self.early_stop_gamma <= 1.0) {
            return fail(format!("gamma must lie in (0, 1], got {}", self.early_stop_gamma));
        }
        if self.n_initial == 0 {
            return fail("n_initial must be at least 1".into());
        }
        if self.seed_low_l == 0 || self.seed_low_l >= self.seed_high_h {
            return fail(format!(
                "seed band requires 1 <= L < H, got L={} H={}",
                self.seed_low_l, self.seed_high_h
            ));
        }
        if self.chunk_size == 0 {
            return fail("chunk_size must be at least 1".into());
        }
        Ok(())
    }

    /// Absolute shift length below which a trajectory counts as converged.
    pub fn shift_threshold(&self) -> f64 {
        self.conv_tol * self.bandwidth_h
    }
}

/// Pruned cluster modes with the number of seeds (or points) merged into each.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    positions: Vec<f64>,
    support: Vec<usize>,
    d: usize,
}

impl ModeSet {
    pub(crate) fn from_parts(positions: Vec<f64>, support: Vec<usize>, d: usize) -> Self {
        debug_assert_eq!(positions.len(), support.len() * d);
        Self { positions, support, d }
    }

    /// Builds a mode set directly, e.g. from known centers. Supports must be
    /// at least one.
    pub fn new(positions: Vec<f64>, support: Vec<usize>, d: usize) -> Result<Self> {
        if d == 0 || positions.len() != support.len() * d {
            return Err(ShiftError::InvalidInput(format!(
                "{} coordinates do not describe {} modes of dimension {d}",
                positions.len(),
                support.len()
            )));
        }
        if support.iter().any(|&s| s == 0) {
            return Err(ShiftError::InvalidInput("mode support must be at least 1".into()));
        }
        Ok(Self { positions, support, d })
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mode(&self, i: usize) -> &[f64] {
        &self.positions[i * self.d..(i + 1) * self.d]
    }

    pub fn modes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.positions.chunks_exact(self.d)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

/// Output of a clustering run.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    /// Index into `mode_set` for every input point.
    pub labels: Vec<usize>,
    pub mode_set: ModeSet,
    pub iterations_run: usize,
    /// Seeds drawn for the final pass; zero for the baseline engine.
    pub seeds_used: usize,
    pub seeds_discarded: usize,
    /// Point-to-point distance evaluations spent on shifting, across all passes.
    pub distance_evals: u64,
    /// Transient bytes held by one block of the batched update.
    pub peak_batch_bytes: u64,
    pub wall_time: Duration,
}
