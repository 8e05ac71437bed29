//! Euclidean distance, the flat window and the Epanechnikov density estimate.

use crate::error::{Result, ShiftError};
use crate::types::VectorSet;

/// `‖a − b‖₂`.
pub fn euclidean_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(ShiftError::DimensionMismatch { expected: a.len(), actual: b.len() });
    }
    Ok(sq_dist(a, b).sqrt())
}

#[inline(always)]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// Membership test for the closed ball of radius `h`.
///
/// Decides `sqrt(sq) <= h` exactly as [`euclidean_distance`] would, but only
/// takes the square root for squared distances within a hair of `h²`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Window {
    h: f64,
    inner: f64,
    outer: f64,
}

impl Window {
    pub(crate) fn new(h: f64) -> Self {
        let h2 = h * h;
        Self { h, inner: h2 * (1.0 - 1e-12), outer: h2 * (1.0 + 1e-12) }
    }

    #[inline(always)]
    pub(crate) fn contains_sq(&self, sq: f64) -> bool {
        if sq < self.inner {
            true
        } else if sq > self.outer {
            false
        } else {
            sq.sqrt() <= self.h
        }
    }
}

/// Running sum of window members for one center.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct WindowSum {
    pub(crate) sum: Vec<f64>,
    pub(crate) count: usize,
}

impl WindowSum {
    pub(crate) fn new(d: usize) -> Self {
        Self { sum: vec![0.0; d], count: 0 }
    }

    pub(crate) fn reset(&mut self) {
        self.sum.iter_mut().for_each(|s| *s = 0.0);
        self.count = 0;
    }

    /// Adds every point in `rows` (a row-major block) that lies in the window
    /// around `center`, in ascending order. Returns the number of distance
    /// evaluations performed.
    #[inline]
    pub(crate) fn accumulate(&mut self, center: &[f64], rows: &[f64], window: Window) -> u64 {
        let d = center.len();
        let mut evals = 0u64;
        for p in rows.chunks_exact(d) {
            evals += 1;
            if window.contains_sq(sq_dist(center, p)) {
                for (s, v) in self.sum.iter_mut().zip(p) {
                    *s += v;
                }
                self.count += 1;
            }
        }
        evals
    }

    /// Mean of the accumulated members, or `center` itself for an empty window.
    pub(crate) fn mean_or(&self, center: &[f64]) -> Vec<f64> {
        if self.count == 0 {
            return center.to_vec();
        }
        let m = self.count as f64;
        self.sum.iter().map(|s| s / m).collect()
    }
}

/// Indicator of the window `S_h(center)`: entry `i` is true iff
/// `‖points_i − center‖ ≤ h`.
pub fn window_mask(center: &[f64], points: &VectorSet, h: f64) -> Result<Vec<bool>> {
    check_dim(center, points)?;
    let window = Window::new(h);
    Ok(points.rows().map(|p| window.contains_sq(sq_dist(center, p))).collect())
}

/// Epanechnikov kernel density estimate at `x`:
/// `1/(n hᵈ) Σ max(0, 1 − ‖x − xᵢ‖²/h²)`.
pub fn kde_value(x: &[f64], points: &VectorSet, h: f64) -> Result<f64> {
    check_dim(x, points)?;
    let h2 = h * h;
    let total: f64 = points
        .rows()
        .map(|p| (1.0 - sq_dist(x, p) / h2).max(0.0))
        .sum();
    Ok(total / (points.len() as f64 * h.powi(points.dim() as i32)))
}

pub(crate) fn check_dim(x: &[f64], points: &VectorSet) -> Result<()> {
    if x.len() != points.dim() {
        return Err(ShiftError::DimensionMismatch { expected: points.dim(), actual: x.len() });
    }
    Ok(())
}
