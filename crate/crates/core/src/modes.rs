//! Mode pruning and nearest-mode label assignment, shared by both engines.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Result, ShiftError};
use crate::metric::{check_dim, sq_dist, Window};
use crate::types::{ModeSet, VectorSet};

/// Merges converged positions that lie within `h` of each other.
///
/// Candidates are visited by descending support, then ascending lexicographic
/// position. A candidate is accepted iff it is farther than `h` from every
/// mode accepted so far; otherwise its support is credited to the nearest
/// accepted mode. Modes whose final support is below `min_mode_support` are
/// dropped. The result is ordered the same way as the visit order, so pruning
/// a `ModeSet` again returns it unchanged.
pub fn prune_modes(raw_modes: &[Vec<f64>], supports: &[usize], h: f64, min_mode_support: usize) -> Result<ModeSet> {
    if raw_modes.is_empty() {
        return Err(ShiftError::InvalidInput("no candidate modes to prune".into()));
    }
    if raw_modes.len() != supports.len() {
        return Err(ShiftError::LengthMismatch { left: raw_modes.len(), right: supports.len() });
    }
    let d = raw_modes[0].len();
    if let Some(bad) = raw_modes.iter().find(|m| m.len() != d) {
        return Err(ShiftError::DimensionMismatch { expected: d, actual: bad.len() });
    }

    let mut order: Vec<usize> = (0..raw_modes.len()).collect();
    order.sort_by(|&a, &b| visit_order(&raw_modes[a], supports[a], &raw_modes[b], supports[b]));

    let window = Window::new(h);
    let mut accepted: Vec<usize> = Vec::new();
    let mut rejected: Vec<usize> = Vec::new();
    for &c in &order {
        let cand = &raw_modes[c];
        // Strictly greater than h keeps a candidate; exactly h merges.
        let clashes = accepted.iter().any(|&a| window.contains_sq(sq_dist(cand, &raw_modes[a])));
        if clashes {
            rejected.push(c);
        } else {
            accepted.push(c);
        }
    }

    let mut merged: Vec<usize> = accepted.iter().map(|&a| supports[a]).collect();
    for &r in &rejected {
        let nearest = nearest_index(&raw_modes[r], accepted.iter().map(|&a| raw_modes[a].as_slice()));
        merged[nearest] += supports[r];
    }

    let mut kept: Vec<(usize, usize)> = accepted
        .iter()
        .zip(&merged)
        .filter(|(_, &s)| s >= min_mode_support.max(1))
        .map(|(&a, &s)| (a, s))
        .collect();
    if kept.is_empty() {
        return Err(ShiftError::NoModesSurvive);
    }
    kept.sort_by(|&(a, sa), &(b, sb)| visit_order(&raw_modes[a], sa, &raw_modes[b], sb));

    let positions = kept.iter().flat_map(|&(a, _)| raw_modes[a].iter().copied()).collect();
    let support = kept.iter().map(|&(_, s)| s).collect();
    Ok(ModeSet::from_parts(positions, support, d))
}

fn visit_order(a: &[f64], sa: usize, b: &[f64], sb: usize) -> Ordering {
    sb.cmp(&sa).then_with(|| lexicographic(a, b))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Index of the nearest candidate; ties go to the lowest index.
fn nearest_index<'a>(x: &[f64], candidates: impl Iterator<Item = &'a [f64]>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in candidates.enumerate() {
        let dist = sq_dist(x, c);
        if dist < best_d {
            best = i;
            best_d = dist;
        }
    }
    best
}

/// Labels every point with the index of its nearest mode (ties to the lower
/// index).
pub fn assign_labels(points: &VectorSet, mode_set: &ModeSet) -> Result<Vec<usize>> {
    if mode_set.is_empty() {
        return Err(ShiftError::InvalidInput("cannot assign labels without modes".into()));
    }
    if let Some(first) = mode_set.modes().next() {
        check_dim(first, points)?;
    }
    Ok((0..points.len())
        .into_par_iter()
        .map(|i| nearest_index(points.row(i), mode_set.modes()))
        .collect())
}
