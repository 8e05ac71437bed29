//! Agreement metrics and the benchmark harness.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::bandwidth::estimate_bandwidth;
use crate::baseline::run_baseline;
use crate::controller::run_adaptive;
use crate::datagen::{generate, GenSpec};
use crate::error::{Result, ShiftError};
use crate::faster::run_faster;
use crate::metric::sq_dist;
use crate::types::{ClusterResult, ModeSet, ShiftConfig, VectorSet};

/// Unadjusted Rand index: the fraction of point pairs on which two labelings
/// agree about being in the same cluster or in different clusters.
pub fn rand_index(labels_a: &[usize], labels_b: &[usize]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(ShiftError::LengthMismatch { left: labels_a.len(), right: labels_b.len() });
    }
    let n = labels_a.len() as u64;
    if n < 2 {
        return Err(ShiftError::InvalidInput("rand index needs at least two labels".into()));
    }
    let pairs = |c: u64| c * c.saturating_sub(1) / 2;

    let mut joint: HashMap<(usize, usize), u64> = HashMap::new();
    let mut rows: HashMap<usize, u64> = HashMap::new();
    let mut cols: HashMap<usize, u64> = HashMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *joint.entry((a, b)).or_default() += 1;
        *rows.entry(a).or_default() += 1;
        *cols.entry(b).or_default() += 1;
    }
    let same_both: u64 = joint.values().map(|&c| pairs(c)).sum();
    let same_a: u64 = rows.values().map(|&c| pairs(c)).sum();
    let same_b: u64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    // Agreements = pairs together in both + pairs apart in both.
    let agree = total + 2 * same_both - same_a - same_b;
    Ok(agree as f64 / total as f64)
}

/// Outcome of matching found modes against reference positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeMatch {
    pub matched: usize,
    pub unmatched_found: usize,
    pub unmatched_truth: usize,
}

/// Greedy one-to-one matching in order of ascending distance; a pair is
/// eligible iff its distance is at most `tol`.
pub fn mode_match(found: &ModeSet, truth: &[Vec<f64>], tol: f64) -> ModeMatch {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, f) in found.modes().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            let dist = sq_dist(f, t).sqrt();
            if dist <= tol {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_found = vec![false; found.len()];
    let mut used_truth = vec![false; truth.len()];
    let mut matched = 0;
    for (_, i, j) in pairs {
        if !used_found[i] && !used_truth[j] {
            used_found[i] = true;
            used_truth[j] = true;
            matched += 1;
        }
    }
    ModeMatch { matched, unmatched_found: found.len() - matched, unmatched_truth: truth.len() - matched }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Baseline,
    /// Seeded engine with a fixed seed count of `n_initial`.
    Faster,
    FasterAdaptive,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Faster => "faster",
            Method::FasterAdaptive => "faster_adaptive",
        }
    }

    /// Runs this method on `points`.
    pub fn run(self, points: &VectorSet, cfg: &ShiftConfig) -> Result<ClusterResult> {
        match self {
            Method::Baseline => run_baseline(points, cfg),
            Method::Faster => run_faster(points, cfg.n_initial, cfg),
            Method::FasterAdaptive => run_adaptive(points, cfg).map(|(r, _)| r),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ShiftError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Method::Baseline),
            "faster" => Ok(Method::Faster),
            "faster_adaptive" | "adaptive" => Ok(Method::FasterAdaptive),
            other => Err(ShiftError::Config(format!("unknown method '{other}'"))),
        }
    }
}

/// Where the bandwidth for each benchmark dataset comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthSource {
    Fixed(f64),
    Estimated { quantile: f64, sample_cap: usize },
}

impl BandwidthSource {
    pub fn resolve(self, points: &VectorSet, rng_seed: u64) -> Result<f64> {
        let h = match self {
            BandwidthSource::Fixed(h) => h,
            BandwidthSource::Estimated { quantile, sample_cap } => estimate_bandwidth(points, quantile, sample_cap, rng_seed)?,
        };
        if !(h.is_finite() && h > 0.0) {
            return Err(ShiftError::Config(format!("bandwidth must be positive, got {h}")));
        }
        Ok(h)
    }
}

/// One benchmark row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub n_points: usize,
    /// Median over repeats.
    pub wall_time_s: f64,
    pub distance_evals: u64,
    pub peak_batch_bytes: u64,
    pub modes_found: usize,
    pub rand_index_vs_baseline: Option<f64>,
    /// `None` on success, otherwise the failure message.
    pub failure: Option<String>,
}

impl BenchRecord {
    fn failed(method: Method, n_points: usize, err: &ShiftError) -> Self {
        Self {
            method,
            n_points,
            wall_time_s: 0.0,
            distance_evals: 0,
            peak_batch_bytes: 0,
            modes_found: 0,
            rand_index_vs_baseline: None,
            failure: Some(err.to_string()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Median of the durations, averaging the middle pair for even counts.
pub fn median_seconds(times: &[Duration]) -> f64 {
    let mut s: Vec<f64> = times.iter().map(Duration::as_secs_f64).collect();
    s.sort_by(f64::total_cmp);
    let mid = s.len() / 2;
    if s.is_empty() {
        0.0
    } else if s.len() % 2 == 1 {
        s[mid]
    } else {
        (s[mid - 1] + s[mid]) / 2.0
    }
}

/// Runs every method on every dataset, `repeats` times each, one method at a
/// time. Rows come out dataset by dataset, methods in the order given. The
/// baseline, when requested, runs first on each dataset so the other rows can
/// report their Rand index against it.
pub fn bench_run(
    series: &[GenSpec],
    methods: &[Method],
    cfg: &ShiftConfig,
    bandwidth: BandwidthSource,
    repeats: usize,
) -> Result<Vec<BenchRecord>> {
    if repeats == 0 {
        return Err(ShiftError::Config("repeats must be at least 1".into()));
    }
    if series.is_empty() || methods.is_empty() {
        return Err(ShiftError::Config("bench needs at least one dataset and one method".into()));
    }
    let mut out = Vec::with_capacity(series.len() * methods.len());
    for spec in series {
        let ds = generate(spec)?;
        let n = ds.points.len();
        let h = match bandwidth.resolve(&ds.points, cfg.rng_seed) {
            Ok(h) => h,
            Err(e) => {
                out.extend(methods.iter().map(|&m| BenchRecord::failed(m, n, &e)));
                continue;
            }
        };
        let run_cfg = cfg.clone().with_bandwidth(h);

        let mut order: Vec<Method> = methods.to_vec();
        order.sort_by_key(|&m| m != Method::Baseline);
        let mut baseline_labels: Option<Vec<usize>> = None;
        let mut rows: HashMap<Method, BenchRecord> = HashMap::new();
        for method in order {
            if rows.contains_key(&method) {
                continue;
            }
            let rec = match time_method(method, &ds.points, &run_cfg, repeats) {
                Ok((res, wall)) => {
                    let ri = baseline_labels.as_ref().map(|b| rand_index(b, &res.labels)).transpose()?;
                    if method == Method::Baseline {
                        baseline_labels = Some(res.labels.clone());
                    }
                    BenchRecord {
                        method,
                        n_points: n,
                        wall_time_s: wall,
                        distance_evals: res.distance_evals,
                        peak_batch_bytes: res.peak_batch_bytes,
                        modes_found: res.mode_set.len(),
                        rand_index_vs_baseline: if method == Method::Baseline { Some(1.0) } else { ri },
                        failure: None,
                    }
                }
                Err(e) => BenchRecord::failed(method, n, &e),
            };
            rows.insert(method, rec);
        }
        out.extend(methods.iter().map(|m| rows[m].clone()));
    }
    Ok(out)
}

fn time_method(method: Method, points: &VectorSet, cfg: &ShiftConfig, repeats: usize) -> Result<(ClusterResult, f64)> {
    let mut times = Vec::with_capacity(repeats);
    let mut last = None;
    for _ in 0..repeats {
        let res = method.run(points, cfg)?;
        times.push(res.wall_time);
        last = Some(res);
    }
    // Timings of a few microseconds can round to zero on coarse clocks.
    let wall = median_seconds(&times).max(1e-9);
    Ok((last.expect("repeats >= 1"), wall))
}
