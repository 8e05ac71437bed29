//! Deterministic synthetic 2-D datasets: Gaussian blobs and their variants,
//! a uniform square, noisy concentric circles and sheared blobs.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShiftError};
use crate::metric::sq_dist;
use crate::types::VectorSet;

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
/// Minimum center spacing in units of the base noise scale.
const SEPARATION_SIGMAS: f64 = 10.0;
pub const LARGE_VARIANCE_FACTOR: f64 = 3.0;
/// Per-cluster noise multipliers for varied-variance blobs, cycled.
pub const VARIED_FACTORS: [f64; 3] = [1.0, 2.5, 0.5];
pub const ANISOTROPIC_SHEAR: [[f64; 2]; 2] = [[0.6, -0.6], [-0.4, 0.8]];
pub const CIRCLE_RADII: (f64, f64) = (1.0, 0.5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Blobs,
    LargeVarBlobs,
    VariedVarBlobs,
    UniformSquare,
    NoisyCircles,
    Anisotropic,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 6] = [
        DatasetKind::Blobs,
        DatasetKind::LargeVarBlobs,
        DatasetKind::VariedVarBlobs,
        DatasetKind::UniformSquare,
        DatasetKind::NoisyCircles,
        DatasetKind::Anisotropic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Blobs => "blobs",
            DatasetKind::LargeVarBlobs => "large_var_blobs",
            DatasetKind::VariedVarBlobs => "varied_var_blobs",
            DatasetKind::UniformSquare => "uniform_square",
            DatasetKind::NoisyCircles => "noisy_circles",
            DatasetKind::Anisotropic => "anisotropic",
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetKind {
    type Err = ShiftError;

    fn from_str(s: &str) -> Result<Self> {
        DatasetKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ShiftError::UnsupportedKind(s.to_string()))
    }
}

/// Parameters of a synthetic dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub kind: DatasetKind,
    pub n_points: usize,
    pub n_clusters: usize,
    pub noise_sigma: f64,
    pub rng_seed: u64,
    /// Centers (and uniform points) lie in `[-box_extent, box_extent]²`.
    pub box_extent: f64,
}

impl GenSpec {
    /// Blobs with the given size and cluster count, `σ = 0.1`, box extent 10.
    pub fn blobs(n_points: usize, n_clusters: usize, rng_seed: u64) -> Self {
        Self { kind: DatasetKind::Blobs, n_points, n_clusters, noise_sigma: 0.1, rng_seed, box_extent: 10.0 }
    }

    pub fn with_kind(mut self, kind: DatasetKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 || self.n_points < self.n_clusters {
            return Err(ShiftError::Config(format!(
                "need n_points >= n_clusters >= 1, got {} points and {} clusters",
                self.n_points, self.n_clusters
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(ShiftError::Config(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(self.box_extent.is_finite() && self.box_extent > 0.0) {
            return Err(ShiftError::Config(format!("box_extent must be positive, got {}", self.box_extent)));
        }
        Ok(())
    }
}

/// A generated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: VectorSet,
    pub labels: Vec<usize>,
    /// Cluster centers, when the kind has them.
    pub centers: Option<Vec<Vec<f64>>>,
}

/// Isotropic Gaussian blobs around well-separated random centers.
pub fn gen_blobs(spec: &GenSpec) -> Result<(VectorSet, Vec<usize>, Vec<Vec<f64>>)> {
    if spec.kind != DatasetKind::Blobs {
        return Err(ShiftError::UnsupportedKind(spec.kind.to_string()));
    }
    let ds = blob_family(spec, |_| 1.0, None)?;
    Ok((ds.points, ds.labels, ds.centers.unwrap_or_default()))
}

/// Any of the non-blob kinds. Blob-like kinds also report their centers in
/// [`generate`]; this entry point returns points and labels only.
pub fn gen_variants(spec: &GenSpec) -> Result<(VectorSet, Vec<usize>)> {
    if spec.kind == DatasetKind::Blobs {
        return Err(ShiftError::UnsupportedKind(spec.kind.to_string()));
    }
    let ds = generate(spec)?;
    Ok((ds.points, ds.labels))
}

/// Generates any kind.
pub fn generate(spec: &GenSpec) -> Result<Dataset> {
    spec.validate()?;
    match spec.kind {
        DatasetKind::Blobs => blob_family(spec, |_| 1.0, None),
        DatasetKind::LargeVarBlobs => blob_family(spec, |_| LARGE_VARIANCE_FACTOR, None),
        DatasetKind::VariedVarBlobs => blob_family(spec, |k| VARIED_FACTORS[k % VARIED_FACTORS.len()], None),
        DatasetKind::Anisotropic => blob_family(spec, |_| 1.0, Some(ANISOTROPIC_SHEAR)),
        DatasetKind::UniformSquare => Ok(uniform_square(spec)),
        DatasetKind::NoisyCircles => Ok(noisy_circles(spec)),
    }
}

/// Blobs mapped through an arbitrary linear transform, centers included.
pub fn gen_anisotropic_with(spec: &GenSpec, transform: [[f64; 2]; 2]) -> Result<Dataset> {
    spec.validate()?;
    blob_family(spec, |_| 1.0, Some(transform))
}

fn cluster_sizes(n: usize, k: usize) -> impl Iterator<Item = usize> {
    (0..k).map(move |c| n / k + usize::from(c < n % k))
}

fn blob_family(spec: &GenSpec, sigma_factor: impl Fn(usize) -> f64, transform: Option<[[f64; 2]; 2]>) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let centers = place_centers(&mut rng, spec)?;

    let mut data = Vec::with_capacity(spec.n_points * 2);
    let mut labels = Vec::with_capacity(spec.n_points);
    for (k, size) in cluster_sizes(spec.n_points, spec.n_clusters).enumerate() {
        let sigma = spec.noise_sigma * sigma_factor(k);
        for _ in 0..size {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            data.extend([centers[k][0] + sigma * dx, centers[k][1] + sigma * dy]);
            labels.push(k);
        }
    }

    let mut centers = centers;
    if let Some(t) = transform {
        let apply = |x: f64, y: f64| [t[0][0] * x + t[1][0] * y, t[0][1] * x + t[1][1] * y];
        for p in data.chunks_exact_mut(2) {
            let q = apply(p[0], p[1]);
            p.copy_from_slice(&q);
        }
        for c in centers.iter_mut() {
            *c = apply(c[0], c[1]).to_vec();
        }
    }

    Ok(Dataset { points: VectorSet::new(data, 2)?, labels, centers: Some(centers) })
}

fn place_centers(rng: &mut ChaCha8Rng, spec: &GenSpec) -> Result<Vec<Vec<f64>>> {
    let min_sep2 = (SEPARATION_SIGMAS * spec.noise_sigma).powi(2);
    let b = spec.box_extent;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.n_clusters);
    let mut attempts = 0;
    while centers.len() < spec.n_clusters {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(ShiftError::CenterPlacement);
        }
        attempts += 1;
        let c = vec![rng.random_range(-b..=b), rng.random_range(-b..=b)];
        if centers.iter().all(|o| sq_dist(o, &c) >= min_sep2) {
            centers.push(c);
        }
    }
    Ok(centers)
}

fn uniform_square(spec: &GenSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let b = spec.box_extent;
    let data = (0..spec.n_points * 2).map(|_| rng.random_range(-b..=b)).collect();
    Dataset {
        points: VectorSet::new(data, 2).expect("uniform square is finite and nonempty"),
        labels: vec![0; spec.n_points],
        centers: None,
    }
}

/// Outer circle gets label 0 and the first half of the points (rounded up),
/// the inner circle label 1. Angles are evenly spaced; noise is radial.
fn noisy_circles(spec: &GenSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let outer = spec.n_points - spec.n_points / 2;
    let mut data = Vec::with_capacity(spec.n_points * 2);
    let mut labels = Vec::with_capacity(spec.n_points);
    for (label, radius, count) in [(0, CIRCLE_RADII.0, outer), (1, CIRCLE_RADII.1, spec.n_points / 2)] {
        for i in 0..count {
            let theta = TAU * i as f64 / count as f64;
            let noise: f64 = rng.sample(StandardNormal);
            let r = radius + spec.noise_sigma * noise;
            data.extend([r * theta.cos(), r * theta.sin()]);
            labels.push(label);
        }
    }
    Dataset {
        points: VectorSet::new(data, 2).expect("circles are finite and nonempty"),
        labels,
        centers: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_per_cluster_near_center() {
        let spec = GenSpec::blobs(10, 10, 7);
        let (pts, labels, centers) = gen_blobs(&spec).unwrap();
        assert_eq!(pts.len(), 10);
        assert_eq!(labels, (0..10).collect::<Vec<_>>());
        for (i, p) in pts.rows().enumerate() {
            assert!(sq_dist(p, &centers[labels[i]]).sqrt() <= 6.0 * spec.noise_sigma);
        }
    }

    #[test]
    fn zero_noise_points_sit_on_centers() {
        let mut spec = GenSpec::blobs(50, 4, 3);
        spec.noise_sigma = 0.0;
        let (pts, labels, centers) = gen_blobs(&spec).unwrap();
        for (i, p) in pts.rows().enumerate() {
            assert_eq!(p, centers[labels[i]].as_slice());
        }
    }

    #[test]
    fn centers_are_separated() {
        let spec = GenSpec::blobs(1000, 10, 11);
        let (_, _, centers) = gen_blobs(&spec).unwrap();
        for i in 0..centers.len() {
            for j in i + 1..centers.len() {
                assert!(sq_dist(&centers[i], &centers[j]).sqrt() >= 10.0 * spec.noise_sigma);
            }
        }
    }

    #[test]
    fn placement_failure_reported() {
        let mut spec = GenSpec::blobs(100, 50, 1);
        spec.noise_sigma = 5.0;
        assert_eq!(gen_blobs(&spec), Err(ShiftError::CenterPlacement));
    }

    #[test]
    fn table_series_sizes_and_balance() {
        for size in [1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000, 200_000] {
            let (pts, labels, centers) = gen_blobs(&GenSpec::blobs(size, 10, 0)).unwrap();
            assert_eq!(pts.len(), size);
            assert_eq!(centers.len(), 10);
            let mut counts = [0usize; 10];
            labels.iter().for_each(|&l| counts[l] += 1);
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        let mut counts = [0usize; 7];
        gen_blobs(&GenSpec::blobs(1003, 7, 0)).unwrap().1.iter().for_each(|&l| counts[l] += 1);
        assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
    }

    #[test]
    fn uniform_square_single_label() {
        let spec = GenSpec::blobs(300, 1, 5).with_kind(DatasetKind::UniformSquare);
        let (pts, labels) = gen_variants(&spec).unwrap();
        assert!(labels.iter().all(|&l| l == 0));
        assert!(pts.as_slice().iter().all(|v| v.abs() <= spec.box_extent));
    }

    #[test]
    fn circles_without_noise() {
        let mut spec = GenSpec::blobs(301, 2, 5).with_kind(DatasetKind::NoisyCircles);
        spec.noise_sigma = 0.0;
        let (pts, labels) = gen_variants(&spec).unwrap();
        for (p, &l) in pts.rows().zip(&labels) {
            let r = p[0].hypot(p[1]);
            let want = if l == 0 { 1.0 } else { 0.5 };
            assert!((r - want).abs() <= 1e-15, "radius {r}");
        }
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 151);
    }

    #[test]
    fn identity_shear_equals_blobs() {
        let spec = GenSpec::blobs(500, 5, 21);
        let (pts, labels, centers) = gen_blobs(&spec).unwrap();
        let ds = gen_anisotropic_with(&spec, [[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(ds.points, pts);
        assert_eq!(ds.labels, labels);
        assert_eq!(ds.centers.unwrap(), centers);
    }

    #[test]
    fn same_spec_same_bits() {
        for kind in DatasetKind::ALL {
            let spec = GenSpec::blobs(400, 3, 99).with_kind(kind);
            assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap(), "{kind}");
        }
    }

    #[test]
    fn kind_dispatch_errors() {
        assert!(gen_blobs(&GenSpec::blobs(10, 2, 0).with_kind(DatasetKind::NoisyCircles)).is_err());
        assert!(gen_variants(&GenSpec::blobs(10, 2, 0)).is_err());
        assert!("spiral".parse::<DatasetKind>().is_err());
        assert_eq!("large_var_blobs".parse::<DatasetKind>().unwrap(), DatasetKind::LargeVarBlobs);
    }

    #[test]
    fn varied_blobs_spread_differently() {
        let mut spec = GenSpec::blobs(3000, 3, 4).with_kind(DatasetKind::VariedVarBlobs);
        spec.noise_sigma = 1.0;
        let ds = generate(&spec).unwrap();
        let centers = ds.centers.unwrap();
        let spread: Vec<f64> = (0..3)
            .map(|k| {
                let members: Vec<&[f64]> = ds.points.rows().zip(&ds.labels).filter(|(_, &l)| l == k).map(|(p, _)| p).collect();
                (members.iter().map(|p| sq_dist(p, &centers[k])).sum::<f64>() / members.len() as f64 / 2.0).sqrt()
            })
            .collect();
        for (s, f) in spread.iter().zip(VARIED_FACTORS) {
            assert!((s / f - 1.0).abs() < 0.1, "spread {s} for factor {f}");
        }
    }
}
