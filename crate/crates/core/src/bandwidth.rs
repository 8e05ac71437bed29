//! Bandwidth estimation from k-nearest-neighbor distances.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ShiftError};
use crate::metric::sq_dist;
use crate::types::VectorSet;

pub const DEFAULT_QUANTILE: f64 = 0.3;
pub const DEFAULT_SAMPLE_CAP: usize = 500;

/// Mean distance from each sampled point to its k-th nearest neighbor inside
/// the sample, with `k = max(1, floor(quantile · sample_size))`.
///
/// When `sample_cap >= n` every point is used in input order and `rng_seed`
/// is ignored. Identical points yield `0.0`, which callers must reject as a
/// bandwidth.
pub fn estimate_bandwidth(points: &VectorSet, quantile: f64, sample_cap: usize, rng_seed: u64) -> Result<f64> {
    if points.len() < 2 {
        return Err(ShiftError::InvalidInput("bandwidth estimation needs at least two points".into()));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(ShiftError::Config(format!("quantile must lie in (0, 1), got {quantile}")));
    }
    if sample_cap < 2 {
        return Err(ShiftError::Config("sample_cap must be at least 2".into()));
    }

    let n = points.len();
    let sample: Vec<usize> = if sample_cap >= n {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        rand::seq::index::sample(&mut rng, n, sample_cap).into_vec()
    };
    let s = sample.len();
    let k = ((quantile * s as f64).floor() as usize).clamp(1, s - 1);

    let mut dists = vec![0.0; s - 1];
    let mut total = 0.0;
    for (a, &i) in sample.iter().enumerate() {
        let p = points.row(i);
        let mut slot = 0;
        for (b, &j) in sample.iter().enumerate() {
            if a != b {
                dists[slot] = sq_dist(p, points.row(j));
                slot += 1;
            }
        }
        let (_, kth, _) = dists.select_nth_unstable_by(k - 1, f64::total_cmp);
        total += kth.sqrt();
    }
    Ok(total / s as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn blob(rng: &mut ChaCha8Rng, center: [f64; 2], sigma: f64, n: usize) -> Vec<f64> {
        (0..n)
            .flat_map(|_| {
                let dx: f64 = rng.sample(StandardNormal);
                let dy: f64 = rng.sample(StandardNormal);
                [center[0] + sigma * dx, center[1] + sigma * dy]
            })
            .collect::<Vec<_>>()
    }

    #[test]
    fn two_points() {
        let pts = VectorSet::from_rows(&[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        assert_eq!(estimate_bandwidth(&pts, 0.5, 500, 1).unwrap(), 2.0);
    }

    #[test]
    fn identical_points_give_zero() {
        let pts = VectorSet::from_rows(&[[1.0, 1.0]; 5]).unwrap();
        assert_eq!(estimate_bandwidth(&pts, 0.3, 500, 0).unwrap(), 0.0);
    }

    #[test]
    fn single_point_rejected() {
        let pts = VectorSet::from_rows(&[[1.0, 1.0]]).unwrap();
        assert!(estimate_bandwidth(&pts, 0.3, 500, 0).is_err());
    }

    #[test]
    fn two_blobs_wider_than_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let tight = VectorSet::new(blob(&mut rng, [0.0, 0.0], 0.1, 100), 2).unwrap();
        let mut two = blob(&mut rng, [-5.0, 0.0], 0.1, 50);
        two.extend(blob(&mut rng, [5.0, 0.0], 0.1, 50));
        let two = VectorSet::new(two, 2).unwrap();
        let h_one = estimate_bandwidth(&tight, 0.3, 500, 0).unwrap();
        let h_two = estimate_bandwidth(&two, 0.3, 500, 0).unwrap();
        assert!(h_two > h_one, "{h_two} <= {h_one}");
    }

    #[test]
    fn full_sample_ignores_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = VectorSet::new((0..200).map(|_| rng.random::<f64>()).collect(), 2).unwrap();
        let a = estimate_bandwidth(&pts, 0.3, 100, 1).unwrap();
        let b = estimate_bandwidth(&pts, 0.3, 100, 99).unwrap();
        assert_eq!(a, b);
        let c = estimate_bandwidth(&pts, 0.3, 50, 1).unwrap();
        let d = estimate_bandwidth(&pts, 0.3, 50, 1).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn permutation_invariant_with_full_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows: Vec<[f64; 2]> = (0..80).map(|_| [rng.random(), rng.random()]).collect();
        let mut shuffled = rows.clone();
        shuffled.reverse();
        shuffled.swap(3, 40);
        let a = estimate_bandwidth(&VectorSet::from_rows(&rows).unwrap(), 0.3, 500, 0).unwrap();
        let b = estimate_bandwidth(&VectorSet::from_rows(&shuffled).unwrap(), 0.3, 500, 0).unwrap();
        approx::assert_relative_eq!(a, b, max_relative = 1e-12);
    }
}
