//! Lloyd's k-means with seeded random restarts.
//!
//! Each restart initializes centroids at `c` distinct random samples and
//! iterates assign/update until the assignment stops changing. An empty
//! cluster is re-seeded to the data point farthest from its stale centroid.
//! The restart with the lowest distortion `sum_y sum_{i: y_i = y} ||x_i - mu_y||^2`
//! wins, ties going to the lowest restart index.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernel::squared_distance;
use crate::metrics::Labeling;
use crate::seeds;

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labeling: Labeling,
    pub centroids: Array2<f64>,
    pub distortion: f64,
    pub restarts_used: usize,
}

// trace and reseed flag are consumed by the test suite
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct LloydRun {
    pub labels: Vec<usize>, // 0-based
    pub centroids: Array2<f64>,
    pub distortion: f64,
    pub distortion_trace: Vec<f64>,
    pub reseeded: bool,
}

fn nearest_centroid(x: ndarray::ArrayView1<'_, f64>, centroids: &Array2<f64>) -> usize {
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (k, row) in centroids.rows().into_iter().enumerate() {
        let d = squared_distance(x, row);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    best
}

fn distortion_of(points: ArrayView2<'_, f64>, labels: &[usize], centroids: &Array2<f64>) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &k)| squared_distance(points.row(i), centroids.row(k)))
        .sum()
}

pub(crate) fn lloyd(
    points: ArrayView2<'_, f64>,
    c: usize,
    max_iters: usize,
    seed: u64,
) -> LloydRun {
    let n = points.nrows();
    let d = points.ncols();
    let mut rng = seeds::rng(seed);
    let init = rand::seq::index::sample(&mut rng, n, c).into_vec();
    let mut centroids = Array2::zeros((c, d));
    for (k, &i) in init.iter().enumerate() {
        centroids.row_mut(k).assign(&points.row(i));
    }

    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut reseeded = false;
    for _ in 0..max_iters {
        let new_labels: Vec<usize> = (0..n)
            .map(|i| nearest_centroid(points.row(i), &centroids))
            .collect();
        let converged = new_labels == labels;
        labels = new_labels;
        if converged {
            break;
        }

        let mut counts = vec![0usize; c];
        let mut sums = Array2::<f64>::zeros((c, d));
        for (i, &k) in labels.iter().enumerate() {
            counts[k] += 1;
            for j in 0..d {
                sums[[k, j]] += points[[i, j]];
            }
        }
        let mut taken: Vec<usize> = Vec::new();
        for k in 0..c {
            if counts[k] > 0 {
                for j in 0..d {
                    centroids[[k, j]] = sums[[k, j]] / counts[k] as f64;
                }
            } else {
                // farthest point from the stale centroid
                reseeded = true;
                let far = (0..n)
                    .filter(|i| !taken.contains(i))
                    .max_by(|&a, &b| {
                        squared_distance(points.row(a), centroids.row(k))
                            .partial_cmp(&squared_distance(points.row(b), centroids.row(k)))
                            .expect("finite distances")
                    })
                    .expect("nonempty data");
                taken.push(far);
                centroids.row_mut(k).assign(&points.row(far));
            }
        }
        trace.push(distortion_of(points, &labels, &centroids));
    }

    // final centroids as exact means of the final assignment
    let mut counts = vec![0usize; c];
    let mut sums = Array2::<f64>::zeros((c, d));
    for (i, &k) in labels.iter().enumerate() {
        counts[k] += 1;
        for j in 0..d {
            sums[[k, j]] += points[[i, j]];
        }
    }
    for k in 0..c {
        if counts[k] > 0 {
            for j in 0..d {
                centroids[[k, j]] = sums[[k, j]] / counts[k] as f64;
            }
        }
    }
    let distortion = distortion_of(points, &labels, &centroids);
    LloydRun {
        labels,
        centroids,
        distortion,
        distortion_trace: trace,
        reseeded,
    }
}

/// Best of `restarts` seeded Lloyd runs.
pub fn kmeans(
    data: &Dataset,
    c: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<KMeansResult> {
    let n = data.n();
    if c < 1 || c > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {c} outside [1, {n}]"
        )));
    }
    if restarts == 0 || max_iters == 0 {
        return Err(Error::InvalidArgument(
            "restarts and max_iters must be positive".into(),
        ));
    }
    let points = data.points();
    let runs: Vec<LloydRun> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            lloyd(
                points,
                c,
                max_iters,
                seeds::split(seeds::split(seed, seeds::RESTART), r as u64),
            )
        })
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.distortion
                .partial_cmp(&b.distortion)
                .expect("finite distortion")
                .then(ia.cmp(ib))
        })
        .map(|(_, run)| run)
        .expect("at least one restart");
    let assignments: Vec<usize> = best.labels.iter().map(|&k| k + 1).collect();
    Ok(KMeansResult {
        labeling: Labeling::new(assignments, c)?,
        centroids: best.centroids.clone(),
        distortion: best.distortion,
        restarts_used: restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_four_blobs, uniform_priors};
    use crate::metrics::{adjusted_rand_index, Labeling};

    #[test]
    fn one_cluster_per_point_has_zero_distortion() {
        let data = gen_four_blobs(12, &uniform_priors(4), 3).unwrap();
        let result = kmeans(&data, 12, 5, 50, 0).unwrap();
        assert_eq!(result.distortion, 0.0);
        let mut sizes = result.labeling.cluster_sizes();
        sizes.sort_unstable();
        assert!(sizes.iter().all(|&s| s == 1));
    }

    #[test]
    fn recovers_separated_blobs() {
        let mut passes = 0;
        for seed in 0..10u64 {
            let data = gen_four_blobs(200, &uniform_priors(4), seed).unwrap();
            let result = kmeans(&data, 4, 100, 300, seed).unwrap();
            let truth = Labeling::from_assignments(data.labels().unwrap().to_vec()).unwrap();
            let ari = adjusted_rand_index(&result.labeling, &truth).unwrap();
            if ari >= 0.95 {
                passes += 1;
            }
        }
        assert!(passes >= 9, "only {passes}/10 runs reached ARI 0.95");
    }

    #[test]
    fn distortion_is_monotone_within_a_run() {
        let data = gen_four_blobs(150, &uniform_priors(4), 7).unwrap();
        for r in 0..20u64 {
            let run = lloyd(data.points(), 4, 300, r);
            if run.reseeded {
                continue;
            }
            for w in run.distortion_trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "trace increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn best_restart_beats_every_individual_run() {
        let data = gen_four_blobs(100, &uniform_priors(4), 5).unwrap();
        let seed = 13u64;
        let result = kmeans(&data, 4, 25, 300, seed).unwrap();
        for r in 0..25u64 {
            let run = lloyd(
                data.points(),
                4,
                300,
                seeds::split(seeds::split(seed, seeds::RESTART), r),
            );
            assert!(result.distortion <= run.distortion + 1e-12);
        }
    }

    #[test]
    fn distortion_matches_recomputation() {
        let data = gen_four_blobs(120, &uniform_priors(4), 2).unwrap();
        let result = kmeans(&data, 4, 10, 300, 1).unwrap();
        let recomputed = distortion_of(
            data.points(),
            &result
                .labeling
                .assignments()
                .iter()
                .map(|&y| y - 1)
                .collect::<Vec<_>>(),
            &result.centroids,
        );
        assert!((result.distortion - recomputed).abs() <= 1e-9);
    }

    #[test]
    fn seed_determinism() {
        let data = gen_four_blobs(80, &uniform_priors(4), 4).unwrap();
        let a = kmeans(&data, 4, 20, 300, 6).unwrap();
        let b = kmeans(&data, 4, 20, 300, 6).unwrap();
        assert_eq!(a.labeling, b.labeling);
        assert_eq!(a.distortion, b.distortion);
        assert_eq!(a.centroids, b.centroids);
    }
}
