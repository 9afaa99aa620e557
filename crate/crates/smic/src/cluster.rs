//! Clustering from the top eigenpairs of a similarity kernel.
//!
//! For `c` clusters, the top-`c` eigenvectors of the kernel matrix are
//! sign-fixed so their component sums are nonnegative, and sample `i` is
//! assigned to the cluster maximizing
//! `pi_y * [max(0, phi_y)]_i / (max(0, phi_y)^T 1)`.
//! Priors are paired ascending against descending eigenvalues. New points
//! are scored through local-scaling kernel evaluations against the
//! training set.

use ndarray::Array2;

use crate::data::Dataset;
use crate::eigen::EigenSystem;
use crate::error::{Error, Result};
use crate::kernel::{sort_candidates, NeighborStructure, NormalizedKernel, SparseKernelMatrix};
use crate::metrics::Labeling;

/// Tie-break weight for [`crate::kernel::degree_normalized`] in the
/// clustering pipeline. Large enough that an eigensolver resolves the
/// per-component ordering, small enough to leave eigenvectors unchanged
/// for practical purposes.
pub const EIGEN_TIE_BREAK: f64 = 1e-5;

/// Flips each eigenvector so that the sum of its components is nonnegative
/// (a zero sum counts as positive). Involutive: applying twice is identity.
pub fn fix_signs(vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    vectors
        .iter()
        .map(|v| {
            let total: f64 = v.iter().sum();
            if total < 0.0 {
                v.iter().map(|&x| -x).collect()
            } else {
                v.clone()
            }
        })
        .collect()
}

/// Empirical estimate of squared-loss mutual information from unit
/// parameter vectors: `(1/(2n)) * sum_y (1/pi_y) ||K a_y||^2 - 1/2`.
pub fn smi_approximator(
    kernel: &SparseKernelMatrix,
    alphas: &[Vec<f64>],
    priors: &[f64],
) -> Result<f64> {
    validate_priors(priors, alphas.len())?;
    let n = kernel.n();
    let mut ka = vec![0.0; n];
    let mut total = 0.0;
    for (alpha, &prior) in alphas.iter().zip(priors) {
        if alpha.len() != n {
            return Err(Error::InvalidArgument(
                "parameter vector length does not match the kernel".into(),
            ));
        }
        let norm2: f64 = alpha.iter().map(|x| x * x).sum();
        if (norm2.sqrt() - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidArgument(
                "parameter vectors must be unit norm".into(),
            ));
        }
        kernel.matvec(alpha, &mut ka);
        let quad: f64 = ka.iter().map(|x| x * x).sum();
        total += quad / prior;
    }
    Ok(total / (2.0 * n as f64) - 0.5)
}

fn validate_priors(priors: &[f64], c: usize) -> Result<()> {
    if priors.len() != c {
        return Err(Error::InvalidPrior(format!(
            "expected {c} priors, got {}",
            priors.len()
        )));
    }
    if priors.iter().any(|&p| !p.is_finite() || p <= 0.0) {
        return Err(Error::InvalidPrior("entries must be positive".into()));
    }
    let sum: f64 = priors.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPrior(format!("entries sum to {sum}, not 1")));
    }
    Ok(())
}

/// A fitted clustering model: sign-fixed eigenvectors with their
/// eigenvalues, ascending priors, and everything needed to evaluate the
/// normalized training kernel at new points.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    eigenvectors: Vec<Vec<f64>>, // sign-fixed, by descending eigenvalue
    eigenvalues: Vec<f64>,
    priors: Vec<f64>, // ascending
    t: usize,
    points: Array2<f64>,
    scales: Vec<f64>,
    degrees: Vec<f64>,
    tie_scale: f64,
    positive_sums: Vec<f64>, // max(0, phi_y)^T 1 per cluster
}

impl ClusterModel {
    /// Builds a model from an eigensystem over the degree-normalized
    /// kernel of `data`. Priors are sorted ascending, pairing the smallest
    /// prior with the largest eigenvalue.
    pub fn new(
        eig: &EigenSystem,
        priors: &[f64],
        data: &Dataset,
        nbrs: &NeighborStructure,
        kernel: &NormalizedKernel,
    ) -> Result<Self> {
        let c = eig.len();
        validate_priors(priors, c)?;
        if nbrs.n() != data.n()
            || eig.eigenvectors()[0].len() != data.n()
            || kernel.matrix().n() != data.n()
        {
            return Err(Error::InvalidArgument(
                "eigensystem, data, kernel, and neighbor structure disagree on n".into(),
            ));
        }
        let mut priors = priors.to_vec();
        priors.sort_by(|a, b| a.partial_cmp(b).expect("finite priors"));
        let eigenvectors = fix_signs(eig.eigenvectors());
        let positive_sums = eigenvectors
            .iter()
            .map(|v| v.iter().map(|&x| x.max(0.0)).sum())
            .collect();
        Ok(Self {
            eigenvectors,
            eigenvalues: eig.eigenvalues().to_vec(),
            priors,
            t: nbrs.t(),
            points: data.points().to_owned(),
            scales: nbrs.scales().to_vec(),
            degrees: kernel.degrees().to_vec(),
            tie_scale: kernel.tie_scale(),
            positive_sums,
        })
    }

    pub fn c(&self) -> usize {
        self.eigenvectors.len()
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Clusters whose rounded-up eigenvector is identically zero (1-based).
    /// Such clusters score zero everywhere and end up empty.
    pub fn degenerate_clusters(&self) -> Vec<usize> {
        self.positive_sums
            .iter()
            .enumerate()
            .filter(|&(_, &s)| s == 0.0)
            .map(|(y, _)| y + 1)
            .collect()
    }

    /// In-sample score of cluster `y` (0-based) at training sample `i`.
    fn score(&self, y: usize, i: usize) -> f64 {
        if self.positive_sums[y] == 0.0 {
            return 0.0;
        }
        self.priors[y] * self.eigenvectors[y][i].max(0.0) / self.positive_sums[y]
    }
}

/// Assigns every training sample to its maximum-score cluster. Ties and
/// all-zero scores resolve to the smallest cluster index.
pub fn assign_clusters(model: &ClusterModel) -> Labeling {
    let n = model.n();
    let c = model.c();
    let mut assignments = Vec::with_capacity(n);
    for i in 0..n {
        let mut best = 0usize;
        let mut best_score = model.score(0, i);
        for y in 1..c {
            let s = model.score(y, i);
            if s > best_score {
                best_score = s;
                best = y;
            }
        }
        assignments.push(best + 1);
    }
    Labeling::new(assignments, c).expect("assignments are in range by construction")
}

/// Predicts the cluster of a new point through out-of-sample kernel
/// evaluation: `argmax_y pi_y max(0, k(x')^T phi_y) / (lambda_y max(0, phi_y)^T 1)`,
/// where `k(x')` is the query's row of the normalized kernel.
///
/// The local scale of the query is its distance to the `t`-th nearest
/// training point, its degree is its raw kernel mass against the training
/// set, and training points at distance exactly zero are treated as the
/// query itself and excluded from the neighbor search. Querying a training
/// point therefore reproduces its in-sample assignment (when its winning
/// score is positive).
pub fn predict_out_of_sample(model: &ClusterModel, x_new: &[f64]) -> Result<usize> {
    let n = model.n();
    let d = model.points.ncols();
    if x_new.len() != d {
        return Err(Error::InvalidArgument(format!(
            "query has {} features, expected {d}",
            x_new.len()
        )));
    }
    if x_new.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite query".into()));
    }
    for (y, &lambda) in model.eigenvalues.iter().enumerate() {
        if lambda <= 0.0 {
            return Err(Error::ZeroEigenvalue {
                cluster: y + 1,
                value: lambda,
            });
        }
    }

    let dist: Vec<f64> = (0..n)
        .map(|j| {
            let mut d2 = 0.0;
            for (k, &xv) in x_new.iter().enumerate() {
                let diff = xv - model.points[[j, k]];
                d2 += diff * diff;
            }
            d2.sqrt()
        })
        .collect();

    let mut candidates: Vec<(f64, usize)> = dist
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d > 0.0)
        .map(|(j, &d)| (d, j))
        .collect();
    if candidates.len() < model.t {
        return Err(Error::InvalidArgument(
            "fewer distinct training points than the kernel parameter t".into(),
        ));
    }
    sort_candidates(&mut candidates);
    let sigma_new = candidates[model.t - 1].0;
    let mut is_neighbor = vec![false; n];
    for &(_, j) in &candidates[..model.t] {
        is_neighbor[j] = true;
    }

    // raw kernel row of the query against the training set
    let mut krow = vec![0.0; n];
    for j in 0..n {
        if is_neighbor[j] || dist[j] <= model.scales[j] {
            krow[j] = (-(dist[j] * dist[j]) / (2.0 * sigma_new * model.scales[j])).exp();
        }
    }
    // normalized row; when the query coincides with a training point this
    // reproduces that point's row exactly (its unit self-entry is the
    // duplicate's kernel value)
    let degree_new: f64 = krow.iter().sum();
    if degree_new > 0.0 {
        for (kj, &dj) in krow.iter_mut().zip(&model.degrees) {
            *kj = *kj / (degree_new * dj).sqrt() + model.tie_scale * *kj;
        }
    }

    let mut best = 0usize;
    let mut best_score = 0.0f64;
    for y in 0..model.c() {
        if model.positive_sums[y] == 0.0 || degree_new == 0.0 {
            continue;
        }
        let projected: f64 = krow
            .iter()
            .zip(&model.eigenvectors[y])
            .map(|(&k, &p)| k * p)
            .sum();
        let score = model.priors[y] * projected.max(0.0)
            / (model.eigenvalues[y] * model.positive_sums[y]);
        if score > best_score {
            best_score = score;
            best = y;
        }
    }
    Ok(best + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::top_eigenpairs;
    use crate::generate::{gen_four_blobs, uniform_priors};
    use crate::kernel::{build_neighbors, sparse_local_scaling_kernel};

    #[test]
    fn fix_signs_examples() {
        let flipped = fix_signs(&[vec![-1.0, -1.0]]);
        assert_eq!(flipped[0], vec![1.0, 1.0]);
        let zero_sum = fix_signs(&[vec![1.0, -1.0]]);
        assert_eq!(zero_sum[0], vec![1.0, -1.0]);
        let twice = fix_signs(&fix_signs(&[vec![0.3, -0.8], vec![-0.5, 0.1]]));
        assert_eq!(twice, fix_signs(&[vec![0.3, -0.8], vec![-0.5, 0.1]]));
    }

    #[test]
    fn smi_identity_at_eigenvectors() {
        let data = gen_four_blobs(60, &uniform_priors(4), 5).unwrap();
        let data = crate::data::standardize(&data).unwrap();
        let nbrs = build_neighbors(&data, 5).unwrap();
        let kernel = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let c = 4;
        let sys = top_eigenpairs(&kernel, c).unwrap();
        let value =
            smi_approximator(&kernel, sys.eigenvectors(), &uniform_priors(c)).unwrap();
        let n = data.n() as f64;
        let expected = (c as f64 / (2.0 * n))
            * sys.eigenvalues().iter().map(|l| l * l).sum::<f64>()
            - 0.5;
        assert!((value - expected).abs() <= 1e-10, "{value} vs {expected}");
    }

    #[test]
    fn smi_of_zero_matrix_is_minus_half() {
        let k = SparseKernelMatrix::from_triplets(4, &[]).unwrap();
        let alphas = vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]];
        let v = smi_approximator(&k, &alphas, &[0.5, 0.5]).unwrap();
        assert_eq!(v, -0.5);
    }

    #[test]
    fn smi_matches_dense_quadratic_form() {
        let data = gen_four_blobs(40, &uniform_priors(4), 9).unwrap();
        let nbrs = build_neighbors(&data, 4).unwrap();
        let kernel = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let n = kernel.n();
        let mut rng = crate::seeds::rng(31);
        use rand::Rng;
        let mut alphas = Vec::new();
        for _ in 0..3 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let len: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= len);
            alphas.push(v);
        }
        let priors = vec![0.2, 0.3, 0.5];
        let got = smi_approximator(&kernel, &alphas, &priors).unwrap();

        let dense = kernel.to_dense();
        let mut expected = 0.0;
        for (alpha, &prior) in alphas.iter().zip(&priors) {
            let mut ka = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    ka[i] += dense[[i, j]] * alpha[j];
                }
            }
            let mut kka = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    kka[i] += dense[[i, j]] * ka[j];
                }
            }
            expected += alpha.iter().zip(&kka).map(|(a, b)| a * b).sum::<f64>() / prior;
        }
        expected = expected / (2.0 * n as f64) - 0.5;
        assert!((got - expected).abs() <= 1e-10);
    }

    fn toy_model(vectors: Vec<Vec<f64>>, values: Vec<f64>, priors: &[f64]) -> ClusterModel {
        let n = vectors[0].len();
        let mut flat = Vec::new();
        for i in 0..n {
            flat.push(i as f64);
        }
        let points = ndarray::Array2::from_shape_vec((n, 1), flat).unwrap();
        let data = Dataset::new(points, None, "toy").unwrap();
        let nbrs = build_neighbors(&data, 1).unwrap();
        let raw = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let norm = crate::kernel::degree_normalized(&raw, EIGEN_TIE_BREAK);
        let sys = EigenSystem::new(values, vectors).unwrap();
        ClusterModel::new(&sys, priors, &data, &nbrs, &norm).unwrap()
    }

    #[test]
    fn assignment_with_disjoint_support() {
        let model = toy_model(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 0.9],
            &[0.5, 0.5],
        );
        let labels = assign_clusters(&model);
        assert_eq!(labels.assignments(), &[1, 2]);
    }

    #[test]
    fn all_zero_scores_take_smallest_cluster() {
        // at sample 2 both rounded-up eigenvectors vanish
        let model = toy_model(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.8, -0.6]],
            vec![1.0, 0.8],
            &[0.5, 0.5],
        );
        let labels = assign_clusters(&model);
        assert_eq!(labels.assignments()[2], 1);
    }

    #[test]
    fn degenerate_cluster_is_reported_and_empty() {
        // sign fixing makes an all-nonpositive unit eigenvector impossible,
        // so build the defensive case directly
        let model = ClusterModel {
            eigenvectors: vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0]],
            eigenvalues: vec![1.0, 0.5],
            priors: vec![0.5, 0.5],
            t: 1,
            points: ndarray::Array2::zeros((3, 1)),
            scales: vec![1.0; 3],
            degrees: vec![1.0; 3],
            tie_scale: 0.0,
            positive_sums: vec![1.0, 0.0],
        };
        assert_eq!(model.degenerate_clusters(), vec![2]);
        let labels = assign_clusters(&model);
        assert!(labels.assignments().iter().all(|&y| y == 1));
    }

    #[test]
    fn priors_are_sorted_ascending() {
        let model = toy_model(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 0.9],
            &[0.7, 0.3],
        );
        assert_eq!(model.priors(), &[0.3, 0.7]);
    }

    #[test]
    fn uniform_prior_permutation_covariance() {
        // swapping eigenvector order with uniform priors permutes labels
        let m1 = toy_model(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![1.0, 1.0],
            &[0.5, 0.5],
        );
        let m2 = toy_model(
            vec![vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![1.0, 1.0],
            &[0.5, 0.5],
        );
        let l1 = assign_clusters(&m1);
        let l2 = assign_clusters(&m2);
        let swapped: Vec<usize> = l2.assignments().iter().map(|&y| 3 - y).collect();
        assert_eq!(l1.assignments(), &swapped[..]);
    }

    fn blob_model(n: usize, t: usize, seed: u64) -> (Dataset, ClusterModel, Labeling) {
        let data = gen_four_blobs(n, &uniform_priors(4), seed).unwrap();
        let data = crate::data::standardize(&data).unwrap();
        let (model, labels) = crate::select::cluster_once(&data, 4, t, &uniform_priors(4)).unwrap();
        (data, model, labels)
    }

    #[test]
    fn training_points_predict_their_own_cluster() {
        let (data, model, labels) = blob_model(60, 5, 2);
        for i in 0..data.n() {
            let y = labels.assignments()[i];
            let in_sample_score = model.score(y - 1, i);
            if in_sample_score > 0.0 {
                let x: Vec<f64> = data.point(i).iter().copied().collect();
                let predicted = predict_out_of_sample(&model, &x).unwrap();
                assert_eq!(predicted, y, "sample {i}");
            }
        }
    }

    #[test]
    fn far_away_query_takes_tie_rule() {
        let (_, model, _) = blob_model(60, 5, 2);
        let label = predict_out_of_sample(&model, &[1e6, 1e6]).unwrap();
        assert_eq!(label, 1);
    }

    #[test]
    fn blob_center_queries_match_in_sample_majority() {
        let (data, model, labels) = blob_model(120, 6, 4);
        // standardized blob centers: standardize the nominal means with the
        // same moments is overkill; instead query the mean of each true class
        let truth = data.labels().unwrap().to_vec();
        for class in 1..=4usize {
            let rows: Vec<usize> = (0..data.n()).filter(|&i| truth[i] == class).collect();
            let mut center = vec![0.0, 0.0];
            for &i in &rows {
                center[0] += data.points()[[i, 0]] / rows.len() as f64;
                center[1] += data.points()[[i, 1]] / rows.len() as f64;
            }
            let predicted = predict_out_of_sample(&model, &center).unwrap();
            let mut votes = vec![0usize; 5];
            for &i in &rows {
                votes[labels.assignments()[i]] += 1;
            }
            let majority = votes
                .iter()
                .enumerate()
                .max_by_key(|&(_, &v)| v)
                .map(|(y, _)| y)
                .unwrap();
            assert_eq!(predicted, majority, "class {class}");
        }
    }
}
