//! Similarity kernels.
//!
//! A k-nearest-neighbor structure with per-point local scales, the sparse
//! local-scaling kernel built from it, and dense Gaussian kernel matrices.
//!
//! The sparse kernel stores
//! `K[i,j] = exp(-||x_i - x_j||^2 / (2 sigma_i sigma_j))`
//! whenever `i` is among the `t` nearest neighbors of `j` or vice versa,
//! where `sigma_i` is the distance from `x_i` to its own `t`-th nearest
//! neighbor. The diagonal is fixed at 1.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::data::Dataset;
use crate::error::{Error, Result};

pub(crate) fn euclidean(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    squared_distance(a, b).sqrt()
}

pub(crate) fn squared_distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Per-point nearest-neighbor lists and local scaling factors.
///
/// `neighbors[i]` holds the `t` nearest other points as `(index, distance)`
/// in ascending distance, ties broken by lower index; `scale(i)` is the
/// distance to the `t`-th entry.
#[derive(Debug, Clone)]
pub struct NeighborStructure {
    t: usize,
    neighbors: Vec<Vec<(usize, f64)>>,
    scales: Vec<f64>,
}

impl NeighborStructure {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.neighbors[i]
    }

    pub fn scale(&self, i: usize) -> f64 {
        self.scales[i]
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// Sorts candidate `(distance, index)` pairs ascending, ties by lower index.
/// Shared by training-side neighbor search and out-of-sample queries.
pub(crate) fn sort_candidates(cands: &mut [(f64, usize)]) {
    cands.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("distances are finite")
            .then(a.1.cmp(&b.1))
    });
}

/// Brute-force Euclidean k-nearest-neighbor search with local scales.
pub fn build_neighbors(data: &Dataset, t: usize) -> Result<NeighborStructure> {
    let n = data.n();
    if t < 1 || t > n - 1 {
        return Err(Error::InvalidT { t, max: n - 1 });
    }
    let points = data.points();
    let mut neighbors = Vec::with_capacity(n);
    let mut scales = Vec::with_capacity(n);
    for i in 0..n {
        let mut cands: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (euclidean(points.row(i), points.row(j)), j))
            .collect();
        sort_candidates(&mut cands);
        cands.truncate(t);
        let sigma = cands[t - 1].0;
        if sigma == 0.0 {
            return Err(Error::DegenerateScale(i));
        }
        neighbors.push(cands.into_iter().map(|(d, j)| (j, d)).collect());
        scales.push(sigma);
    }
    Ok(NeighborStructure {
        t,
        neighbors,
        scales,
    })
}

/// Symmetric sparse matrix in per-row adjacency form.
///
/// Built either from the local-scaling kernel (which guarantees the kernel
/// invariants: unit diagonal, entries in (0, 1], OR-neighborhood sparsity)
/// or from raw triplets as a general symmetric container.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseKernelMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseKernelMatrix {
    /// General symmetric container: each `(i, j, v)` with `i != j` is stored
    /// at both `(i, j)` and `(j, i)`; `(i, i, v)` sets the diagonal.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in entries {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i}, {j}) out of range for n = {n}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument("non-finite matrix entry".into()));
            }
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_unstable_by_key(|&(j, _)| j);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate entries in row {i}"
                )));
            }
        }
        Ok(Self { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|pos| self.rows[i][pos].1)
            .unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().filter(|&&(j, _)| j != i).count())
            .sum()
    }

    /// `out = K x`.
    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = row.iter().map(|&(j, v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.n, self.n));
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                dense[[i, j]] = v;
            }
        }
        dense
    }
}

/// Builds the sparse local-scaling kernel over the neighbor structure.
pub fn sparse_local_scaling_kernel(
    nbrs: &NeighborStructure,
    data: &Dataset,
) -> Result<SparseKernelMatrix> {
    let n = data.n();
    if nbrs.n() != n {
        return Err(Error::InvalidArgument(
            "neighbor structure does not match the dataset".into(),
        ));
    }
    let points = data.points();
    // union of directed neighbor relations, as unordered pairs
    let mut pairs = std::collections::BTreeSet::new();
    for i in 0..n {
        for &(j, _) in nbrs.neighbors(i) {
            pairs.insert((i.min(j), i.max(j)));
        }
    }
    let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(pairs.len() + n);
    for (i, j) in pairs {
        let d2 = squared_distance(points.row(i), points.row(j));
        let v = (-d2 / (2.0 * nbrs.scale(i) * nbrs.scale(j))).exp();
        entries.push((i, j, v));
    }
    for i in 0..n {
        entries.push((i, i, 1.0));
    }
    SparseKernelMatrix::from_triplets(n, &entries)
}

/// A degree-normalized kernel together with what is needed to evaluate it
/// at new points.
#[derive(Debug, Clone)]
pub struct NormalizedKernel {
    matrix: SparseKernelMatrix,
    degrees: Vec<f64>,
    tie_scale: f64,
}

impl NormalizedKernel {
    pub fn matrix(&self) -> &SparseKernelMatrix {
        &self.matrix
    }

    /// Row sums of the raw kernel, diagonal included.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn tie_scale(&self) -> f64 {
        self.tie_scale
    }
}

/// Symmetric degree normalization with a deterministic tie-break:
/// `K~ = D^{-1/2} K D^{-1/2} + (tie_break / rho) K`, where `D` holds the
/// row sums of `K` and `rho` is the max row sum (a spectral-radius bound).
///
/// Normalization makes the principal eigenvalue of every connected
/// component exactly 1, so components of different density or shape
/// compete on equal footing in the top of the spectrum. That exact
/// degeneracy would leave the leading eigenvectors an arbitrary rotation
/// of the component indicators; the vanishing multiple of the raw kernel
/// orders them by raw spectral weight while perturbing eigenvectors by
/// O(tie_break).
pub fn degree_normalized(k: &SparseKernelMatrix, tie_break: f64) -> NormalizedKernel {
    let n = k.n();
    let degrees: Vec<f64> = (0..n)
        .map(|i| k.row(i).iter().map(|&(_, v)| v).sum())
        .collect();
    let rho = degrees.iter().fold(1.0f64, |acc, &d| acc.max(d));
    let tie_scale = tie_break / rho;
    let mut entries = Vec::with_capacity(k.nnz_off_diagonal() / 2 + n);
    for i in 0..n {
        for &(j, v) in k.row(i) {
            if j >= i {
                entries.push((i, j, v / (degrees[i] * degrees[j]).sqrt() + tie_scale * v));
            }
        }
    }
    let matrix =
        SparseKernelMatrix::from_triplets(n, &entries).expect("same pattern as the input kernel");
    NormalizedKernel {
        matrix,
        degrees,
        tie_scale,
    }
}

/// Dense Gaussian kernel matrix `L[a,b] = exp(-||row_a - center_b||^2 / (2 gamma^2))`.
pub fn gaussian_kernel_matrix(
    rows: ArrayView2<'_, f64>,
    centers: ArrayView2<'_, f64>,
    gamma: f64,
) -> Result<Array2<f64>> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if rows.ncols() != centers.ncols() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: {} vs {}",
            rows.ncols(),
            centers.ncols()
        )));
    }
    let denom = 2.0 * gamma * gamma;
    let mut out = Array2::zeros((rows.nrows(), centers.nrows()));
    for a in 0..rows.nrows() {
        for b in 0..centers.nrows() {
            let d2 = squared_distance(rows.row(a), centers.row(b));
            out[[a, b]] = (-d2 / denom).exp();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn dataset(points: Array2<f64>) -> Dataset {
        Dataset::new(points, None, "test").unwrap()
    }

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = crate::seeds::rng(seed);
        let flat: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        dataset(Array2::from_shape_vec((n, d), flat).unwrap())
    }

    #[test]
    fn collinear_scales() {
        let data = dataset(array![[0.0], [1.0], [3.0]]);
        let nbrs = build_neighbors(&data, 1).unwrap();
        assert_eq!(nbrs.scales(), &[1.0, 1.0, 2.0]);
    }

    #[test]
    fn t_out_of_range() {
        let data = dataset(array![[0.0], [1.0], [3.0]]);
        assert!(matches!(
            build_neighbors(&data, 0),
            Err(Error::InvalidT { .. })
        ));
        assert!(matches!(
            build_neighbors(&data, 3),
            Err(Error::InvalidT { .. })
        ));
    }

    #[test]
    fn duplicate_points_are_an_error() {
        let data = dataset(array![[1.0, 1.0], [1.0, 1.0], [2.0, 0.0]]);
        assert!(matches!(
            build_neighbors(&data, 1),
            Err(Error::DegenerateScale(_))
        ));
    }

    #[test]
    fn saturated_t_gives_dense_kernel() {
        let data = random_dataset(12, 2, 3);
        let nbrs = build_neighbors(&data, 11).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        assert_eq!(k.nnz_off_diagonal(), 12 * 11);
    }

    #[test]
    fn scales_match_brute_force() {
        let data = random_dataset(50, 2, 7);
        let nbrs = build_neighbors(&data, 5).unwrap();
        for i in 0..50 {
            let mut dists: Vec<f64> = (0..50)
                .filter(|&j| j != i)
                .map(|j| euclidean(data.point(i), data.point(j)))
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(nbrs.scale(i), dists[4], "point {i}");
        }
    }

    #[test]
    fn kernel_diagonal_is_one() {
        let data = random_dataset(20, 3, 1);
        let nbrs = build_neighbors(&data, 4).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        for i in 0..20 {
            assert_eq!(k.get(i, i), 1.0);
        }
    }

    #[test]
    fn mutual_neighbors_at_common_scale() {
        // two close points far from two fillers; sigma_0 = sigma_1 = D
        let data = dataset(array![[0.0, 0.0], [3.0, 0.0], [100.0, 0.0], [103.0, 0.0]]);
        let nbrs = build_neighbors(&data, 1).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let expected = (-0.5f64).exp();
        assert!((k.get(0, 1) - expected).abs() < 1e-15);
        assert_eq!(k.get(0, 1), k.get(1, 0));
    }

    #[test]
    fn kernel_matches_dense_oracle() {
        let data = random_dataset(50, 2, 11);
        let t = 5;
        let nbrs = build_neighbors(&data, t).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();

        // dense evaluation masked by the OR-neighborhood condition
        let in_nbrs = |i: usize, j: usize| nbrs.neighbors(j).iter().any(|&(idx, _)| idx == i);
        for i in 0..50 {
            for j in 0..50 {
                let expected = if i == j {
                    1.0
                } else if in_nbrs(i, j) || in_nbrs(j, i) {
                    let d2 = squared_distance(data.point(i), data.point(j));
                    (-d2 / (2.0 * nbrs.scale(i) * nbrs.scale(j))).exp()
                } else {
                    0.0
                };
                assert!(
                    (k.get(i, j) - expected).abs() <= 1e-14,
                    "entry ({i}, {j}): {} vs {expected}",
                    k.get(i, j)
                );
            }
        }
    }

    #[test]
    fn kernel_values_in_unit_interval_and_sparse() {
        let data = random_dataset(60, 2, 5);
        for t in [1, 3, 7] {
            let nbrs = build_neighbors(&data, t).unwrap();
            let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
            for i in 0..60 {
                for &(_, v) in k.row(i) {
                    assert!(v > 0.0 && v <= 1.0);
                }
            }
            assert!(k.nnz_off_diagonal() <= 2 * 60 * t);
        }
    }

    #[test]
    fn growing_t_never_removes_entries() {
        let data = random_dataset(40, 2, 9);
        let mut prev: Option<SparseKernelMatrix> = None;
        for t in 1..=8 {
            let nbrs = build_neighbors(&data, t).unwrap();
            let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
            if let Some(p) = &prev {
                for i in 0..40 {
                    for &(j, v) in p.row(i) {
                        assert!(v > 0.0);
                        assert!(k.get(i, j) > 0.0, "t={t} dropped entry ({i}, {j})");
                    }
                }
            }
            prev = Some(k);
        }
    }

    #[test]
    fn gaussian_kernel_plug_ins() {
        let gamma = 0.7;
        let rows = array![[1.0, 2.0, 3.0]];
        let centers = array![[1.0, 2.0, 3.0], [1.0 + gamma * 2f64.sqrt(), 2.0, 3.0]];
        let l = gaussian_kernel_matrix(rows.view(), centers.view(), gamma).unwrap();
        assert_eq!(l[[0, 0]], 1.0);
        assert!((l[[0, 1]] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_kernel_matches_scalar_loop() {
        let rows = random_dataset(30, 3, 21);
        let centers = random_dataset(14, 3, 22);
        let gamma = 0.35;
        let l = gaussian_kernel_matrix(rows.points(), centers.points(), gamma).unwrap();
        for a in 0..30 {
            for b in 0..14 {
                let mut d2 = 0.0;
                for k in 0..3 {
                    let diff = rows.points()[[a, k]] - centers.points()[[b, k]];
                    d2 += diff * diff;
                }
                let expected = (-d2 / (2.0 * gamma * gamma)).exp();
                assert!((l[[a, b]] - expected).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn gaussian_kernel_rejects_bad_gamma() {
        let rows = array![[1.0]];
        assert!(matches!(
            gaussian_kernel_matrix(rows.view(), rows.view(), 0.0),
            Err(Error::InvalidGamma(_))
        ));
        assert!(matches!(
            gaussian_kernel_matrix(rows.view(), rows.view(), -1.0),
            Err(Error::InvalidGamma(_))
        ));
    }

    #[test]
    fn normalized_kernel_fixes_scaled_ones_vector() {
        // D^{-1/2} K D^{-1/2} (D^{1/2} 1) = D^{1/2} 1 exactly, per component
        let data = random_dataset(40, 2, 13);
        let nbrs = build_neighbors(&data, 4).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let norm = degree_normalized(&k, 0.0);
        assert_eq!(norm.tie_scale(), 0.0);
        let sqrt_deg: Vec<f64> = norm.degrees().iter().map(|d| d.sqrt()).collect();
        let mut out = vec![0.0; 40];
        norm.matrix().matvec(&sqrt_deg, &mut out);
        for (a, b) in out.iter().zip(&sqrt_deg) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn tie_break_perturbation_is_bounded() {
        let data = random_dataset(30, 2, 15);
        let nbrs = build_neighbors(&data, 3).unwrap();
        let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
        let tie = 1e-5;
        let plain = degree_normalized(&k, 0.0);
        let broken = degree_normalized(&k, tie);
        for i in 0..30 {
            for &(j, v) in broken.matrix().row(i) {
                let diff = (v - plain.matrix().get(i, j)).abs();
                assert!(diff <= tie * k.get(i, j) + 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn kernel_is_exactly_symmetric(seed in 0u64..200, t in 1usize..6) {
            let data = random_dataset(25, 2, seed);
            let nbrs = build_neighbors(&data, t).unwrap();
            let k = sparse_local_scaling_kernel(&nbrs, &data).unwrap();
            for i in 0..25 {
                for &(j, v) in k.row(i) {
                    prop_assert_eq!(v, k.get(j, i));
                }
            }
        }
    }
}
