//! Least-squares estimation of squared-loss mutual information from
//! labeled pairs.
//!
//! The density ratio `r(x, y) = p(x, y) / (p(x) p(y))` is modeled per class
//! as `r(x, y) = sum_l theta_l L(x, c_l)` over Gaussian kernels centered at
//! the class-y samples, and fit by a regularized squared error whose
//! minimizer solves the positive-definite system
//! `(H_y + delta I) theta_y = h_y` with
//!
//! ```text
//! H_y[l, l'] = (n_y / n^2) sum_i L(x_i, c_l) L(x_i, c_l')
//! h_y[l]     = (1 / n)     sum_{i : y_i = y} L(x_i, c_l)
//! ```
//!
//! Solving class by class gives exactly the joint all-class solution,
//! because the joint system is block diagonal. The kernel width `gamma`
//! and ridge `delta` are chosen by M-fold cross-validation of a hold-out
//! squared error, and the final estimate is
//! `LSMI = -(1/2n^2) sum_{i,j} r(x_i, y_j)^2 + (1/n) sum_i r(x_i, y_i) - 1/2`,
//! which is zero (up to sampling noise) when features and labels are
//! independent.

use nalgebra::{Cholesky, DMatrix, DVector};
use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::gaussian_kernel_matrix;
use crate::metrics::Labeling;
use crate::seeds;

/// One observation: a feature vector paired with a class label in `{1..c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub point: Vec<f64>,
    pub label: usize,
}

impl LabeledSample {
    /// Zips matrix rows with a labeling.
    pub fn pair_rows(points: ArrayView2<'_, f64>, labels: &Labeling) -> Vec<LabeledSample> {
        points
            .rows()
            .into_iter()
            .zip(labels.assignments())
            .map(|(row, &label)| LabeledSample {
                point: row.to_vec(),
                label,
            })
            .collect()
    }
}

/// Cross-validation grid: half-decade candidate ladders for the Gaussian
/// width and the ridge, fold count, and the per-class cap on kernel bases.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CvGrid {
    pub gamma_candidates: Vec<f64>,
    pub delta_candidates: Vec<f64>,
    pub folds: usize,
    pub basis_cap: usize,
}

impl Default for CvGrid {
    fn default() -> Self {
        let half_decades = |lo: i32, hi: i32| -> Vec<f64> {
            (lo..=hi).map(|k| 10f64.powf(0.5 * k as f64)).collect()
        };
        Self {
            gamma_candidates: half_decades(-4, 4), // 1e-2 .. 1e2
            delta_candidates: half_decades(-6, 2), // 1e-3 .. 1e1
            folds: 5,
            basis_cap: 200,
        }
    }
}

impl CvGrid {
    pub fn validate(&self) -> Result<()> {
        for (name, cands) in [
            ("gamma", &self.gamma_candidates),
            ("delta", &self.delta_candidates),
        ] {
            if cands.is_empty() {
                return Err(Error::InvalidArgument(format!("empty {name} grid")));
            }
            if cands.iter().any(|&v| !v.is_finite() || v <= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "{name} candidates must be positive"
                )));
            }
            if cands.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "{name} candidates must be strictly ascending"
                )));
            }
        }
        if self.folds < 2 {
            return Err(Error::InvalidArgument("need at least 2 folds".into()));
        }
        if self.basis_cap == 0 {
            return Err(Error::InvalidArgument("basis cap must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct ClassRatio {
    centers: Array2<f64>,
    coeffs: Vec<f64>,
}

/// Fitted density-ratio model: per-class centers and coefficients plus the
/// hyperparameters they were fit with.
#[derive(Debug, Clone)]
pub struct DensityRatioModel {
    classes: Vec<ClassRatio>,
    gamma: f64,
    delta: f64,
}

impl DensityRatioModel {
    pub fn c(&self) -> usize {
        self.classes.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn class_centers(&self, y: usize) -> ArrayView2<'_, f64> {
        self.classes[y - 1].centers.view()
    }

    pub fn class_coefficients(&self, y: usize) -> &[f64] {
        &self.classes[y - 1].coeffs
    }
}

fn validate_samples(samples: &[LabeledSample]) -> Result<(usize, usize, usize)> {
    if samples.is_empty() {
        return Err(Error::TooFewSamples(0));
    }
    let d = samples[0].point.len();
    if d == 0 {
        return Err(Error::InvalidData("empty feature vector".into()));
    }
    let mut c = 0usize;
    for s in samples {
        if s.point.len() != d {
            return Err(Error::InvalidData("inconsistent feature lengths".into()));
        }
        if s.point.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        if s.label == 0 {
            return Err(Error::InvalidData("labels are 1-based".into()));
        }
        c = c.max(s.label);
    }
    let mut seen = vec![false; c];
    for s in samples {
        seen[s.label - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::EmptyClass(missing + 1));
    }
    Ok((samples.len(), d, c))
}

fn points_matrix(samples: &[LabeledSample]) -> Array2<f64> {
    let n = samples.len();
    let d = samples[0].point.len();
    let mut out = Array2::zeros((n, d));
    for (i, s) in samples.iter().enumerate() {
        for (j, &v) in s.point.iter().enumerate() {
            out[[i, j]] = v;
        }
    }
    out
}

/// Per-class design quantities for one (sample set, gamma) pair. Solving
/// for several ridge values reuses the same kernels.
struct ClassDesign {
    label: usize,
    centers: Array2<f64>,
    h_mat: DMatrix<f64>,
    h_vec: DVector<f64>,
}

struct DesignSet {
    classes: Vec<ClassDesign>,
    gamma: f64,
}

impl DesignSet {
    fn build(samples: &[LabeledSample], gamma: f64, basis_cap: usize, seed: u64) -> Result<Self> {
        let (n, _, c) = validate_samples(samples)?;
        let points = points_matrix(samples);
        let mut classes = Vec::with_capacity(c);
        for y in 1..=c {
            let members: Vec<usize> = (0..n).filter(|&i| samples[i].label == y).collect();
            let n_y = members.len();
            // basis subset is seeded by the smallest member index, so it is
            // stable under relabeling the classes
            let center_rows: Vec<usize> = if n_y > basis_cap {
                let mut rng = seeds::rng(seeds::split(seed, members[0] as u64));
                let mut picked = rand::seq::index::sample(&mut rng, n_y, basis_cap).into_vec();
                picked.sort_unstable();
                picked.into_iter().map(|k| members[k]).collect()
            } else {
                members.clone()
            };
            let m = center_rows.len();
            let mut centers = Array2::zeros((m, points.ncols()));
            for (l, &row) in center_rows.iter().enumerate() {
                centers.row_mut(l).assign(&points.row(row));
            }
            // phi_t[l][i] = L(x_i, c_l), rows contiguous per center
            let phi_t = gaussian_kernel_matrix(centers.view(), points.view(), gamma)?;
            let scale = n_y as f64 / (n as f64 * n as f64);
            let mut h_mat = DMatrix::zeros(m, m);
            for l in 0..m {
                let row_l = phi_t.row(l);
                let row_l = row_l.as_slice().expect("contiguous row");
                for lp in l..m {
                    let row_lp = phi_t.row(lp);
                    let row_lp = row_lp.as_slice().expect("contiguous row");
                    let s: f64 = row_l.iter().zip(row_lp).map(|(a, b)| a * b).sum();
                    let v = scale * s;
                    h_mat[(l, lp)] = v;
                    h_mat[(lp, l)] = v;
                }
            }
            let mut h_vec = DVector::zeros(m);
            for l in 0..m {
                h_vec[l] = members.iter().map(|&i| phi_t[[l, i]]).sum::<f64>() / n as f64;
            }
            classes.push(ClassDesign {
                label: y,
                centers,
                h_mat,
                h_vec,
            });
        }
        Ok(Self { classes, gamma })
    }

    fn solve(&self, delta: f64) -> Result<DensityRatioModel> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "regularization must be nonnegative, got {delta}"
            )));
        }
        let mut classes = Vec::with_capacity(self.classes.len());
        for design in &self.classes {
            let m = design.h_mat.nrows();
            let mut system = design.h_mat.clone();
            for i in 0..m {
                system[(i, i)] += delta;
            }
            let chol = Cholesky::new(system).ok_or(Error::SingularSystem(design.label))?;
            let theta = chol.solve(&design.h_vec);
            classes.push(ClassRatio {
                centers: design.centers.clone(),
                coeffs: theta.iter().copied().collect(),
            });
        }
        Ok(DensityRatioModel {
            classes,
            gamma: self.gamma,
            delta,
        })
    }
}

/// Fits the per-class density-ratio coefficients analytically. When a class
/// has more than `basis_cap` samples, its centers are a seeded uniform
/// subset of that size.
pub fn fit_density_ratio(
    samples: &[LabeledSample],
    gamma: f64,
    delta: f64,
    basis_cap: usize,
    seed: u64,
) -> Result<DensityRatioModel> {
    DesignSet::build(samples, gamma, basis_cap, seed)?.solve(delta)
}

/// Evaluates the fitted ratio at one (point, label) pair. May be negative;
/// no clipping is applied.
///
/// Panics if `y` is outside `1..=c`.
pub fn evaluate_ratio(model: &DensityRatioModel, x: &[f64], y: usize) -> f64 {
    assert!(y >= 1 && y <= model.c(), "label {y} outside 1..={}", model.c());
    let class = &model.classes[y - 1];
    let denom = 2.0 * model.gamma * model.gamma;
    class
        .coeffs
        .iter()
        .enumerate()
        .map(|(l, &theta)| {
            let d2: f64 = class
                .centers
                .row(l)
                .iter()
                .zip(x)
                .map(|(c, v)| (c - v) * (c - v))
                .sum();
            theta * (-d2 / denom).exp()
        })
        .sum()
}

/// Ratio values for every (row, class) pair, `rows x c`.
fn ratios_matrix(model: &DensityRatioModel, points: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let k = points.nrows();
    let mut out = Array2::zeros((k, model.c()));
    for (y0, class) in model.classes.iter().enumerate() {
        let phi = gaussian_kernel_matrix(points, class.centers.view(), model.gamma)?;
        for i in 0..k {
            let mut acc = 0.0;
            for (l, &theta) in class.coeffs.iter().enumerate() {
                acc += theta * phi[[i, l]];
            }
            out[[i, y0]] = acc;
        }
    }
    Ok(out)
}

/// Hold-out squared-error score of a fitted model on a fold:
/// `(1/2|Z|^2) sum_{x in Z} sum_{y in Z} r(x, y)^2 - (1/|Z|) sum_{(x,y) in Z} r(x, y)`,
/// where the first double sum pairs every fold point with every fold label.
pub fn holdout_error(model: &DensityRatioModel, fold: &[LabeledSample]) -> Result<f64> {
    if fold.is_empty() {
        return Err(Error::EmptyFold);
    }
    let c = model.c();
    for s in fold {
        if s.label == 0 || s.label > c {
            return Err(Error::InvalidArgument(format!(
                "fold label {} outside the model's 1..={c}",
                s.label
            )));
        }
    }
    let m = fold.len() as f64;
    let points = points_matrix(fold);
    let ratios = ratios_matrix(model, points.view())?;
    let mut label_counts = vec![0.0f64; c];
    for s in fold {
        label_counts[s.label - 1] += 1.0;
    }
    let mut squared = 0.0;
    for i in 0..fold.len() {
        for (y0, &count) in label_counts.iter().enumerate() {
            if count > 0.0 {
                squared += count * ratios[[i, y0]] * ratios[[i, y0]];
            }
        }
    }
    let paired: f64 = fold
        .iter()
        .enumerate()
        .map(|(i, s)| ratios[[i, s.label - 1]])
        .sum();
    Ok(squared / (2.0 * m * m) - paired / m)
}

/// Seeded partition of the samples into `m_folds` disjoint, near-equal
/// folds such that every class appears in at least two folds (so every
/// training split contains every class). Redraws on violation, bounded.
pub fn cv_folds(samples: &[LabeledSample], m_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    let n = samples.len();
    if m_folds < 2 {
        return Err(Error::InvalidArgument("need at least 2 folds".into()));
    }
    if n < m_folds {
        return Err(Error::InvalidArgument(format!(
            "cannot split {n} samples into {m_folds} folds"
        )));
    }
    let (_, _, c) = validate_samples(samples)?;
    for attempt in 0..100u64 {
        let mut rng = seeds::rng(seeds::split(seed, attempt));
        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let base = n / m_folds;
        let extra = n % m_folds;
        let mut folds = Vec::with_capacity(m_folds);
        let mut start = 0;
        for f in 0..m_folds {
            let size = base + usize::from(f < extra);
            let mut fold = perm[start..start + size].to_vec();
            fold.sort_unstable();
            folds.push(fold);
            start += size;
        }
        let mut fold_of = vec![0usize; n];
        for (f, fold) in folds.iter().enumerate() {
            for &i in fold {
                fold_of[i] = f;
            }
        }
        let feasible = (1..=c).all(|y| {
            let mut seen_fold = None;
            for (i, s) in samples.iter().enumerate() {
                if s.label == y {
                    match seen_fold {
                        None => seen_fold = Some(fold_of[i]),
                        Some(f) if f != fold_of[i] => return true,
                        _ => {}
                    }
                }
            }
            false
        });
        if feasible {
            return Ok(folds);
        }
    }
    Err(Error::InfeasibleFolds)
}

/// Chooses `(gamma, delta)` minimizing the mean hold-out error over one
/// seeded fold partition shared by all grid cells. Ties break toward the
/// smaller gamma, then the smaller delta.
pub fn cross_validate(samples: &[LabeledSample], grid: &CvGrid, seed: u64) -> Result<(f64, f64)> {
    grid.validate()?;
    let folds = cv_folds(samples, grid.folds, seeds::split(seed, seeds::FOLDS))?;
    let table = cv_table(samples, grid, &folds, seed)?;
    let mut best = (0usize, 0usize);
    let mut best_cv = f64::INFINITY;
    for (gi, row) in table.iter().enumerate() {
        for (di, &v) in row.iter().enumerate() {
            if v < best_cv {
                best_cv = v;
                best = (gi, di);
            }
        }
    }
    if !best_cv.is_finite() {
        return Err(Error::ConvergenceFailure(
            "cross-validation produced no finite scores".into(),
        ));
    }
    Ok((
        grid.gamma_candidates[best.0],
        grid.delta_candidates[best.1],
    ))
}

/// Mean hold-out error per (gamma, delta) cell over the given folds.
fn cv_table(
    samples: &[LabeledSample],
    grid: &CvGrid,
    folds: &[Vec<usize>],
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let m_folds = folds.len();
    let in_fold: Vec<Vec<bool>> = folds
        .iter()
        .map(|fold| {
            let mut mask = vec![false; samples.len()];
            for &i in fold {
                mask[i] = true;
            }
            mask
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..m_folds)
        .flat_map(|m| (0..grid.gamma_candidates.len()).map(move |gi| (m, gi)))
        .collect();
    let cells: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(m, gi)| {
            let train: Vec<LabeledSample> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| !in_fold[m][*i])
                .map(|(_, s)| s.clone())
                .collect();
            let hold: Vec<LabeledSample> =
                folds[m].iter().map(|&i| samples[i].clone()).collect();
            let fit_seed = seeds::split(seeds::split(seed, seeds::FOLD_FIT), m as u64);
            let design = DesignSet::build(&train, grid.gamma_candidates[gi], grid.basis_cap, fit_seed)?;
            grid.delta_candidates
                .iter()
                .map(|&delta| holdout_error(&design.solve(delta)?, &hold))
                .collect()
        })
        .collect();

    let mut table = vec![vec![0.0f64; grid.delta_candidates.len()]; grid.gamma_candidates.len()];
    for (&(_, gi), cell) in jobs.iter().zip(cells) {
        let row = cell?;
        for (di, v) in row.into_iter().enumerate() {
            table[gi][di] += v / m_folds as f64;
        }
    }
    Ok(table)
}

/// The SMI estimate of an already-fitted model on the given samples.
pub fn lsmi_score_with_model(model: &DensityRatioModel, samples: &[LabeledSample]) -> Result<f64> {
    let (n, _, c) = validate_samples(samples)?;
    if c > model.c() {
        return Err(Error::InvalidArgument(format!(
            "samples use {c} classes but the model has {}",
            model.c()
        )));
    }
    let points = points_matrix(samples);
    let ratios = ratios_matrix(model, points.view())?;
    let mut label_counts = vec![0.0f64; model.c()];
    for s in samples {
        label_counts[s.label - 1] += 1.0;
    }
    let nf = n as f64;
    let mut squared = 0.0;
    for i in 0..n {
        for (y0, &count) in label_counts.iter().enumerate() {
            if count > 0.0 {
                squared += count * ratios[[i, y0]] * ratios[[i, y0]];
            }
        }
    }
    let paired: f64 = samples
        .iter()
        .enumerate()
        .map(|(i, s)| ratios[[i, s.label - 1]])
        .sum();
    Ok(-squared / (2.0 * nf * nf) + paired / nf - 0.5)
}

/// Fits on all samples at the given hyperparameters and returns the SMI
/// estimate.
pub fn lsmi_score(
    samples: &[LabeledSample],
    gamma: f64,
    delta: f64,
    basis_cap: usize,
    seed: u64,
) -> Result<f64> {
    let model = fit_density_ratio(samples, gamma, delta, basis_cap, seed)?;
    lsmi_score_with_model(&model, samples)
}

/// An SMI estimate with the hyperparameters chosen for it.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LsmiEstimate {
    pub gamma: f64,
    pub delta: f64,
    pub value: f64,
}

/// Full estimator: cross-validate `(gamma, delta)`, refit on everything,
/// and score.
pub fn lsmi(samples: &[LabeledSample], grid: &CvGrid, seed: u64) -> Result<LsmiEstimate> {
    let (gamma, delta) = cross_validate(samples, grid, seed)?;
    let value = lsmi_score(
        samples,
        gamma,
        delta,
        grid.basis_cap,
        seeds::split(seed, seeds::FINAL_FIT),
    )?;
    Ok(LsmiEstimate {
        gamma,
        delta,
        value,
    })
}
