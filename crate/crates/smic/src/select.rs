//! Kernel parameter selection for SMIC.
//!
//! For every neighbor-count candidate `t`, the data is clustered with SMIC,
//! the resulting (feature, label) pairs are scored with LSMI, and the `t`
//! with the highest score wins. One fold seed and one grid are shared by
//! all candidates so scores are comparable; candidates run in parallel and
//! independently, so removing a non-selected candidate never changes the
//! outcome.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{looks_standardized, Dataset};
use crate::eigen::top_eigenpairs;
use crate::error::{Error, Result};
use crate::generate::uniform_priors;
use crate::kernel::{build_neighbors, sparse_local_scaling_kernel};
use crate::lsmi::{lsmi, CvGrid, LabeledSample};
use crate::metrics::Labeling;
use crate::cluster::{assign_clusters, ClusterModel, EIGEN_TIE_BREAK};
use crate::kernel::degree_normalized;
use crate::seeds;

/// One successful kernel parameter candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateReport {
    pub t: usize,
    pub lsmi: f64,
    pub gamma: f64,
    pub delta: f64,
    /// Clusters that came out empty and were dropped before LSMI scoring
    /// (1-based).
    pub dropped_clusters: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub labeling: Labeling,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailedCandidate {
    pub t: usize,
    pub reason: String,
}

/// The full model selection outcome: the score curve, failures, and the
/// winning labeling. Serializes byte-identically across reruns with the
/// same seed.
#[derive(Debug, Clone, Serialize)]
pub struct ModelSelectionReport {
    pub candidates: Vec<CandidateReport>,
    pub failures: Vec<FailedCandidate>,
    pub selected_t: usize,
    pub labeling: Labeling,
    /// False when the input did not look standardized (mean 0, variance 1).
    pub standardized_input: bool,
}

impl ModelSelectionReport {
    /// `(t, lsmi, selected)` rows for plotting.
    pub fn curve(&self) -> Vec<(usize, f64, bool)> {
        self.candidates
            .iter()
            .map(|c| (c.t, c.lsmi, c.t == self.selected_t))
            .collect()
    }
}

/// A selection report together with the winning cluster model (for
/// out-of-sample prediction).
pub struct SelectionOutcome {
    pub report: ModelSelectionReport,
    pub model: ClusterModel,
}

/// Clusters `data` into `c` clusters at one fixed kernel parameter: build
/// the sparse local-scaling kernel, normalize it by degree, take its top
/// eigenvectors, and round them into assignments.
pub fn cluster_once(
    data: &Dataset,
    c: usize,
    t: usize,
    priors: &[f64],
) -> Result<(ClusterModel, Labeling)> {
    let nbrs = build_neighbors(data, t)?;
    let raw = sparse_local_scaling_kernel(&nbrs, data)?;
    let kernel = degree_normalized(&raw, EIGEN_TIE_BREAK);
    let eig = top_eigenpairs(kernel.matrix(), c)?;
    let model = ClusterModel::new(&eig, priors, data, &nbrs, &kernel)?;
    let labeling = assign_clusters(&model);
    Ok((model, labeling))
}

/// Relabels to consecutive `1..=c'` after dropping empty clusters, so LSMI
/// sees every class populated. Returns the compacted labeling and the
/// dropped original cluster indices.
fn compact_labels(labeling: &Labeling) -> (Labeling, Vec<usize>) {
    let sizes = labeling.cluster_sizes();
    let dropped: Vec<usize> = sizes
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s == 0)
        .map(|(y, _)| y + 1)
        .collect();
    if dropped.is_empty() {
        return (labeling.clone(), dropped);
    }
    let mut remap = vec![0usize; sizes.len() + 1];
    let mut next = 0usize;
    for (y, &s) in sizes.iter().enumerate() {
        if s > 0 {
            next += 1;
            remap[y + 1] = next;
        }
    }
    let compacted: Vec<usize> = labeling.assignments().iter().map(|&y| remap[y]).collect();
    (
        Labeling::new(compacted, next).expect("compact labels are valid"),
        dropped,
    )
}

/// Sweeps the kernel parameter candidates, scores each clustering with
/// LSMI, and returns the argmax candidate (ties to the smaller `t`).
pub fn smic_with_model_selection(
    data: &Dataset,
    c: usize,
    t_candidates: &[usize],
    priors: Option<&[f64]>,
    grid: &CvGrid,
    seed: u64,
) -> Result<SelectionOutcome> {
    let n = data.n();
    if t_candidates.is_empty() {
        return Err(Error::InvalidArgument("no kernel parameter candidates".into()));
    }
    let mut ts: Vec<usize> = t_candidates.to_vec();
    ts.sort_unstable();
    ts.dedup();
    for &t in &ts {
        if t < 1 || t > n - 1 {
            return Err(Error::InvalidT { t, max: n - 1 });
        }
    }
    let priors_vec = match priors {
        Some(p) => p.to_vec(),
        None => uniform_priors(c),
    };
    grid.validate()?;
    let standardized_input = looks_standardized(data.points(), 1e-6);
    let lsmi_seed = seeds::split(seed, seeds::LSMI);

    let results: Vec<(usize, Result<(CandidateReport, ClusterModel)>)> = ts
        .par_iter()
        .map(|&t| {
            let outcome = (|| {
                let (model, labeling) = cluster_once(data, c, t, &priors_vec)?;
                let (scored_labels, dropped) = compact_labels(&labeling);
                let samples = LabeledSample::pair_rows(data.points(), &scored_labels);
                let estimate = lsmi(&samples, grid, lsmi_seed)?;
                Ok((
                    CandidateReport {
                        t,
                        lsmi: estimate.value,
                        gamma: estimate.gamma,
                        delta: estimate.delta,
                        dropped_clusters: dropped,
                        eigenvalues: model.eigenvalues().to_vec(),
                        labeling,
                    },
                    model,
                ))
            })();
            (t, outcome)
        })
        .collect();

    let mut candidates = Vec::new();
    let mut models = Vec::new();
    let mut failures = Vec::new();
    for (t, outcome) in results {
        match outcome {
            Ok((report, model)) => {
                candidates.push(report);
                models.push(model);
            }
            Err(err) => failures.push(FailedCandidate {
                t,
                reason: err.to_string(),
            }),
        }
    }
    if candidates.is_empty() {
        let first = failures
            .first()
            .map(|f| format!("t={}: {}", f.t, f.reason))
            .unwrap_or_default();
        return Err(Error::AllCandidatesFailed(first));
    }

    let mut best = 0usize;
    for (i, cand) in candidates.iter().enumerate() {
        if cand.lsmi > candidates[best].lsmi {
            best = i;
        }
    }
    let report = ModelSelectionReport {
        selected_t: candidates[best].t,
        labeling: candidates[best].labeling.clone(),
        candidates,
        failures,
        standardized_input,
    };
    let model = models.swap_remove(best);
    Ok(SelectionOutcome { report, model })
}
