//! Sample matrices with optional ground-truth labels.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// An `n x d` matrix of feature vectors, optionally carrying ground-truth
/// class labels in `{1..c}`.
///
/// Invariants enforced at construction: all entries finite, `n >= 2`,
/// `d >= 1`, and if labels are present every value in `{1..c}` occurs at
/// least once (where `c` is the largest label).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Array2<f64>,
    labels: Option<Vec<usize>>,
    name: String,
}

impl Dataset {
    pub fn new(
        points: Array2<f64>,
        labels: Option<Vec<usize>>,
        name: impl Into<String>,
    ) -> Result<Self> {
        let (n, d) = (points.nrows(), points.ncols());
        if n < 2 {
            return Err(Error::TooFewSamples(n));
        }
        if d < 1 {
            return Err(Error::InvalidData("need at least one feature".into()));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        if let Some(ref ls) = labels {
            validate_labels(ls, n)?;
        }
        Ok(Self {
            points,
            labels,
            name: name.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn d(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.points.view()
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Number of ground-truth classes (largest label), if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|ls| ls.iter().copied().max().unwrap_or(0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

fn validate_labels(labels: &[usize], n: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::LengthMismatch(labels.len(), n));
    }
    let c = *labels.iter().max().expect("n >= 2");
    if labels.iter().any(|&y| y == 0) {
        return Err(Error::InvalidData("labels must be 1-based".into()));
    }
    let mut seen = vec![false; c];
    for &y in labels {
        seen[y - 1] = true;
    }
    if let Some(missing) = seen.iter().position(|&s| !s) {
        return Err(Error::InvalidData(format!(
            "label {} never occurs (labels must cover 1..={})",
            missing + 1,
            c
        )));
    }
    Ok(())
}

/// Shifts and scales each dimension to mean 0 and variance 1.
///
/// Uses the population variance (divisor `n`). The input is untouched;
/// labels and name carry over. A constant column is an error.
pub fn standardize(data: &Dataset) -> Result<Dataset> {
    let x = data.points();
    let (n, d) = (x.nrows(), x.ncols());
    let mut out = x.to_owned();
    for j in 0..d {
        let col = x.column(j);
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &v in col {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if lo == hi {
            return Err(Error::ZeroVariance(j));
        }
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for i in 0..n {
            out[[i, j]] = (x[[i, j]] - mean) / sd;
        }
    }
    Dataset::new(out, data.labels.clone(), data.name.clone())
}

/// Column means and population variances, mainly for diagnostics and tests.
pub fn column_moments(points: ArrayView2<'_, f64>) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (points.nrows(), points.ncols());
    let mut means = Vec::with_capacity(d);
    let mut vars = Vec::with_capacity(d);
    for j in 0..d {
        let col = points.column(j);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        means.push(mean);
        vars.push(var);
    }
    (means, vars)
}

/// True when every column already has mean ~0 and variance ~1.
pub(crate) fn looks_standardized(points: ArrayView2<'_, f64>, tol: f64) -> bool {
    let (means, vars) = column_moments(points);
    means.iter().all(|m| m.abs() <= tol) && vars.iter().all(|v| (v - 1.0).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rejects_bad_inputs() {
        assert!(Dataset::new(array![[1.0, 2.0]], None, "one").is_err());
        assert!(Dataset::new(array![[1.0], [f64::NAN]], None, "nan").is_err());
        // label 0 and a gap in 1..=c are both invalid
        assert!(Dataset::new(array![[1.0], [2.0]], Some(vec![0, 1]), "zero").is_err());
        assert!(Dataset::new(array![[1.0], [2.0]], Some(vec![1, 3]), "gap").is_err());
        assert!(Dataset::new(array![[1.0], [2.0]], Some(vec![1, 2]), "ok").is_ok());
    }

    #[test]
    fn standardize_two_point_column() {
        let data = Dataset::new(array![[1.0], [3.0]], None, "pair").unwrap();
        let out = standardize(&data).unwrap();
        assert_eq!(out.points()[[0, 0]], -1.0);
        assert_eq!(out.points()[[1, 0]], 1.0);
    }

    #[test]
    fn standardize_is_idempotent() {
        let data = Dataset::new(
            array![[0.3, -2.0], [1.9, 0.5], [-0.7, 4.25], [2.2, 0.125]],
            None,
            "m",
        )
        .unwrap();
        let once = standardize(&data).unwrap();
        let twice = standardize(&once).unwrap();
        for (a, b) in once.points().iter().zip(twice.points().iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn standardize_constant_column_errors() {
        let data = Dataset::new(array![[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], None, "c").unwrap();
        match standardize(&data) {
            Err(Error::ZeroVariance(1)) => {}
            other => panic!("expected ZeroVariance(1), got {other:?}"),
        }
    }

    #[test]
    fn standardized_moments_are_exactly_normalized() {
        let data = Dataset::new(
            array![[10.0, 3.0], [12.5, -1.0], [9.25, 0.0], [11.0, 7.5], [8.0, 2.25]],
            None,
            "m",
        )
        .unwrap();
        let out = standardize(&data).unwrap();
        let (means, vars) = column_moments(out.points());
        for m in means {
            assert!(m.abs() <= 1e-12);
        }
        for v in vars {
            assert!((v - 1.0).abs() <= 1e-12);
        }
        assert!(looks_standardized(out.points(), 1e-6));
        assert!(!looks_standardized(data.points(), 1e-6));
    }
}
