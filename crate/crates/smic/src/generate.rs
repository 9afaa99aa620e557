//! Synthetic two-dimensional benchmark datasets.
//!
//! Four generators, each returning labeled data: Gaussian blobs at the
//! corners of a square, a Gaussian inside a ring, two interleaved spirals,
//! and nested high/low-variance Gaussians. Labels are drawn i.i.d. from the
//! class priors; the draw is repeated (with a derived seed) in the rare
//! event that some class comes up empty, so the returned dataset always
//! contains every class. All output is deterministic given the seed.

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::seeds;

const BLOB_MEANS: [[f64; 2]; 4] = [[2.0, 2.0], [-2.0, 2.0], [2.0, -2.0], [-2.0, -2.0]];
const BLOB_SD: f64 = 0.5; // covariance 0.25 I
const CIRCLE_RADIUS: f64 = 5.0;
const JITTER_SD: f64 = 0.1; // covariance 0.01 I
const LOW_SD: f64 = 0.1;

fn validate_priors(priors: &[f64], c: usize) -> Result<()> {
    if priors.len() != c {
        return Err(Error::InvalidPrior(format!(
            "expected {} entries, got {}",
            c,
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

/// Draws n labels i.i.d. from the priors; redraws with the next derived
/// seed if any class is missing.
fn draw_labels(n: usize, priors: &[f64], label_seed: u64) -> Result<Vec<usize>> {
    let c = priors.len();
    for attempt in 0..64u64 {
        let mut rng = seeds::rng(seeds::split(label_seed, attempt));
        let labels: Vec<usize> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (y, &p) in priors.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return y + 1;
                    }
                }
                c
            })
            .collect();
        let mut seen = vec![false; c];
        for &y in &labels {
            seen[y - 1] = true;
        }
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
    Err(Error::InvalidPrior(
        "could not draw at least one sample per class".into(),
    ))
}

fn normal2(rng: &mut impl Rng) -> (f64, f64) {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    (a, b)
}

fn add_jitter(points: &mut Array2<f64>, seed: u64) {
    let mut rng = seeds::rng(seeds::split(seed, seeds::NOISE));
    for i in 0..points.nrows() {
        let (a, b) = normal2(&mut rng);
        points[[i, 0]] += JITTER_SD * a;
        points[[i, 1]] += JITTER_SD * b;
    }
}

/// Four Gaussian blobs (c = 4) with means at the corners of a square of
/// half-width 2 and covariance 0.25 I each.
pub fn gen_four_blobs(n: usize, priors: &[f64], seed: u64) -> Result<Dataset> {
    validate_priors(priors, 4)?;
    if n < 4 {
        return Err(Error::TooFewSamples(n));
    }
    let labels = draw_labels(n, priors, seeds::split(seed, seeds::LABELS))?;
    let mut rng = seeds::rng(seeds::split(seed, seeds::POSITIONS));
    let mut points = Array2::zeros((n, 2));
    for (i, &y) in labels.iter().enumerate() {
        let (a, b) = normal2(&mut rng);
        points[[i, 0]] = BLOB_MEANS[y - 1][0] + BLOB_SD * a;
        points[[i, 1]] = BLOB_MEANS[y - 1][1] + BLOB_SD * b;
    }
    Dataset::new(points, Some(labels), "four_blobs")
}

fn circle_base(labels: &[usize], rng: &mut impl Rng) -> Array2<f64> {
    let n2 = labels.iter().filter(|&&y| y == 2).count();
    let mut points = Array2::zeros((labels.len(), 2));
    let mut k = 0usize; // class-2 samples take equi-spaced angles in generation order
    for (i, &y) in labels.iter().enumerate() {
        if y == 1 {
            let (a, b) = normal2(rng);
            points[[i, 0]] = a;
            points[[i, 1]] = b;
        } else {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / n2 as f64;
            points[[i, 0]] = CIRCLE_RADIUS * theta.cos();
            points[[i, 1]] = CIRCLE_RADIUS * theta.sin();
            k += 1;
        }
    }
    points
}

/// A standard-normal cloud (class 1) inside a ring of radius 5 (class 2),
/// with 0.01 I Gaussian noise added to every sample.
pub fn gen_circle_gaussian(n: usize, priors: &[f64], seed: u64) -> Result<Dataset> {
    validate_priors(priors, 2)?;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let labels = draw_labels(n, priors, seeds::split(seed, seeds::LABELS))?;
    let mut rng = seeds::rng(seeds::split(seed, seeds::POSITIONS));
    let mut points = circle_base(&labels, &mut rng);
    add_jitter(&mut points, seed);
    Dataset::new(points, Some(labels), "circle_gaussian")
}

fn spirals_base(labels: &[usize]) -> Array2<f64> {
    let n = labels.len();
    let mut points = Array2::zeros((n, 2));
    // the k-th sample of a class sits at arc position k along that class's
    // arm; the second arm is the first negated (rotated by pi)
    let mut within_class = [0usize; 2];
    for (i, &y) in labels.iter().enumerate() {
        let k = within_class[y - 1];
        within_class[y - 1] += 1;
        let ell = 1.0 + 4.0 * k as f64 / n as f64;
        let m = 3.0 * std::f64::consts::PI * k as f64 / n as f64;
        let sign = if y == 1 { 1.0 } else { -1.0 };
        points[[i, 0]] = sign * ell * m.cos();
        points[[i, 1]] = sign * ell * m.sin();
    }
    points
}

/// Two interleaved spirals (one per class), with 0.01 I Gaussian noise
/// added to every sample.
pub fn gen_double_spirals(n: usize, priors: &[f64], seed: u64) -> Result<Dataset> {
    validate_priors(priors, 2)?;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let labels = draw_labels(n, priors, seeds::split(seed, seeds::LABELS))?;
    let mut points = spirals_base(&labels);
    add_jitter(&mut points, seed);
    Dataset::new(points, Some(labels), "double_spirals")
}

/// Two concentric Gaussians: class 1 with unit covariance, class 2 with
/// covariance 0.01 I.
pub fn gen_high_low(n: usize, priors: &[f64], seed: u64) -> Result<Dataset> {
    validate_priors(priors, 2)?;
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    let labels = draw_labels(n, priors, seeds::split(seed, seeds::LABELS))?;
    let mut rng = seeds::rng(seeds::split(seed, seeds::POSITIONS));
    let mut points = Array2::zeros((n, 2));
    for (i, &y) in labels.iter().enumerate() {
        let sd = if y == 1 { 1.0 } else { LOW_SD };
        let (a, b) = normal2(&mut rng);
        points[[i, 0]] = sd * a;
        points[[i, 1]] = sd * b;
    }
    Dataset::new(points, Some(labels), "high_low")
}

/// Uniform prior vector for `c` classes.
pub fn uniform_priors(c: usize) -> Vec<f64> {
    vec![1.0 / c as f64; c]
}
