//! Top eigenpairs of symmetric sparse matrices.
//!
//! Lanczos iteration with full reorthogonalization. When the recurrence
//! breaks down, an invariant subspace has been exhausted and a fresh
//! deterministic direction is spliced into the basis, so repeated
//! eigenvalues and near-diagonal matrices are handled in a single pass.
//! Once the basis spans the whole space the decomposition is exact up to
//! roundoff, which bounds the work at `n` matrix-vector products.

use crate::error::{Error, Result};
use crate::kernel::SparseKernelMatrix;
use crate::seeds;

use rand::Rng;

// Residual targets, relative to max(1, lambda_1). The accept tolerance is
// well inside the 1e-8 contract so that eigenvalues are accurate to ~1e-10.
const EST_TOL: f64 = 1e-12;
const ACCEPT_TOL: f64 = 1e-11;
const LANCZOS_SEED: u64 = 0x51C5_EED5;

/// The leading eigenpairs of a symmetric matrix, eigenvalues descending,
/// eigenvectors unit-norm and mutually orthogonal.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Vec<Vec<f64>>) -> Result<Self> {
        if eigenvalues.is_empty() || eigenvalues.len() != eigenvectors.len() {
            return Err(Error::InvalidArgument(
                "eigenvalue/eigenvector count mismatch".into(),
            ));
        }
        if eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(
                "eigenvalues must be sorted descending".into(),
            ));
        }
        for (i, v) in eigenvectors.iter().enumerate() {
            if (norm(v) - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "eigenvector {i} is not unit norm"
                )));
            }
            for u in &eigenvectors[..i] {
                if dot(u, v).abs() > 1e-8 {
                    return Err(Error::InvalidArgument(format!(
                        "eigenvector {i} is not orthogonal to earlier ones"
                    )));
                }
            }
        }
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn reorthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let coeff = dot(w, b);
        for (wi, bi) in w.iter_mut().zip(b) {
            *wi -= coeff * bi;
        }
    }
}

fn fresh_direction(rng: &mut impl Rng, basis: &[Vec<f64>], n: usize) -> Result<Vec<f64>> {
    for _ in 0..64 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        reorthogonalize(&mut v, basis);
        reorthogonalize(&mut v, basis);
        let len = norm(&v);
        if len > 1e-6 {
            for x in &mut v {
                *x /= len;
            }
            return Ok(v);
        }
    }
    Err(Error::ConvergenceFailure(
        "could not draw a direction outside the current invariant subspace".into(),
    ))
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by the implicit
/// QL method with Wilkinson shifts. Returns (eigenvalues ascending,
/// eigenvectors as rows of the second element).
fn tridiagonal_eig(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = diag.len();
    debug_assert_eq!(off.len(), m.saturating_sub(1));
    let mut d = diag.to_vec();
    let mut e = vec![0.0; m];
    if m > 1 {
        e[..m - 1].copy_from_slice(off);
    }
    // z[k][i]: component k of eigenvector i, accumulated from identity
    let mut z = vec![vec![0.0; m]; m];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for l in 0..m {
        let mut sweeps = 0;
        loop {
            // first negligible subdiagonal element at or after l
            let mut seg = l;
            while seg + 1 < m {
                let dd = d[seg].abs() + d[seg + 1].abs();
                if e[seg].abs() <= f64::EPSILON * dd {
                    break;
                }
                seg += 1;
            }
            if seg == l {
                break;
            }
            sweeps += 1;
            if sweeps > 50 {
                return Err(Error::ConvergenceFailure(
                    "tridiagonal QL exceeded the sweep budget".into(),
                ));
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r } else { -r };
            g = d[seg] - d[l] + e[l] / (g + sign_r);
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            let mut i = seg;
            while i > l {
                i -= 1;
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[seg] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + 2.0 * c * b;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
                for zk in z.iter_mut() {
                    f = zk[i + 1];
                    zk[i + 1] = s * zk[i] + c * f;
                    zk[i] = c * zk[i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[seg] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let values: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&i| z.iter().map(|row| row[i]).collect())
        .collect();
    Ok((values, vectors))
}

/// Computes the `c` algebraically largest eigenpairs of a symmetric sparse
/// matrix. Deterministic up to the sign of each eigenvector.
pub fn top_eigenpairs(kernel: &SparseKernelMatrix, c: usize) -> Result<EigenSystem> {
    let n = kernel.n();
    if c < 1 || c > n {
        return Err(Error::InvalidArgument(format!(
            "cluster count {c} outside [1, {n}]"
        )));
    }

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut rng = seeds::rng(LANCZOS_SEED);
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut beta_prev = 0.0f64;
    let mut w = vec![0.0; n];

    loop {
        basis.push(v.clone());
        let m = basis.len();
        kernel.matvec(&v, &mut w);
        let alpha = dot(&w, &v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if beta_prev != 0.0 {
            let prev = &basis[m - 2];
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta_prev * pi;
            }
        }
        reorthogonalize(&mut w, &basis);
        reorthogonalize(&mut w, &basis);
        alphas.push(alpha);
        let beta = norm(&w);

        if m >= c {
            let (theta, svecs) = tridiagonal_eig(&alphas, &betas)?;
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| theta[b].partial_cmp(&theta[a]).expect("finite"));
            let scale = theta[order[0]].abs().max(1.0);
            let estimates_pass = order[..c]
                .iter()
                .all(|&idx| (beta * svecs[idx][m - 1]).abs() <= EST_TOL * scale);
            if estimates_pass || m == n {
                if let Some(sys) = assemble(kernel, &basis, &theta, &svecs, &order[..c], scale)? {
                    return Ok(sys);
                }
                if m == n {
                    return Err(Error::ConvergenceFailure(
                        "residuals above tolerance at full basis".into(),
                    ));
                }
            }
        }

        if m == n {
            return Err(Error::ConvergenceFailure(format!(
                "no convergence within {n} Lanczos steps"
            )));
        }

        let scale = alphas
            .iter()
            .chain(betas.iter())
            .fold(1.0f64, |acc, &x| acc.max(x.abs()));
        if beta <= 1e-13 * scale {
            v = fresh_direction(&mut rng, &basis, n)?;
            beta_prev = 0.0;
            betas.push(0.0);
        } else {
            v = w.iter().map(|&x| x / beta).collect();
            beta_prev = beta;
            betas.push(beta);
        }
    }
}

/// Forms Ritz vectors for the chosen tridiagonal eigenpairs and accepts
/// them only if the true residuals pass.
fn assemble(
    kernel: &SparseKernelMatrix,
    basis: &[Vec<f64>],
    theta: &[f64],
    svecs: &[Vec<f64>],
    chosen: &[usize],
    scale: f64,
) -> Result<Option<EigenSystem>> {
    let n = kernel.n();
    let mut values = Vec::with_capacity(chosen.len());
    let mut vectors = Vec::with_capacity(chosen.len());
    let mut kx = vec![0.0; n];
    for &idx in chosen {
        let coeffs = &svecs[idx];
        let mut x = vec![0.0; n];
        for (b, &coeff) in basis.iter().zip(coeffs) {
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += coeff * bi;
            }
        }
        let len = norm(&x);
        if len == 0.0 {
            return Ok(None);
        }
        for xi in &mut x {
            *xi /= len;
        }
        kernel.matvec(&x, &mut kx);
        let residual = x
            .iter()
            .zip(&kx)
            .map(|(&xi, &ki)| (ki - theta[idx] * xi).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual > ACCEPT_TOL * scale {
            return Ok(None);
        }
        values.push(theta[idx]);
        vectors.push(x);
    }
    EigenSystem::new(values, vectors).map(Some)
}
