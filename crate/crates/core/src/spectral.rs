//! Hermitian spectral helpers shared by the entropy, current and variance
//! code.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Eigenvalues of a correlation matrix may leave `[0, 1]` by this much
/// through roundoff before they are treated as unphysical.
pub const SPECTRUM_TOLERANCE: f64 = 1e-10;

/// Distance from `{0, 1}` below which eigenvalues are clipped before taking
/// `log(mu / (1 - mu))`.
pub const LOG_ODDS_CLIP: f64 = 1e-12;

fn decomposition_is_sane(m: &CMatrix, values: &[f64]) -> bool {
    let trace: f64 = (0..m.nrows()).map(|i| m[(i, i)].re).sum();
    let sum: f64 = values.iter().sum();
    values.iter().all(|v| v.is_finite()) && (sum - trace).abs() <= 1e-8 * m.norm().max(1.0)
}

/// Unitary discrete Fourier matrix of size `n`.
fn fourier_basis(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |j, k| {
        Complex64::from_polar(scale, 2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64)
    })
}

/// `symmetric_eigen` can return non-finite eigenvalues for matrices with many
/// exactly vanishing rows (seen on rank-one 128 x 128 projectors). Such
/// results are retried in the Fourier-rotated basis `F m F^†`, which has no
/// structural zeros.
fn raw_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    if decomposition_is_sane(m, &values) {
        return (values, eig.eigenvectors);
    }
    let f = fourier_basis(m.nrows());
    let rotated = &f * m * f.adjoint();
    let eig = hermitian_part(&rotated).symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), f.adjoint() * eig.eigenvectors)
}

/// Ascending eigenvalues and matching eigenvectors (columns) of a Hermitian
/// matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (raw_values, raw_vectors) = raw_eigen(m);
    let mut order: Vec<usize> = (0..raw_values.len()).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let values = order.iter().map(|&k| raw_values[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |i, k| raw_vectors[(i, order[k])]);
    (values, vectors)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    if !decomposition_is_sane(m, &v) {
        let f = fourier_basis(m.nrows());
        v = hermitian_part(&(&f * m * f.adjoint()))
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
    }
    v.sort_by(f64::total_cmp);
    v
}

/// Clamp an occupation eigenvalue into `[0, 1]`, failing when it lies
/// further than [`SPECTRUM_TOLERANCE`] outside.
pub fn clip_occupation(mu: f64) -> Result<f64> {
    if !(mu >= -SPECTRUM_TOLERANCE && mu <= 1.0 + SPECTRUM_TOLERANCE) {
        return Err(Error::Physicality {
            step: None,
            min_eig: mu.min(0.0),
            max_eig: mu.max(1.0),
            hermiticity: 0.0,
        });
    }
    Ok(mu.clamp(0.0, 1.0))
}

/// Binary entropy in bits with `0 log 0 = 0`.
pub fn binary_entropy(mu: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(mu) + term(1.0 - mu)
}

/// `V f(D) V^†` for the Hermitian matrix `V D V^†`.
pub fn hermitian_function(values: &[f64], vectors: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = vectors.nrows();
    let scaled = DMatrix::from_fn(n, values.len(), |i, k| {
        vectors[(i, k)] * Complex64::new(f(values[k]), 0.0)
    });
    scaled * vectors.adjoint()
}

/// `log2(C (1 - C)^{-1})` evaluated in the eigenbasis of `C`.
///
/// Eigenvalues are first checked against [`SPECTRUM_TOLERANCE`] and then
/// clipped into `[LOG_ODDS_CLIP, 1 - LOG_ODDS_CLIP]`. The flag reports
/// whether any eigenvalue needed that second clip.
pub fn log_odds(c: &CMatrix) -> Result<(CMatrix, bool)> {
    let (values, vectors) = hermitian_eigen(c);
    let mut clipped = false;
    let mut mus = Vec::with_capacity(values.len());
    for v in values {
        let mu = clip_occupation(v)?;
        let kept = mu.clamp(LOG_ODDS_CLIP, 1.0 - LOG_ODDS_CLIP);
        clipped |= kept != mu;
        mus.push(kept);
    }
    let m = hermitian_function(&mus, &vectors, |mu| (mu / (1.0 - mu)).log2());
    Ok((m, clipped))
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut r = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    r
}

/// `(M + M^†) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}
