//! The correlation matrix `C_ij = <c_i^† c_j>` and its physicality checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::spectral::{self, SPECTRUM_TOLERANCE};
use crate::CMatrix;

/// Absolute Hermiticity tolerance accepted by [`CorrelationMatrix::new`].
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;

/// Hermitian `N x N` two-point correlation matrix of a Gaussian state.
///
/// Construction enforces Hermiticity (the stored matrix is exactly
/// Hermitian); the `[0, 1]` spectrum is checked separately by
/// [`CorrelationMatrix::check_physicality`] because callers differ in how
/// strict they need to be.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(CMatrix);

/// Summary of how close a matrix is to a valid correlation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Expected total particle number.
    pub trace: f64,
}

impl PhysicalityReport {
    pub fn is_physical(&self, tolerance: f64) -> bool {
        self.hermiticity_residual <= HERMITICITY_TOLERANCE.max(tolerance)
            && self.min_eigenvalue >= -tolerance
            && self.max_eigenvalue <= 1.0 + tolerance
    }

    pub(crate) fn into_error(self, step: Option<usize>) -> Error {
        Error::Physicality {
            step,
            min_eig: self.min_eigenvalue,
            max_eig: self.max_eigenvalue,
            hermiticity: self.hermiticity_residual,
        }
    }
}

/// Hermiticity residual, extremal eigenvalues and trace of any square matrix.
pub fn check_physicality(m: &CMatrix) -> PhysicalityReport {
    let hermiticity_residual = spectral::hermiticity_residual(m);
    let eig = spectral::hermitian_eigenvalues(&spectral::hermitian_part(m));
    PhysicalityReport {
        hermiticity_residual,
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        max_eigenvalue: eig.last().copied().unwrap_or(0.0),
        trace: m.trace().re,
    }
}

impl CorrelationMatrix {
    /// Wraps a square matrix that is Hermitian within
    /// [`HERMITICITY_TOLERANCE`]; the stored copy is symmetrised exactly.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::Validation("empty correlation matrix".into()));
        }
        let residual = spectral::hermiticity_residual(&m);
        if !(residual <= HERMITICITY_TOLERANCE) {
            return Err(Error::Physicality {
                step: None,
                min_eig: f64::NAN,
                max_eig: f64::NAN,
                hermiticity: residual,
            });
        }
        Ok(Self(spectral::hermitian_part(&m)))
    }

    /// Like [`CorrelationMatrix::new`] but additionally requires the spectrum
    /// to lie in `[0, 1]` within [`SPECTRUM_TOLERANCE`].
    pub fn new_physical(m: CMatrix) -> Result<Self> {
        let c = Self::new(m)?;
        let report = c.check_physicality();
        if !report.is_physical(SPECTRUM_TOLERANCE) {
            return Err(report.into_error(None));
        }
        Ok(c)
    }

    /// Symmetrises without checking. Used for integrator output, which is
    /// Hermitian up to accumulated roundoff.
    pub(crate) fn from_hermitian_part(m: &CMatrix) -> Self {
        Self(spectral::hermitian_part(m))
    }

    /// Vacuum: every site empty.
    pub fn empty(n_sites: usize) -> Self {
        Self(DMatrix::zeros(n_sites, n_sites))
    }

    /// Every site occupied.
    pub fn filled(n_sites: usize) -> Self {
        Self(DMatrix::identity(n_sites, n_sites))
    }

    /// `C = I / 2`, the infinite-temperature state.
    pub fn maximally_mixed(n_sites: usize) -> Self {
        Self(DMatrix::identity(n_sites, n_sites) * Complex64::new(0.5, 0.0))
    }

    /// Uncorrelated product state with the given occupations.
    pub fn product(occupations: &[f64]) -> Result<Self> {
        let d: Vec<Complex64> = occupations.iter().map(|&o| Complex64::new(o, 0.0)).collect();
        Self::new_physical(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)))
    }

    /// Random physical correlation matrix `U diag(nu) U^†` with `nu` drawn
    /// uniformly from `[lo, hi]` and `U` the eigenvectors of a random
    /// Hermitian matrix.
    pub fn random<R: Rng + ?Sized>(n_sites: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let a = DMatrix::from_fn(n_sites, n_sites, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let herm = &a + a.adjoint();
        let (_, u) = spectral::hermitian_eigen(&herm);
        let nu: Vec<f64> = (0..n_sites).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
        Self::from_hermitian_part(&spectral::hermitian_function(&nu, &u, |x| x))
    }

    /// Random pure Gaussian state with `n_particles` fermions.
    pub fn random_pure<R: Rng + ?Sized>(n_sites: usize, n_particles: usize, rng: &mut R) -> Self {
        let mut c = Self::random(n_sites, 0.0, 1.0, rng);
        let (_, u) = spectral::hermitian_eigen(&c.0);
        let nu: Vec<f64> = (0..n_sites)
            .map(|k| if k < n_particles { 1.0 } else { 0.0 })
            .collect();
        c = Self::from_hermitian_part(&spectral::hermitian_function(&nu, &u, |x| x));
        c
    }

    pub fn n_sites(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `C_ij` for 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i - 1, j - 1)]
    }

    /// Occupation `n_j = C_jj` for 1-based `j`.
    pub fn occupation(&self, j: usize) -> f64 {
        self.0[(j - 1, j - 1)].re
    }

    pub fn occupations(&self) -> Vec<f64> {
        (0..self.n_sites()).map(|j| self.0[(j, j)].re).collect()
    }

    /// Expected total particle number.
    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn check_physicality(&self) -> PhysicalityReport {
        check_physicality(&self.0)
    }

    /// Submatrix on the given 1-based sites, in the given order.
    pub fn reduced(&self, sites: &[usize]) -> Result<CorrelationMatrix> {
        if sites.is_empty() {
            return Err(Error::Validation("empty site set".into()));
        }
        let n = self.n_sites();
        if let Some(&bad) = sites.iter().find(|&&s| s == 0 || s > n) {
            return Err(Error::SiteOutOfRange {
                index: bad,
                n_sites: n,
            });
        }
        let k = sites.len();
        Ok(Self(DMatrix::from_fn(k, k, |a, b| {
            self.0[(sites[a] - 1, sites[b] - 1)]
        })))
    }

    /// Submatrix on the contiguous segment `j_left..=j_right` (1-based).
    pub fn segment(&self, j_left: usize, j_right: usize) -> CMatrix {
        let len = j_right + 1 - j_left;
        self.0.view((j_left - 1, j_left - 1), (len, len)).into_owned()
    }

    /// Frobenius distance to another correlation matrix.
    pub fn distance(&self, other: &CorrelationMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CorrelationMatrix) -> f64 {
        (&self.0 - &other.0).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }
}
