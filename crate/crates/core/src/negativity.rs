//! Fermionic negativity between two disjoint regions.
//!
//! For a Gaussian state the negativity built from the fermionic partial
//! transpose is a function of two single-particle spectra: that of the
//! correlation block `C_A` on `A = A1 ∪ A2` and that of the matrix `G̃`
//! describing the normalised product of the two Gaussian operators into
//! which the partial transpose decomposes. Results are in natural-log units.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::correlation::CorrelationMatrix;
use crate::dynamics::OpenChain;
use crate::error::{Error, Result};
use crate::spectral;
use crate::CMatrix;

/// Largest imaginary part accepted in an eigenvalue of `G̃`.
pub const IMAGINARY_TOLERANCE: f64 = 1e-8;

/// Two disjoint, nonempty sets of 1-based sites, each stored ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    a1: Vec<usize>,
    a2: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut a1: Vec<usize>, mut a2: Vec<usize>, n_sites: usize) -> Result<Self> {
        if a1.is_empty() || a2.is_empty() {
            return Err(Error::Validation("both regions must be nonempty".into()));
        }
        a1.sort_unstable();
        a2.sort_unstable();
        for set in [&a1, &a2] {
            if set.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation("region lists a site twice".into()));
            }
            if let Some(&bad) = set.iter().find(|&&s| s == 0 || s > n_sites) {
                return Err(Error::SiteOutOfRange { index: bad, n_sites });
            }
        }
        if a1.iter().any(|s| a2.binary_search(s).is_ok()) {
            return Err(Error::Validation("regions overlap".into()));
        }
        Ok(Self { a1, a2 })
    }

    /// Regions `first..=first+len-1` and `N-len+1..=N` at the two chain ends.
    pub fn ends(n_sites: usize, len: usize) -> Result<Self> {
        Self::new(
            (1..=len).collect(),
            (n_sites + 1 - len.min(n_sites)..=n_sites).collect(),
            n_sites,
        )
    }

    pub fn a1(&self) -> &[usize] {
        &self.a1
    }

    pub fn a2(&self) -> &[usize] {
        &self.a2
    }

    /// The same regions with their roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a1: self.a2.clone(),
            a2: self.a1.clone(),
        }
    }

    /// Sites of `A` in block order: `A1` then `A2`.
    fn sites(&self) -> Vec<usize> {
        self.a1.iter().chain(&self.a2).copied().collect()
    }
}

/// Fermionic negativity of `c` between the two regions of `part`.
pub fn fermionic_negativity(c: &CorrelationMatrix, part: &Bipartition) -> Result<f64> {
    let sites = part.sites();
    if let Some(&bad) = sites.iter().find(|&&s| s > c.n_sites()) {
        return Err(Error::SiteOutOfRange {
            index: bad,
            n_sites: c.n_sites(),
        });
    }
    let c_a = c.reduced(&sites)?.into_matrix();
    let n = sites.len();
    let n1 = part.a1.len();
    let g = &c_a * Complex64::new(2.0, 0.0) - CMatrix::identity(n, n);

    let i = Complex64::new(0.0, 1.0);
    let build = |phase: Complex64| {
        DMatrix::from_fn(n, n, |r, s| match (r < n1, s < n1) {
            (true, true) => g[(r, s)],
            (false, false) => -g[(r, s)],
            _ => phase * g[(r, s)],
        })
    };
    let g_plus = build(i);
    let g_minus = build(-i);
    let m = CMatrix::identity(n, n) + &g_plus * &g_minus;
    let x = m
        .lu()
        .solve(&(g_plus + g_minus))
        .ok_or_else(|| Error::SingularSolve("identity plus product of transposed Gaussians".into()))?;
    let g_tilde = (CMatrix::identity(n, n) - x) * Complex64::new(0.5, 0.0);

    let mut neg = 0.0;
    let lambdas = g_tilde
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Internal("Schur form did not converge".into()))?;
    for lam in lambdas.iter() {
        if lam.im.abs() > IMAGINARY_TOLERANCE {
            return Err(Error::ComplexEigenvalue {
                re: lam.re,
                im: lam.im,
            });
        }
        let l = spectral::clip_occupation(lam.re).map_err(|_| Error::ComplexEigenvalue {
            re: lam.re,
            im: lam.im,
        })?;
        neg += (l.sqrt() + (1.0 - l).sqrt()).ln();
    }
    for mu in spectral::hermitian_eigenvalues(&c_a) {
        let mu = spectral::clip_occupation(mu)?;
        neg += 0.5 * (mu * mu + (1.0 - mu) * (1.0 - mu)).ln();
    }
    Ok(neg)
}

/// Negativity along the evolution of `c0` under `model`, sampled every
/// `sample_every` steps as `(t, E)` pairs.
pub fn negativity_quench_series(
    model: &OpenChain,
    c0: &CorrelationMatrix,
    part: &Bipartition,
    dt: f64,
    n_steps: usize,
    sample_every: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    model.evolve_with(c0, dt, n_steps, sample_every, |_, t, c| {
        out.push((t, fermionic_negativity(c, part)?));
        Ok(())
    })?;
    Ok(out)
}
