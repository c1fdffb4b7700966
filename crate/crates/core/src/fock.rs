//! Exact many-body representation of small chains in the `2^N` Fock space.
//!
//! Basis states are bitmasks: bit `j - 1` holds the occupation of site `j`.
//! Fermionic operators use the Jordan-Wigner string ordered left to right,
//! `c_j |n> = (-1)^{n_1 + ... + n_{j-1}} |n - e_j>`.
//!
//! Besides serving the trajectory simulation, the dense Gaussian density
//! matrix built here is the brute-force oracle for every correlation-matrix
//! formula in the crate.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;

use crate::correlation::CorrelationMatrix;
use crate::dynamics::OpenChain;
use crate::error::{Error, Result};
use crate::spectral;
use crate::CMatrix;

/// Largest chain lifted to sparse Fock-space operators.
pub const MAX_FOCK_SITES: usize = 14;

/// Largest chain for which dense `2^N x 2^N` density matrices are built.
pub const MAX_DENSE_SITES: usize = 10;

pub type SparseOp = CsrMatrix<Complex64>;

fn check_size(n_sites: usize, max: usize) -> Result<()> {
    if n_sites == 0 {
        return Err(Error::Validation("empty chain".into()));
    }
    if n_sites > max {
        return Err(Error::TooLarge { n_sites, max });
    }
    Ok(())
}

/// Sign of the Jordan-Wigner string in front of site `j` (1-based).
pub fn jw_sign(state: usize, j: usize) -> f64 {
    let below = state & ((1usize << (j - 1)) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Annihilation operator `c_j` (1-based) on `n_sites` sites.
pub fn annihilation(n_sites: usize, j: usize) -> Result<SparseOp> {
    check_size(n_sites, MAX_FOCK_SITES)?;
    if j == 0 || j > n_sites {
        return Err(Error::SiteOutOfRange { index: j, n_sites });
    }
    let dim = 1usize << n_sites;
    let bit = 1usize << (j - 1);
    let mut coo = CooMatrix::new(dim, dim);
    for s in (0..dim).filter(|s| s & bit != 0) {
        coo.push(s ^ bit, s, Complex64::new(jw_sign(s, j), 0.0));
    }
    Ok(CsrMatrix::from(&coo))
}

/// Creation operator `c_j^†`.
pub fn creation(n_sites: usize, j: usize) -> Result<SparseOp> {
    Ok(annihilation(n_sites, j)?.transpose())
}

/// `sum_ij h_ij c_i^† c_j`.
pub fn many_body_hamiltonian(h: &CMatrix) -> Result<SparseOp> {
    let n = h.nrows();
    check_size(n, MAX_FOCK_SITES)?;
    let dim = 1usize << n;
    let mut coo = CooMatrix::new(dim, dim);
    for s in 0..dim {
        for j in 1..=n {
            if s & (1 << (j - 1)) == 0 {
                continue;
            }
            let after_c = s ^ (1 << (j - 1));
            let sign_c = jw_sign(s, j);
            for i in 1..=n {
                let hij = h[(i - 1, j - 1)];
                if hij == Complex64::new(0.0, 0.0) || after_c & (1 << (i - 1)) != 0 {
                    continue;
                }
                let target = after_c | (1 << (i - 1));
                coo.push(target, s, hij * (sign_c * jw_sign(after_c, i)));
            }
        }
    }
    Ok(CsrMatrix::from(&coo))
}

/// Which reservoir process a jump operator describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    /// `sqrt(Gamma_j) c_j^†`.
    Inject,
    /// `sqrt(gamma_j) c_j`.
    Remove,
}

#[derive(Debug, Clone)]
pub struct JumpOperator {
    pub kind: JumpKind,
    pub site: usize,
    pub rate: f64,
    /// Includes the factor `sqrt(rate)`.
    pub op: SparseOp,
}

/// Many-body Hamiltonian and the jump operators of every nonzero rate.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub n_sites: usize,
    pub hamiltonian: SparseOp,
    pub jumps: Vec<JumpOperator>,
}

pub fn build_fock_operators(model: &OpenChain) -> Result<FockOperators> {
    let n = model.n_sites();
    check_size(n, MAX_FOCK_SITES)?;
    let mut jumps = Vec::new();
    let res = model.reservoirs();
    for j in 1..=n {
        for (kind, rate) in [(JumpKind::Inject, res.inject_at(j)), (JumpKind::Remove, res.remove_at(j))] {
            if rate == 0.0 {
                continue;
            }
            let base = match kind {
                JumpKind::Inject => creation(n, j)?,
                JumpKind::Remove => annihilation(n, j)?,
            };
            jumps.push(JumpOperator {
                kind,
                site: j,
                rate,
                op: base * Complex64::new(rate.sqrt(), 0.0),
            });
        }
    }
    Ok(FockOperators {
        n_sites: n,
        hamiltonian: many_body_hamiltonian(model.hamiltonian())?,
        jumps,
    })
}

fn sparse_to_dense(op: &SparseOp) -> CMatrix {
    let mut m = DMatrix::zeros(op.nrows(), op.ncols());
    for (i, j, v) in op.triplet_iter() {
        m[(i, j)] += *v;
    }
    m
}

/// Dense density matrix of the Gaussian state with correlation matrix `c`,
/// `prod_k [nu_k d_k^† d_k + (1 - nu_k) d_k d_k^†]` over the eigenmodes
/// `d_k = sum_j u_k(j) c_j` of `C u_k = nu_k u_k`.
pub fn gaussian_density_matrix(c: &CorrelationMatrix) -> Result<CMatrix> {
    let n = c.n_sites();
    check_size(n, MAX_DENSE_SITES)?;
    let dim = 1usize << n;
    let (nus, u) = spectral::hermitian_eigen(c.matrix());
    let cs: Vec<CMatrix> = (1..=n)
        .map(|j| annihilation(n, j).map(|op| sparse_to_dense(&op)))
        .collect::<Result<_>>()?;
    let mut rho = CMatrix::identity(dim, dim);
    for (k, &nu) in nus.iter().enumerate() {
        let nu = spectral::clip_occupation(nu)?;
        let mut d = CMatrix::zeros(dim, dim);
        for j in 0..n {
            d += &cs[j] * u[(j, k)];
        }
        let dd = d.adjoint();
        let number = &dd * &d;
        let hole = &d * &dd;
        let factor = number * Complex64::new(nu, 0.0) + hole * Complex64::new(1.0 - nu, 0.0);
        rho = rho * factor;
    }
    Ok(rho)
}

/// `Tr(rho c_i^† c_j)` for all pairs.
pub fn correlation_from_density(rho: &CMatrix, n_sites: usize) -> Result<CMatrix> {
    check_size(n_sites, MAX_DENSE_SITES)?;
    let dim = 1usize << n_sites;
    let mut c = CMatrix::zeros(n_sites, n_sites);
    for s in 0..dim {
        for j in 1..=n_sites {
            if s & (1 << (j - 1)) == 0 {
                continue;
            }
            let mid = s ^ (1 << (j - 1));
            let sj = jw_sign(s, j);
            for i in 1..=n_sites {
                if mid & (1 << (i - 1)) != 0 {
                    continue;
                }
                let t = mid | (1 << (i - 1));
                // <c_i^† c_j> = sum_s rho[s, t] <t| c_i^† c_j |s>
                c[(i - 1, j - 1)] += rho[(s, t)] * (sj * jw_sign(mid, i));
            }
        }
    }
    Ok(c)
}

/// `<psi| A |psi>` for a sparse operator.
pub fn expectation(psi: &DVector<Complex64>, op: &SparseOp) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, j, v) in op.triplet_iter() {
        acc += psi[i].conj() * v * psi[j];
    }
    acc
}

/// `Tr(rho A)` for a sparse operator.
pub fn expectation_mixed(rho: &CMatrix, op: &SparseOp) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, j, v) in op.triplet_iter() {
        acc += v * rho[(j, i)];
    }
    acc
}

fn segment_split(n_sites: usize, j_left: usize, j_right: usize) -> Result<(usize, usize)> {
    if j_left == 0 || j_left > j_right || j_right > n_sites {
        return Err(Error::Validation(format!(
            "invalid segment {j_left}..={j_right} of {n_sites} sites"
        )));
    }
    Ok((j_left - 1, j_right - j_left + 1))
}

/// Splits a basis state into (segment bits, remaining bits packed).
fn split_state(s: usize, shift: usize, len: usize) -> (usize, usize) {
    let mask = (1usize << len) - 1;
    let a = (s >> shift) & mask;
    let low = s & ((1usize << shift) - 1);
    let high = s >> (shift + len);
    (a, low | (high << shift))
}

/// Reduced density matrix of `|psi><psi|` on the segment `j_left..=j_right`.
///
/// The plain partial trace in the occupation basis equals the fermionic
/// reduced state whenever `psi` has definite particle-number parity, which
/// holds for every state produced by this crate.
pub fn reduced_density_pure(
    psi: &DVector<Complex64>,
    n_sites: usize,
    j_left: usize,
    j_right: usize,
) -> Result<CMatrix> {
    let (shift, len) = segment_split(n_sites, j_left, j_right)?;
    let dim_a = 1usize << len;
    let dim_e = 1usize << (n_sites - len);
    let mut m = CMatrix::zeros(dim_a, dim_e);
    for (s, amp) in psi.iter().enumerate() {
        let (a, e) = split_state(s, shift, len);
        m[(a, e)] = *amp;
    }
    Ok(&m * m.adjoint())
}

/// Information (bits) of a segment in the pure state `psi`. The entropy is
/// taken from whichever of the segment and its complement has the smaller
/// Hilbert space; both share the nonzero spectrum.
pub fn pure_segment_information(
    psi: &DVector<Complex64>,
    n_sites: usize,
    j_left: usize,
    j_right: usize,
) -> Result<f64> {
    let (shift, len) = segment_split(n_sites, j_left, j_right)?;
    let dim_a = 1usize << len;
    let dim_e = 1usize << (n_sites - len);
    let mut m = CMatrix::zeros(dim_a, dim_e);
    for (s, amp) in psi.iter().enumerate() {
        let (a, e) = split_state(s, shift, len);
        m[(a, e)] = *amp;
    }
    let gram = if dim_a <= dim_e {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    Ok(len as f64 - entropy_bits(&gram))
}

/// Reduced density matrix of a mixed state on a segment.
pub fn reduced_density(rho: &CMatrix, n_sites: usize, j_left: usize, j_right: usize) -> Result<CMatrix> {
    let (shift, len) = segment_split(n_sites, j_left, j_right)?;
    let dim = 1usize << n_sites;
    let mut out = CMatrix::zeros(1 << len, 1 << len);
    for s in 0..dim {
        let (a, e) = split_state(s, shift, len);
        for t in 0..dim {
            let (b, f) = split_state(t, shift, len);
            if e == f {
                out[(a, b)] += rho[(s, t)];
            }
        }
    }
    Ok(out)
}

/// von Neumann entropy in bits.
pub fn entropy_bits(rho: &CMatrix) -> f64 {
    spectral::hermitian_eigenvalues(&spectral::hermitian_part(rho))
        .into_iter()
        .filter(|&p| p > 1e-300)
        .map(|p| -p * p.log2())
        .sum()
}

/// Information `n_sites(A) - S(rho_A)` in bits of a segment density matrix.
pub fn information_bits(rho_a: &CMatrix) -> f64 {
    let n_a = rho_a.nrows().trailing_zeros() as f64;
    n_a - entropy_bits(rho_a)
}
