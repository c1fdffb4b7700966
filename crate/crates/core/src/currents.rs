//! Information currents on the information lattice.
//!
//! For a segment `A` the information `I_A` changes through three channels:
//! unitary currents across its left and right boundary and a dissipative
//! current into the reservoirs,
//!
//! ```text
//! dI_A/dt = -I_L - I_R - I_E.
//! ```
//!
//! These "triangle" currents belong to whole segments. Differencing them
//! over the lattice, in the same way the local information is obtained from
//! segment informations, gives effective currents `Ĩ` attached to single
//! cells that obey a local continuity equation on the lattice.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::correlation::CorrelationMatrix;
use crate::dynamics::OpenChain;
use crate::error::{Error, Result};
use crate::lattice::{self, LatticeCoord, Triangular};
use crate::spectral::{self, LOG_ODDS_CLIP};
use crate::CMatrix;

/// Largest imaginary part tolerated in a current trace, relative to
/// `max(1, |real part|)`.
pub const IMAGINARY_RESIDUE_TOLERANCE: f64 = 1e-10;

/// Boundary and environment generators of a segment's correlation block.
#[derive(Debug, Clone, PartialEq)]
pub struct FMatrices {
    pub left: CMatrix,
    pub right: CMatrix,
    pub env: CMatrix,
}

fn check_segment(n_sites: usize, j_left: usize, j_right: usize) -> Result<()> {
    if j_left == 0 || j_left > j_right {
        return Err(Error::Validation(format!(
            "invalid segment {j_left}..={j_right}"
        )));
    }
    if j_right > n_sites {
        return Err(Error::SiteOutOfRange {
            index: j_right,
            n_sites,
        });
    }
    Ok(())
}

/// `F_L`, `F_R`, `F_E` of the segment `j_left..=j_right` (1-based), such that
///
/// ```text
/// dC_A/dt = i [H_A^T, C_A] + i F_L + i F_R + F_E.
/// ```
pub fn f_matrices(
    model: &OpenChain,
    c: &CorrelationMatrix,
    j_left: usize,
    j_right: usize,
) -> Result<FMatrices> {
    let n = model.n_sites();
    if c.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.n_sites(),
        });
    }
    check_segment(n, j_left, j_right)?;
    let h = model.hamiltonian();
    let cm = c.matrix();
    let a0 = j_left - 1;
    let na = j_right - j_left + 1;
    let nl = a0;
    let nr = n - j_right;

    let left = if nl > 0 {
        let h_la = h.view((0, a0), (nl, na));
        let c_la = cm.view((0, a0), (nl, na));
        h_la.transpose() * c_la - c_la.adjoint() * h_la.map(|z| z.conj())
    } else {
        CMatrix::zeros(na, na)
    };
    let right = if nr > 0 {
        let h_ar = h.view((a0, j_right), (na, nr));
        let c_ar = cm.view((a0, j_right), (na, nr));
        h_ar.map(|z| z.conj()) * c_ar.adjoint() - c_ar * h_ar.transpose()
    } else {
        CMatrix::zeros(na, na)
    };

    let res = model.reservoirs();
    let c_a = cm.view((a0, a0), (na, na));
    let env = CMatrix::from_fn(na, na, |i, k| {
        let di = res.inject()[a0 + i] + res.remove()[a0 + i];
        let dk = res.inject()[a0 + k] + res.remove()[a0 + k];
        let mut v = -c_a[(i, k)] * (0.5 * (di + dk));
        if i == k {
            v += res.inject()[a0 + i];
        }
        v
    });
    Ok(FMatrices { left, right, env })
}

/// The three currents out of one segment.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TriangleCurrent {
    pub left: f64,
    pub right: f64,
    pub env: f64,
    /// Set when an eigenvalue of `C_A` had to be moved away from 0 or 1
    /// before taking the logarithm. Such currents are only as meaningful
    /// as the clip.
    pub clipped: bool,
}

impl TriangleCurrent {
    /// Rejects currents that depend on a clipped logarithm.
    pub fn require_unclipped(self) -> Result<Self> {
        if self.clipped {
            return Err(Error::SingularLogarithm {
                eigenvalue: LOG_ODDS_CLIP,
            });
        }
        Ok(self)
    }

    /// `dI_A/dt` implied by the currents.
    pub fn information_rate(&self) -> f64 {
        -self.left - self.right - self.env
    }
}

fn real_trace(z: Complex64) -> Result<f64> {
    if !(z.im.abs() <= IMAGINARY_RESIDUE_TOLERANCE * z.re.abs().max(1.0)) {
        return Err(Error::ImaginaryResidue(z.im));
    }
    Ok(z.re)
}

/// Triangle currents of the segment `j_left..=j_right` (1-based).
pub fn triangle_currents(
    model: &OpenChain,
    c: &CorrelationMatrix,
    j_left: usize,
    j_right: usize,
) -> Result<TriangleCurrent> {
    let f = f_matrices(model, c, j_left, j_right)?;
    let (log_odds, clipped) = spectral::log_odds(&c.segment(j_left, j_right))?;
    let minus_i = Complex64::new(0.0, -1.0);
    Ok(TriangleCurrent {
        left: real_trace(minus_i * spectral::trace_of_product(&f.left, &log_odds))?,
        right: real_trace(minus_i * spectral::trace_of_product(&f.right, &log_odds))?,
        env: real_trace(-spectral::trace_of_product(&f.env, &log_odds))?,
        clipped,
    })
}

/// Triangle currents of every segment, computed in parallel.
pub fn all_triangle_currents(
    model: &OpenChain,
    c: &CorrelationMatrix,
) -> Result<Triangular<TriangleCurrent>> {
    Triangular::par_try_from_fn(model.n_sites(), |cell| {
        triangle_currents(model, c, cell.j_left(), cell.j_right())
    })
}

/// Effective currents attached to one lattice cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EffectiveCurrent {
    /// Leaves the cell towards `(ell + 1, n - 1/2)`.
    pub left: f64,
    /// Leaves the cell towards `(ell + 1, n + 1/2)`.
    pub right: f64,
    /// Leaves the cell into the reservoirs.
    pub env: f64,
    pub clipped: bool,
}

/// Effective currents `Ĩ` on every cell of the lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentLattice {
    pub cells: Triangular<EffectiveCurrent>,
}

/// Differences the triangle currents into effective currents:
///
/// ```text
/// Ĩ_L(ell, n) = I_L(ell, n) - I_L(ell-1, n-1/2)
/// Ĩ_R(ell, n) = I_R(ell, n) - I_R(ell-1, n+1/2)
/// Ĩ_E(ell, n) = I_E(ell, n) - I_E(ell-1, n∓1/2) + I_E(ell-2, n)
/// ```
pub fn effective_currents(tri: &Triangular<TriangleCurrent>) -> CurrentLattice {
    let get = |c: Option<LatticeCoord>| tri.get_or_default(c);
    let cells = Triangular::from_fn(tri.n_sites(), |c| {
        let here = get(Some(c));
        let dl = get(c.down_left());
        let dr = get(c.down_right());
        let d2 = get(c.down_two());
        EffectiveCurrent {
            left: here.left - dl.left,
            right: here.right - dr.right,
            env: here.env - dl.env - dr.env + d2.env,
            clipped: here.clipped || dl.clipped || dr.clipped || d2.clipped,
        }
    });
    CurrentLattice { cells }
}

/// Triangle currents and effective currents of `c` in one call.
pub fn current_lattice(model: &OpenChain, c: &CorrelationMatrix) -> Result<CurrentLattice> {
    Ok(effective_currents(&all_triangle_currents(model, c)?))
}

impl CurrentLattice {
    pub fn n_sites(&self) -> usize {
        self.cells.n_sites()
    }

    pub fn get(&self, c: LatticeCoord) -> Option<&EffectiveCurrent> {
        self.cells.get(c)
    }

    fn at(&self, c: Option<LatticeCoord>) -> EffectiveCurrent {
        self.cells.get_or_default(c)
    }

    /// Right-hand side of the lattice continuity equation for `di/dt`:
    /// inflow from the two cells below minus the three outflows.
    pub fn local_information_rate(&self, c: LatticeCoord) -> f64 {
        let here = self.at(Some(c));
        -here.left - here.right + self.at(c.down_left()).right + self.at(c.down_right()).left
            - here.env
    }

    /// `di/dt - (inflow - outflow)` on every cell.
    pub fn balance_residual(&self, di_dt: &Triangular<f64>) -> Triangular<f64> {
        Triangular::from_fn(self.n_sites(), |c| {
            di_dt.get(c).copied().unwrap_or(0.0) - self.local_information_rate(c)
        })
    }

    /// Balance residual for a stationary state.
    pub fn stationary_residual(&self) -> Triangular<f64> {
        Triangular::from_fn(self.n_sites(), |c| -self.local_information_rate(c))
    }

    /// Net information flowing out of the whole chain into the reservoirs.
    pub fn total_dissipative(&self) -> f64 {
        self.cells.values().iter().map(|e| e.env).sum()
    }

    /// Horizontal currents `(J_{n+}, J_{n-})` at the integer column `n`
    /// (1-based), from the effective currents.
    ///
    /// `J_{n+}` is the net rightward flow across the line between the
    /// columns at `n` and `n + 1/2`: rightward currents of the even-scale
    /// cells centred at `n` minus leftward currents of the odd-scale cells
    /// centred at `n + 1/2`. `J_{n-}` is the mirror image on the left of `n`.
    /// Only interior cells (touching neither chain end) contribute, so the
    /// two outer diagonals, which exchange information with the end
    /// reservoirs, are excluded. Both vanish identically at `n = 1` and
    /// `n = N`.
    pub fn horizontal(&self, n: usize) -> Result<(f64, f64)> {
        let big_n = self.n_sites();
        check_column(big_n, n)?;
        let mut plus = 0.0;
        let mut minus = 0.0;
        for (c, e) in self.cells.iter() {
            if !is_interior(c, big_n) {
                continue;
            }
            if c.ell % 2 == 0 && c.n2 == 2 * n {
                plus += e.right;
                minus += e.left;
            } else if c.ell % 2 == 1 && c.n2 == 2 * n + 1 {
                plus -= e.left;
            } else if c.ell % 2 == 1 && c.n2 + 1 == 2 * n {
                minus -= e.right;
            }
        }
        Ok((plus, minus))
    }

    /// Net information flowing from scale `ell` up to scale `ell + 1`.
    pub fn vertical(&self, ell: usize) -> Result<f64> {
        if ell >= self.n_sites() {
            return Err(Error::Validation(format!(
                "scale {ell} outside a lattice of {} sites",
                self.n_sites()
            )));
        }
        Ok(self.cells.row(ell).iter().map(|e| e.left + e.right).sum())
    }
}

fn check_column(n_sites: usize, n: usize) -> Result<()> {
    if n == 0 || n > n_sites {
        return Err(Error::SiteOutOfRange { index: n, n_sites });
    }
    Ok(())
}

fn is_interior(c: LatticeCoord, n_sites: usize) -> bool {
    c.j_left() > 1 && c.j_right() < n_sites
}

/// Horizontal currents evaluated directly from triangle currents, as the
/// outgoing currents of the segments centred at `n` minus those centred at
/// `n ± 1/2`. Differencing telescopes along each column; the telescoped
/// ranges of the left and right components differ by one cell at the edge
/// of the interior, which is kept explicit here so that the result equals
/// [`CurrentLattice::horizontal`] for any state.
pub fn horizontal_from_triangles(tri: &Triangular<TriangleCurrent>, n: usize) -> Result<(f64, f64)> {
    let big_n = tri.n_sites();
    check_column(big_n, n)?;
    let mut plus = 0.0;
    let mut minus = 0.0;
    for (c, t) in tri.iter() {
        if !is_interior(c, big_n) {
            continue;
        }
        let (jl, jr) = (c.j_left(), c.j_right());
        let keep = |flag: bool, v: f64| if flag { v } else { 0.0 };
        if c.ell % 2 == 0 && c.n2 == 2 * n {
            plus += t.right + keep(jr + 1 < big_n, t.left);
            minus += t.left + keep(jl > 2, t.right);
        } else if c.ell % 2 == 1 && c.n2 == 2 * n + 1 {
            plus -= t.left + keep(jl > 2, t.right);
        } else if c.ell % 2 == 1 && c.n2 + 1 == 2 * n {
            minus -= t.right + keep(jr + 1 < big_n, t.left);
        }
    }
    Ok((plus, minus))
}

/// Particle current on the bond `j -> j + 1` (1-based),
/// `i (J C_{j,j+1} - (J C_{j,j+1})^*)`.
pub fn particle_current(model: &OpenChain, c: &CorrelationMatrix, j: usize) -> Result<f64> {
    let n = model.n_sites();
    if j == 0 || j >= n {
        return Err(Error::SiteOutOfRange { index: j, n_sites: n });
    }
    let hop = model.hamiltonian()[(j - 1, j)];
    Ok(-2.0 * (hop * c.matrix()[(j - 1, j)]).im)
}

/// Particle current from site `j` (1-based) into the reservoirs,
/// `gamma_j C_jj - Gamma_j (1 - C_jj)`.
pub fn particle_current_env(model: &OpenChain, c: &CorrelationMatrix, j: usize) -> Result<f64> {
    let n = model.n_sites();
    if j == 0 || j > n {
        return Err(Error::SiteOutOfRange { index: j, n_sites: n });
    }
    let res = model.reservoirs();
    let occ = c.occupation(j);
    Ok(res.remove_at(j) * occ - res.inject_at(j) * (1.0 - occ))
}

/// Residuals of the bottom-layer identities linking single-site information
/// currents to particle currents at site `site`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BottomLayerResidual {
    pub site: usize,
    pub left: f64,
    pub right: f64,
    pub env: f64,
}

/// Checks `I_R(0, n) = I_{n->n+1} log2(n_n / (1 - n_n))` and its left and
/// environment analogues on every site.
pub fn bottom_layer_relation_check(
    model: &OpenChain,
    c: &CorrelationMatrix,
) -> Result<Vec<BottomLayerResidual>> {
    let n = model.n_sites();
    (1..=n)
        .map(|j| {
            let t = triangle_currents(model, c, j, j)?;
            let occ = c.occupation(j).clamp(LOG_ODDS_CLIP, 1.0 - LOG_ODDS_CLIP);
            let lam = (occ / (1.0 - occ)).log2();
            let to_right = if j < n { particle_current(model, c, j)? } else { 0.0 };
            let from_left = if j > 1 { particle_current(model, c, j - 1)? } else { 0.0 };
            let to_env = particle_current_env(model, c, j)?;
            Ok(BottomLayerResidual {
                site: j,
                left: t.left + from_left * lam,
                right: t.right - to_right * lam,
                env: t.env - to_env * lam,
            })
        })
        .collect()
}

/// Local-balance residuals of `c` with `di/dt` taken from a central finite
/// difference over one RK4 step of `±dt`. The residual shrinks as `dt^2`.
pub fn site_balance_residual(
    model: &OpenChain,
    c: &CorrelationMatrix,
    dt: f64,
) -> Result<Triangular<f64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Validation(format!("time step must be positive, got {dt}")));
    }
    let forward = lattice::build_info_lattice(&model.step(c, dt)?)?;
    let backward = lattice::build_info_lattice(&model.step(c, -dt)?)?;
    let di_dt = Triangular::from_fn(model.n_sites(), |cell| {
        (forward.local.get(cell).unwrap() - backward.local.get(cell).unwrap()) / (2.0 * dt)
    });
    Ok(current_lattice(model, c)?.balance_residual(&di_dt))
}

/// Asymmetry at which the last site of an `n_sites` chain with large-bias
/// reservoirs reaches half filling, located by bisection on
/// `delta in [0, 1)` to within `tol`. Returns `None` if the last site stays
/// below half filling on the whole interval.
pub fn half_filling_threshold(
    n_sites: usize,
    g: f64,
    hopping: f64,
    tol: f64,
) -> Result<Option<f64>> {
    use crate::chain::{ChainSpec, ReservoirSpec};
    if !(g > 0.0 && hopping > 0.0) {
        return Err(Error::Domain(format!(
            "g and J must be positive, got ({g}, {hopping})"
        )));
    }
    let chain = ChainSpec::uniform(n_sites, hopping, 0.0)?;
    let last = |delta: f64| -> Result<f64> {
        let model =
            OpenChain::from_chain(&chain, ReservoirSpec::large_bias(n_sites, g, delta)?)?;
        Ok(model.solve_ness()?.occupation(n_sites) - 0.5)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0 - 1e-9);
    if last(lo)? >= 0.0 {
        return Ok(Some(0.0));
    }
    if last(hi)? < 0.0 {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if last(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

pub use crate::exact_n3::shielding_threshold;

/// Effective currents of many states at once.
pub fn current_lattices(model: &OpenChain, states: &[CorrelationMatrix]) -> Result<Vec<CurrentLattice>> {
    states.par_iter().map(|c| current_lattice(model, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainSpec, ReservoirSpec};
    use crate::exact_n3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, delta: f64) -> OpenChain {
        let chain = ChainSpec::uniform(n, 1.0, 0.0).unwrap();
        OpenChain::from_chain(&chain, ReservoirSpec::large_bias(n, 1.0, delta).unwrap()).unwrap()
    }

    #[test]
    fn f_matrices_reproduce_drift_blocks() {
        let m = model(6, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = CorrelationMatrix::random(6, 0.0, 1.0, &mut rng);
        let drift = m.drift(&c).unwrap();
        let i = Complex64::new(0.0, 1.0);
        for (jl, jr) in [(1, 6), (1, 1), (2, 4), (6, 6), (3, 6)] {
            let f = f_matrices(&m, &c, jl, jr).unwrap();
            let h_a = m.hamiltonian().view((jl - 1, jl - 1), (jr - jl + 1, jr - jl + 1)).transpose();
            let c_a = c.segment(jl, jr);
            let rhs = (&h_a * &c_a - &c_a * &h_a) * i + (&f.left + &f.right) * i + &f.env;
            let block = drift.view((jl - 1, jl - 1), (jr - jl + 1, jr - jl + 1));
            assert!((rhs - block).norm() < 1e-12);
            if jl == 1 {
                assert_eq!(f.left.norm(), 0.0);
            }
            if jr == 6 {
                assert_eq!(f.right.norm(), 0.0);
            }
        }
        assert!(f_matrices(&m, &c, 0, 2).is_err());
        assert!(f_matrices(&m, &c, 3, 7).is_err());
    }

    #[test]
    fn decoupled_segment_has_no_boundary_generators() {
        let chain = ChainSpec::uniform(5, 1.0, 0.0)
            .unwrap()
            .with_bond_defect(1, 0.0)
            .unwrap()
            .with_bond_defect(3, 0.0)
            .unwrap();
        let m = OpenChain::from_chain(&chain, ReservoirSpec::large_bias(5, 1.0, 0.0).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = CorrelationMatrix::random(5, 0.0, 1.0, &mut rng);
        let f = f_matrices(&m, &c, 2, 3).unwrap();
        assert_eq!(f.left.norm(), 0.0);
        assert_eq!(f.right.norm(), 0.0);
    }

    #[test]
    fn half_filled_site_carries_no_information_current() {
        let m = model(3, 0.0);
        let c = m.solve_ness().unwrap();
        let t = triangle_currents(&m, &c, 2, 2).unwrap();
        assert!(t.left.abs() < 1e-13 && t.right.abs() < 1e-13 && t.env.abs() < 1e-13);
    }

    #[test]
    fn two_site_right_current() {
        let m = model(2, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let c = CorrelationMatrix::random(2, 0.1, 0.9, &mut rng);
        let t = triangle_currents(&m, &c, 1, 1).unwrap();
        let c12 = c.get(1, 2);
        let c11 = c.occupation(1);
        let expected = (Complex64::new(0.0, -1.0) * (c12.conj() - c12)).re * (c11 / (1.0 - c11)).log2();
        assert!((t.right - expected).abs() < 1e-12);
    }

    #[test]
    fn closed_chain_full_segment_is_silent() {
        let chain = ChainSpec::uniform(4, 1.0, 0.2).unwrap();
        let m = OpenChain::from_chain(&chain, ReservoirSpec::closed(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = CorrelationMatrix::random(4, 0.05, 0.95, &mut rng);
        let t = triangle_currents(&m, &c, 1, 4).unwrap();
        assert_eq!((t.left, t.right, t.env), (0.0, 0.0, 0.0));
    }

    #[test]
    fn bottom_layer_equals_triangle_currents() {
        let m = model(5, 0.4);
        let c = m.solve_ness().unwrap();
        let tri = all_triangle_currents(&m, &c).unwrap();
        let lat = effective_currents(&tri);
        for (cell, e) in lat.cells.iter().filter(|(c, _)| c.ell == 0) {
            let t = tri.get(cell).unwrap();
            assert_eq!((e.left, e.right, e.env), (t.left, t.right, t.env));
        }
        let zero = effective_currents(&Triangular::from_fn(4, |_| TriangleCurrent::default()));
        assert!(zero.cells.values().iter().all(|e| *e == EffectiveCurrent::default()));
    }

    #[test]
    fn ness_balances_on_every_cell() {
        let m = model(6, 0.5);
        let c = m.solve_ness().unwrap();
        let lat = current_lattice(&m, &c).unwrap();
        assert!(lat.stationary_residual().values().iter().all(|r| r.abs() < 1e-8));
    }

    #[test]
    fn particle_current_of_three_site_oracle() {
        let m = model(3, 0.0);
        let c = exact_n3::ness_large_bias(1.0, 1.0, 0.0, 0.0).unwrap();
        for j in 1..3 {
            assert!((particle_current(&m, &c, j).unwrap() - 0.4).abs() < 1e-14);
        }
        assert!((particle_current_env(&m, &c, 1).unwrap() + 0.4).abs() < 1e-14);
        assert!((particle_current_env(&m, &c, 3).unwrap() - 0.4).abs() < 1e-14);
        assert!(particle_current(&m, &c, 3).is_err());
        assert!(particle_current_env(&m, &c, 4).is_err());
        let real = CorrelationMatrix::new(c.matrix().map(|z| Complex64::new(z.re, 0.0))).unwrap();
        assert_eq!(particle_current(&m, &real, 1).unwrap(), 0.0);
    }

    #[test]
    fn bottom_layer_relations_hold() {
        let m = model(5, 0.6);
        let c = m.solve_ness().unwrap();
        for r in bottom_layer_relation_check(&m, &c).unwrap() {
            assert!(r.left.abs() < 1e-10 && r.right.abs() < 1e-10 && r.env.abs() < 1e-10);
        }
    }

    #[test]
    fn horizontal_forms_agree() {
        let m = model(7, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let c = CorrelationMatrix::random(7, 0.02, 0.98, &mut rng);
        let tri = all_triangle_currents(&m, &c).unwrap();
        let lat = effective_currents(&tri);
        for n in 1..=7 {
            let (a, b) = lat.horizontal(n).unwrap();
            let (x, y) = horizontal_from_triangles(&tri, n).unwrap();
            assert!((a - x).abs() < 1e-10 && (b - y).abs() < 1e-10, "n={n}");
        }
        assert!(lat.horizontal(0).is_err());
        assert!(lat.vertical(7).is_err());
    }

    #[test]
    fn clipped_logarithm_is_flagged() {
        let m = model(3, 0.0);
        let t = triangle_currents(&m, &CorrelationMatrix::empty(3), 1, 1).unwrap();
        assert!(t.clipped);
        assert!(t.require_unclipped().is_err());
    }

    #[test]
    fn threshold_by_bisection_matches_formula_for_three_sites() {
        let d = half_filling_threshold(3, 1.0, 1.0, 1e-8).unwrap().unwrap();
        assert!((d - shielding_threshold(1.0, 1.0).unwrap()).abs() < 1e-6);
    }
}
