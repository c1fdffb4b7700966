//! Particle-number fluctuations and the noise lattice.
//!
//! For Gaussian states the von Neumann entropy of a segment is a series in
//! the cumulants of its particle number. Keeping only the second cumulant,
//! the variance, gives an approximate information lattice built from
//! quantities that are directly measurable:
//!
//! ```text
//! i_appr(ell, n) = delta_{ell,0} - (pi^2 / (3 ln 2)) kappa(ell, n)
//! ```
//!
//! where `kappa` is the second difference of segment variances. The
//! covariances entering the approximate currents follow from Wick's theorem;
//! see `docs/wick.md` for the contractions.

use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

use crate::correlation::CorrelationMatrix;
use crate::currents::{self, f_matrices, CurrentLattice, EffectiveCurrent};
use crate::dynamics::OpenChain;
use crate::error::{Error, Result};
use crate::lattice::{second_difference, Triangular};
use crate::spectral;
use crate::CMatrix;

/// `pi^2 / (3 ln 2)`, the second-cumulant coefficient in bits.
pub const KLICH_LEVITOV_PREFACTOR: f64 = PI * PI / (3.0 * LN_2);

/// `Var(N_A) = Tr(C_A - C_A^2)`.
pub fn subsystem_variance(c_a: &CMatrix) -> Result<f64> {
    let mut var = 0.0;
    for mu in spectral::hermitian_eigenvalues(c_a) {
        let mu = spectral::clip_occupation(mu)?;
        var += mu * (1.0 - mu);
    }
    Ok(var)
}

fn check_site(c: &CorrelationMatrix, j: usize) -> Result<()> {
    if j == 0 || j > c.n_sites() {
        return Err(Error::SiteOutOfRange {
            index: j,
            n_sites: c.n_sites(),
        });
    }
    Ok(())
}

/// `<c_p^† c_q n_b> - <c_p^† c_q><n_b> = C_pb (delta_qb - C_bq)` for 1-based
/// sites.
pub fn bilinear_number_covariance(c: &CorrelationMatrix, p: usize, q: usize, b: usize) -> Complex64 {
    let m = c.matrix();
    let delta = if q == b { 1.0 } else { 0.0 };
    m[(p - 1, b - 1)] * (Complex64::new(delta, 0.0) - m[(b - 1, q - 1)])
}

/// `Cov(n_i, n_j) = -|C_ij|^2` for distinct 1-based sites.
pub fn wick_covariance_nn(c: &CorrelationMatrix, i: usize, j: usize) -> Result<f64> {
    check_site(c, i)?;
    check_site(c, j)?;
    if i == j {
        return Err(Error::Validation(
            "covariance of a site with itself is its variance".into(),
        ));
    }
    Ok(-c.get(i, j).norm_sqr())
}

/// `Cov(I_{a->a+1}, n_b)` for the bond current operator
/// `i (J c_a^† c_{a+1} - J^* c_{a+1}^† c_a)`, 1-based sites.
pub fn current_number_covariance(
    model: &OpenChain,
    c: &CorrelationMatrix,
    a: usize,
    b: usize,
) -> Result<f64> {
    let n = model.n_sites();
    if a == 0 || a >= n {
        return Err(Error::SiteOutOfRange { index: a, n_sites: n });
    }
    check_site(c, b)?;
    let hop = model.hamiltonian()[(a - 1, a)];
    let i = Complex64::new(0.0, 1.0);
    let z = i
        * (hop * bilinear_number_covariance(c, a, a + 1, b)
            - hop.conj() * bilinear_number_covariance(c, a + 1, a, b));
    Ok(z.re)
}

/// Variances, their second differences and the approximate local
/// information on every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseLattice {
    pub variance: Triangular<f64>,
    pub kappa: Triangular<f64>,
    pub i_appr: Triangular<f64>,
}

pub fn noise_lattice(c: &CorrelationMatrix) -> Result<NoiseLattice> {
    let variance = Triangular::par_try_from_fn(c.n_sites(), |cell| {
        subsystem_variance(&c.segment(cell.j_left(), cell.j_right()))
    })?;
    let kappa = second_difference(&variance);
    let i_appr = Triangular::from_fn(c.n_sites(), |cell| {
        let bottom = if cell.ell == 0 { 1.0 } else { 0.0 };
        bottom - KLICH_LEVITOV_PREFACTOR * kappa.get(cell).unwrap()
    });
    Ok(NoiseLattice {
        variance,
        kappa,
        i_appr,
    })
}

/// Effective currents of the approximate information lattice. They satisfy
/// the same lattice continuity equation with `i_appr` in place of `i`.
///
/// Above the bottom layer the dissipative current is
/// `-2 k (Gamma + gamma)_{jL, jR} Cov(n_jL, n_jR)`: since
/// `kappa = 2 Cov(n_jL, n_jR)` decays at rate `(Gamma + gamma)_{jL, jR}`,
/// this is the prefactor that closes the continuity equation.
pub fn approx_currents(model: &OpenChain, c: &CorrelationMatrix) -> Result<CurrentLattice> {
    let n = model.n_sites();
    if c.n_sites() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c.n_sites(),
        });
    }
    let k = KLICH_LEVITOV_PREFACTOR;
    let res = model.reservoirs();
    let cells = Triangular::try_from_fn(n, |cell| {
        let (jl, jr) = (cell.j_left(), cell.j_right());
        if cell.ell == 0 {
            let w = k * (2.0 * c.occupation(jl) - 1.0);
            let right = if jl < n {
                currents::particle_current(model, c, jl)?
            } else {
                0.0
            };
            let left = if jl > 1 {
                currents::particle_current(model, c, jl - 1)?
            } else {
                0.0
            };
            Ok(EffectiveCurrent {
                left: -w * left,
                right: w * right,
                env: w * currents::particle_current_env(model, c, jl)?,
                clipped: false,
            })
        } else {
            let right = if jr < n {
                -2.0 * k * current_number_covariance(model, c, jr, jl)?
            } else {
                0.0
            };
            let left = if jl > 1 {
                2.0 * k * current_number_covariance(model, c, jl - 1, jr)?
            } else {
                0.0
            };
            let rates = res.inject_at(jl) + res.remove_at(jl) + res.inject_at(jr) + res.remove_at(jr);
            Ok(EffectiveCurrent {
                left,
                right,
                env: -2.0 * k * rates * wick_covariance_nn(c, jl, jr)?,
                clipped: false,
            })
        }
    })?;
    Ok(CurrentLattice { cells })
}

/// `dVar(N_A)/dt = Tr[(1 - 2 C_A)(i F_L + i F_R + F_E)]` for the segment
/// `j_left..=j_right`.
pub fn variance_rate(
    model: &OpenChain,
    c: &CorrelationMatrix,
    j_left: usize,
    j_right: usize,
) -> Result<f64> {
    let f = f_matrices(model, c, j_left, j_right)?;
    let i = Complex64::new(0.0, 1.0);
    let flow = (f.left + f.right) * i + f.env;
    let c_a = c.segment(j_left, j_right);
    let w = CMatrix::identity(c_a.nrows(), c_a.nrows()) - c_a * Complex64::new(2.0, 0.0);
    Ok(spectral::trace_of_product(&w, &flow).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainSpec, ReservoirSpec};
    use crate::exact_n3;
    use crate::lattice::LatticeCoord;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(n: usize, delta: f64) -> OpenChain {
        let chain = ChainSpec::uniform(n, 1.0, 0.0).unwrap();
        OpenChain::from_chain(&chain, ReservoirSpec::large_bias(n, 1.0, delta).unwrap()).unwrap()
    }

    #[test]
    fn variance_examples() {
        let half = CMatrix::from_element(1, 1, Complex64::new(0.5, 0.0));
        assert!((subsystem_variance(&half).unwrap() - 0.25).abs() < 1e-15);
        assert!(subsystem_variance(CorrelationMatrix::filled(3).matrix()).unwrap().abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = CorrelationMatrix::random_pure(5, 2, &mut rng);
        assert!(subsystem_variance(p.matrix()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn covariance_examples_on_three_site_oracle() {
        let c = exact_n3::ness_large_bias(1.0, 1.0, 0.0, 0.0).unwrap();
        assert!((wick_covariance_nn(&c, 1, 2).unwrap() + 0.04).abs() < 1e-14);
        assert!(wick_covariance_nn(&c, 1, 3).unwrap().abs() < 1e-14);
        assert!(wick_covariance_nn(&c, 2, 2).is_err());
        assert!(wick_covariance_nn(&c, 1, 4).is_err());
    }

    #[test]
    fn variance_breaks_additivity_by_covariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = CorrelationMatrix::random(5, 0.0, 1.0, &mut rng);
        let whole = subsystem_variance(&c.segment(1, 5)).unwrap();
        let mut parts: f64 = (1..=5).map(|j| {
            let o = c.occupation(j);
            o * (1.0 - o)
        }).sum();
        for i in 1..=5 {
            for j in i + 1..=5 {
                parts += 2.0 * wick_covariance_nn(&c, i, j).unwrap();
            }
        }
        assert!((whole - parts).abs() < 1e-12);
    }

    #[test]
    fn product_state_has_flat_noise_lattice() {
        let c = CorrelationMatrix::product(&[0.1, 0.7, 0.5, 0.9]).unwrap();
        let nl = noise_lattice(&c).unwrap();
        for (cell, &k) in nl.kappa.iter().filter(|(c, _)| c.ell > 0) {
            assert!(k.abs() < 1e-14, "{cell:?}");
            assert!(nl.i_appr.get(cell).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn kappa_above_bottom_is_twice_end_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let c = CorrelationMatrix::random(6, 0.0, 1.0, &mut rng);
        let nl = noise_lattice(&c).unwrap();
        for (cell, &k) in nl.kappa.iter().filter(|(c, _)| c.ell > 0) {
            let cov = wick_covariance_nn(&c, cell.j_left(), cell.j_right()).unwrap();
            assert!((k - 2.0 * cov).abs() < 1e-12);
        }
    }

    #[test]
    fn half_filled_bottom_currents_vanish() {
        let m = model(3, 0.0);
        let c = m.solve_ness().unwrap();
        let lat = approx_currents(&m, &c).unwrap();
        let mid = lat.get(LatticeCoord::from_segment(2, 2)).unwrap();
        assert!(mid.left.abs() < 1e-14 && mid.right.abs() < 1e-14 && mid.env == 0.0);
        let bulk = approx_currents(&model(6, 0.3), &model(6, 0.3).solve_ness().unwrap()).unwrap();
        assert_eq!(bulk.get(LatticeCoord::from_segment(2, 4)).unwrap().env, 0.0);
    }

    #[test]
    fn variance_rate_matches_finite_difference() {
        let m = model(5, 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = CorrelationMatrix::random(5, 0.05, 0.95, &mut rng);
        let ness = m.solve_ness().unwrap();
        for (jl, jr) in [(1, 1), (2, 4), (1, 5), (4, 5)] {
            let var = |s: &CorrelationMatrix| subsystem_variance(&s.segment(jl, jr)).unwrap();
            let mut errs = Vec::new();
            for dt in [1e-2, 5e-3] {
                let fd = (var(&m.step(&c, dt).unwrap()) - var(&m.step(&c, -dt).unwrap())) / (2.0 * dt);
                errs.push((fd - variance_rate(&m, &c, jl, jr).unwrap()).abs());
            }
            assert!(errs[0] < 1e-3 && errs[1] < errs[0] / 3.0 + 1e-12, "{errs:?}");
            assert!(variance_rate(&m, &ness, jl, jr).unwrap().abs() < 1e-10);
        }
        let single = OpenChain::new(CMatrix::zeros(1, 1), ReservoirSpec::closed(1)).unwrap();
        let c1 = CorrelationMatrix::product(&[0.3]).unwrap();
        assert_eq!(variance_rate(&single, &c1, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn approximate_lattice_obeys_its_continuity_equation() {
        let m = model(6, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let c = CorrelationMatrix::random(6, 0.05, 0.95, &mut rng);
        let dt = 1e-3;
        let forward = noise_lattice(&m.step(&c, dt).unwrap()).unwrap();
        let backward = noise_lattice(&m.step(&c, -dt).unwrap()).unwrap();
        let di = Triangular::from_fn(6, |cell| {
            (forward.i_appr.get(cell).unwrap() - backward.i_appr.get(cell).unwrap()) / (2.0 * dt)
        });
        let lat = approx_currents(&m, &c).unwrap();
        let residual = lat.balance_residual(&di);
        assert!(residual.values().iter().all(|r| r.abs() < 1e-5), "{residual:?}");
    }
}
