//! Lindblad dynamics of the correlation matrix and its steady state.
//!
//! For jump operators `sqrt(Gamma_j) c_j^†` and `sqrt(gamma_j) c_j` the
//! correlation matrix obeys the closed linear equation
//!
//! ```text
//! dC/dt = i [H^T, C] + Gamma - {Gamma + gamma, C} / 2
//! ```
//!
//! whose fixed point is the non-equilibrium steady state (NESS).

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::chain::{ChainSpec, ReservoirSpec};
use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::spectral::{self, SPECTRUM_TOLERANCE};
use crate::CMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest NESS residual `|dC/dt|`, relative to the largest rate or hopping,
/// accepted before the solve is declared singular.
const NESS_RESIDUAL_TOLERANCE: f64 = 1e-8;

/// Relative relaxation rate below which an unphysical NESS is attributed to
/// ill-conditioning rather than to a bug.
const ILL_CONDITIONED_RATE: f64 = 1e-12;

/// A chain Hamiltonian together with its reservoir couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenChain {
    hamiltonian: CMatrix,
    reservoirs: ReservoirSpec,
    /// `Gamma_j + gamma_j`, cached for the anticommutator.
    damping: Vec<f64>,
}

/// Snapshots returned by [`OpenChain::evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub times: Vec<f64>,
    pub states: Vec<CorrelationMatrix>,
}

impl OpenChain {
    /// Couples an arbitrary Hermitian single-particle Hamiltonian to the
    /// reservoirs.
    pub fn new(hamiltonian: CMatrix, reservoirs: ReservoirSpec) -> Result<Self> {
        let n = hamiltonian.nrows();
        if hamiltonian.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: hamiltonian.ncols(),
            });
        }
        if reservoirs.n_sites() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: reservoirs.n_sites(),
            });
        }
        let residual = spectral::hermiticity_residual(&hamiltonian);
        if residual > 1e-12 {
            return Err(Error::Validation(format!(
                "Hamiltonian is not Hermitian (residual {residual:.3e})"
            )));
        }
        let damping = reservoirs
            .inject()
            .iter()
            .zip(reservoirs.remove())
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            hamiltonian,
            reservoirs,
            damping,
        })
    }

    pub fn from_chain(chain: &ChainSpec, reservoirs: ReservoirSpec) -> Result<Self> {
        Self::new(chain.hamiltonian(), reservoirs)
    }

    pub fn n_sites(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn reservoirs(&self) -> &ReservoirSpec {
        &self.reservoirs
    }

    /// Largest single-particle energy scale: hopping, onsite energy or rate.
    pub fn energy_scale(&self) -> f64 {
        let h = self.hamiltonian.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        h.max(self.reservoirs.max_rate())
    }

    /// Default RK4 step `0.05 / max(|H_ij|, rates)`.
    pub fn default_dt(&self) -> f64 {
        let s = self.energy_scale();
        if s > 0.0 {
            0.05 / s
        } else {
            0.05
        }
    }

    fn check_size(&self, c: &CorrelationMatrix) -> Result<()> {
        if c.n_sites() != self.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites(),
                found: c.n_sites(),
            });
        }
        Ok(())
    }

    /// `dC/dt` at `C`.
    pub fn drift(&self, c: &CorrelationMatrix) -> Result<CMatrix> {
        self.check_size(c)?;
        Ok(self.drift_raw(c.matrix()))
    }

    pub(crate) fn drift_raw(&self, c: &CMatrix) -> CMatrix {
        let n = self.n_sites();
        // i [H^T, C]
        let ht = self.hamiltonian.transpose();
        let mut d = (&ht * c - c * &ht) * I;
        for i in 0..n {
            for j in 0..n {
                d[(i, j)] -= c[(i, j)] * (0.5 * (self.damping[i] + self.damping[j]));
            }
            d[(i, i)] += self.reservoirs.inject()[i];
        }
        d
    }

    fn rk4_step(&self, c: &CMatrix, dt: f64) -> CMatrix {
        let h = Complex64::new(dt, 0.0);
        let half = Complex64::new(dt / 2.0, 0.0);
        let k1 = self.drift_raw(c);
        let k2 = self.drift_raw(&(c + &k1 * half));
        let k3 = self.drift_raw(&(c + &k2 * half));
        let k4 = self.drift_raw(&(c + &k3 * h));
        let sum = k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4;
        spectral::hermitian_part(&(c + sum * Complex64::new(dt / 6.0, 0.0)))
    }

    /// One RK4 step of length `dt`. Negative `dt` integrates backwards.
    pub fn step(&self, c: &CorrelationMatrix, dt: f64) -> Result<CorrelationMatrix> {
        self.check_size(c)?;
        Ok(CorrelationMatrix::from_hermitian_part(
            &self.rk4_step(c.matrix(), dt),
        ))
    }

    /// Integrates `n_steps` RK4 steps of length `dt` and hands every
    /// `sample_every`-th state (including the initial one) to `visit`
    /// together with its step index and time.
    ///
    /// The state is re-symmetrised after every step. Each visited snapshot is
    /// checked for physicality; a spectrum outside `[0, 1]` beyond roundoff
    /// aborts with the offending step.
    pub fn evolve_with<F>(
        &self,
        c0: &CorrelationMatrix,
        dt: f64,
        n_steps: usize,
        sample_every: usize,
        mut visit: F,
    ) -> Result<CorrelationMatrix>
    where
        F: FnMut(usize, f64, &CorrelationMatrix) -> Result<()>,
    {
        self.check_size(c0)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Validation(format!("time step must be positive, got {dt}")));
        }
        if sample_every == 0 {
            return Err(Error::Validation("sample_every must be at least 1".into()));
        }
        let mut c = c0.matrix().clone();
        for step in 0..=n_steps {
            if step > 0 {
                c = self.rk4_step(&c, dt);
            }
            if step % sample_every == 0 || step == n_steps {
                let snap = CorrelationMatrix::from_hermitian_part(&c);
                let report = snap.check_physicality();
                if !report.is_physical(SPECTRUM_TOLERANCE) {
                    return Err(report.into_error(Some(step)));
                }
                visit(step, step as f64 * dt, &snap)?;
            }
        }
        Ok(CorrelationMatrix::from_hermitian_part(&c))
    }

    /// Collects the snapshots of [`OpenChain::evolve_with`].
    pub fn evolve(
        &self,
        c0: &CorrelationMatrix,
        dt: f64,
        n_steps: usize,
        sample_every: usize,
    ) -> Result<Evolution> {
        let mut out = Evolution {
            times: Vec::new(),
            states: Vec::new(),
        };
        self.evolve_with(c0, dt, n_steps, sample_every, |_, t, c| {
            out.times.push(t);
            out.states.push(c.clone());
            Ok(())
        })?;
        Ok(out)
    }

    /// The NESS, from the Lyapunov equation `W C + C W^† + Gamma = 0` with
    /// `W = i H^T - (Gamma + gamma) / 2`, solved densely in vectorised form.
    ///
    /// Fails with [`Error::NonUniqueSteadyState`] when all rates vanish or the
    /// system is singular (for instance a site decoupled from every bath).
    pub fn solve_ness(&self) -> Result<CorrelationMatrix> {
        if self.reservoirs.is_closed() {
            return Err(Error::NonUniqueSteadyState);
        }
        let n = self.n_sites();
        let w = self.lyapunov_generator();
        let wc = w.map(|z| z.conj());
        let nn = n * n;
        let mut k = DMatrix::<Complex64>::zeros(nn, nn);
        // vec(W X) = (1 ⊗ W) vec(X), vec(X W^†) = (conj(W) ⊗ 1) vec(X)
        for col in 0..n {
            for i in 0..n {
                let row = vec_index(i, col, n);
                for ip in 0..n {
                    k[(row, vec_index(ip, col, n))] += w[(i, ip)];
                }
                for colp in 0..n {
                    k[(row, vec_index(i, colp, n))] += wc[(col, colp)];
                }
            }
        }
        let mut rhs = nalgebra::DVector::<Complex64>::zeros(nn);
        for j in 0..n {
            rhs[vec_index(j, j, n)] = Complex64::new(-self.reservoirs.inject()[j], 0.0);
        }
        let x = k.lu().solve(&rhs).ok_or(Error::NonUniqueSteadyState)?;
        let c = DMatrix::from_fn(n, n, |i, j| x[vec_index(i, j, n)]);
        if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonUniqueSteadyState);
        }
        let residual = self
            .drift_raw(&c)
            .iter()
            .fold(0.0_f64, |m, z| m.max(z.norm()));
        let scale = self.energy_scale().max(1.0);
        if residual > NESS_RESIDUAL_TOLERANCE * scale {
            return Err(Error::NonUniqueSteadyState);
        }
        let c = CorrelationMatrix::from_hermitian_part(&c);
        let report = c.check_physicality();
        if !report.is_physical(SPECTRUM_TOLERANCE) {
            let slowest_rate = self.slowest_relaxation_rate()?;
            if slowest_rate < ILL_CONDITIONED_RATE * self.energy_scale() {
                return Err(Error::IllConditioned { slowest_rate });
            }
            return Err(report.into_error(None));
        }
        Ok(c)
    }

    /// Smallest decay rate `-Re(w)` over the eigenvalues `w` of the
    /// single-particle generator. Modes that decay this slowly (for example
    /// states bound to a strong defect far from both reservoirs) fix the
    /// conditioning of the steady-state problem.
    pub fn slowest_relaxation_rate(&self) -> Result<f64> {
        let eig = self
            .lyapunov_generator()
            .schur()
            .eigenvalues()
            .ok_or_else(|| Error::Internal("Schur form did not converge".into()))?;
        Ok(eig.iter().map(|w| -w.re).fold(f64::INFINITY, f64::min))
    }

    /// `W = i H^T - (Gamma + gamma) / 2`.
    pub fn lyapunov_generator(&self) -> CMatrix {
        let mut w = self.hamiltonian.transpose() * I;
        for j in 0..self.n_sites() {
            w[(j, j)] -= Complex64::new(0.5 * self.damping[j], 0.0);
        }
        w
    }
}

/// Column-major position of `X_ij` in `vec(X)`.
const fn vec_index(i: usize, j: usize, n: usize) -> usize {
    i + j * n
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n3(delta: f64) -> OpenChain {
        let chain = ChainSpec::uniform(3, 1.0, 0.0).unwrap();
        OpenChain::from_chain(&chain, ReservoirSpec::large_bias(3, 1.0, delta).unwrap()).unwrap()
    }

    #[test]
    fn vec_index_is_column_major() {
        let m = DMatrix::from_fn(3, 3, |i, j| (10 * i + j) as f64);
        let flat: Vec<f64> = m.iter().copied().collect();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(flat[vec_index(i, j, 3)], m[(i, j)]);
            }
        }
    }

    #[test]
    fn ness_of_three_site_chain() {
        let c = n3(0.0).solve_ness().unwrap();
        let occ = c.occupations();
        assert!((occ[0] - 0.6).abs() < 1e-12);
        assert!((occ[1] - 0.5).abs() < 1e-12);
        assert!((occ[2] - 0.4).abs() < 1e-12);
        assert!((c.get(1, 2) - Complex64::new(0.0, -0.2)).norm() < 1e-12);
        assert!((c.get(2, 3) - Complex64::new(0.0, -0.2)).norm() < 1e-12);
        assert!(c.get(1, 3).norm() < 1e-12);
    }

    #[test]
    fn drift_vanishes_at_ness() {
        let m = n3(0.3);
        let c = m.solve_ness().unwrap();
        let d = m.drift(&c).unwrap();
        assert!(d.iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn closed_or_decoupled_systems_have_no_unique_ness() {
        let chain = ChainSpec::uniform(4, 1.0, 0.0).unwrap();
        let m = OpenChain::from_chain(&chain, ReservoirSpec::closed(4)).unwrap();
        assert_eq!(m.solve_ness(), Err(Error::NonUniqueSteadyState));

        let broken = chain.with_bond_defect(2, 0.0).unwrap();
        let res = ReservoirSpec::ends(4, (1.0, 0.0), (0.0, 0.0)).unwrap();
        let m = OpenChain::from_chain(&broken, res).unwrap();
        assert_eq!(m.solve_ness(), Err(Error::NonUniqueSteadyState));
    }

    #[test]
    fn strongly_bound_defect_state_is_ill_conditioned() {
        let chain = ChainSpec::uniform(21, 1.0, 0.0)
            .unwrap()
            .with_site_defect(11, 8.0)
            .unwrap();
        let m = OpenChain::from_chain(&chain, ReservoirSpec::large_bias(21, 1.0, 0.0).unwrap()).unwrap();
        assert!(m.slowest_relaxation_rate().unwrap() < 1e-15);
        assert!(matches!(m.solve_ness(), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn evolution_approaches_ness() {
        let m = n3(0.5);
        let ness = m.solve_ness().unwrap();
        let end = m
            .evolve_with(&CorrelationMatrix::empty(3), 0.05, 2000, 100, |_, _, _| Ok(()))
            .unwrap();
        assert!(end.max_abs_diff(&ness) < 1e-10);
    }

    #[test]
    fn evolve_reports_snapshots() {
        let m = n3(0.0);
        let ev = m.evolve(&CorrelationMatrix::empty(3), 0.1, 10, 4).unwrap();
        assert_eq!(ev.times.len(), 4);
        assert!((ev.times[3] - 1.0).abs() < 1e-12);
        assert!(m.evolve(&CorrelationMatrix::empty(3), 0.0, 10, 1).is_err());
        assert!(m.evolve(&CorrelationMatrix::empty(4), 0.1, 10, 1).is_err());
    }

    #[test]
    fn closed_evolution_preserves_spectrum() {
        let chain = ChainSpec::uniform(5, 1.0, 0.3).unwrap();
        let m = OpenChain::from_chain(&chain, ReservoirSpec::closed(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c0 = CorrelationMatrix::random(5, 0.0, 1.0, &mut rng);
        let c1 = m.evolve_with(&c0, 0.01, 500, 500, |_, _, _| Ok(())).unwrap();
        let e0 = spectral::hermitian_eigenvalues(c0.matrix());
        let e1 = spectral::hermitian_eigenvalues(c1.matrix());
        // RK4 is not exactly unitary; the spectrum drifts at order dt^6 per step.
        for (a, b) in e0.iter().zip(&e1) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!((c0.trace() - c1.trace()).abs() < 1e-12);
    }

    #[test]
    fn unphysical_step_is_reported() {
        let chain = ChainSpec::uniform(3, 1.0, 0.0).unwrap();
        let res = ReservoirSpec::large_bias(3, 1.0, 0.0).unwrap();
        let m = OpenChain::from_chain(&chain, res).unwrap();
        match m.evolve(&CorrelationMatrix::empty(3), 5.0, 10, 1) {
            Err(Error::Physicality { step: Some(s), .. }) => assert!(s >= 1),
            other => panic!("expected physicality failure, got {other:?}"),
        }
    }
}
