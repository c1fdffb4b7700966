//! Single-particle Hamiltonian and reservoir rates of the chain.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMatrix;

/// Nearest-neighbour tight-binding chain.
///
/// `hoppings[k]` couples sites `k+1` and `k+2` (1-based), `onsite[k]` is the
/// energy of site `k+1`. Site and bond defects are plain entries of these
/// vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    hoppings: Vec<f64>,
    onsite: Vec<f64>,
}

impl ChainSpec {
    pub fn new(hoppings: Vec<f64>, onsite: Vec<f64>) -> Result<Self> {
        let n = onsite.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "a chain needs at least 2 sites, got {n}"
            )));
        }
        if hoppings.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                found: hoppings.len(),
            });
        }
        if hoppings.iter().chain(onsite.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Validation("non-finite chain parameter".into()));
        }
        Ok(Self { hoppings, onsite })
    }

    /// Homogeneous chain with hopping `hopping` and onsite energy `onsite`.
    pub fn uniform(n_sites: usize, hopping: f64, onsite: f64) -> Result<Self> {
        Self::new(
            vec![hopping; n_sites.saturating_sub(1)],
            vec![onsite; n_sites],
        )
    }

    /// Replaces the onsite energy of site `site` (1-based).
    pub fn with_site_defect(mut self, site: usize, energy: f64) -> Result<Self> {
        let idx = self.site_index(site)?;
        self.onsite[idx] = energy;
        Ok(self)
    }

    /// Replaces the hopping on the bond `(site, site + 1)` (1-based).
    pub fn with_bond_defect(mut self, site: usize, hopping: f64) -> Result<Self> {
        if site == 0 || site >= self.n_sites() {
            return Err(Error::SiteOutOfRange {
                index: site,
                n_sites: self.n_sites(),
            });
        }
        self.hoppings[site - 1] = hopping;
        Ok(self)
    }

    pub fn n_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn hoppings(&self) -> &[f64] {
        &self.hoppings
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    /// Hopping `J_{j,j+1}` for 1-based `j`.
    pub fn hopping(&self, j: usize) -> f64 {
        self.hoppings[j - 1]
    }

    /// Largest absolute hopping, used to set default time steps.
    pub fn max_hopping(&self) -> f64 {
        self.hoppings.iter().fold(0.0_f64, |m, h| m.max(h.abs()))
    }

    fn site_index(&self, site: usize) -> Result<usize> {
        if site == 0 || site > self.n_sites() {
            Err(Error::SiteOutOfRange {
                index: site,
                n_sites: self.n_sites(),
            })
        } else {
            Ok(site - 1)
        }
    }

    /// Tridiagonal Hamiltonian matrix `H` with `H_jj = eps_j` and
    /// `H_{j,j+1} = H_{j+1,j} = J_{j,j+1}`.
    pub fn hamiltonian(&self) -> CMatrix {
        let n = self.n_sites();
        let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for (j, &e) in self.onsite.iter().enumerate() {
            h[(j, j)] = Complex64::new(e, 0.0);
        }
        for (j, &t) in self.hoppings.iter().enumerate() {
            h[(j, j + 1)] = Complex64::new(t, 0.0);
            h[(j + 1, j)] = Complex64::new(t, 0.0);
        }
        h
    }
}

/// Diagonal injection (`Gamma_j`) and removal (`gamma_j`) rates.
///
/// Only onsite jump operators `sqrt(Gamma_j) c_j^†` and `sqrt(gamma_j) c_j`
/// are represented. Multi-site linear jump operators would replace the two
/// vectors by full real rate matrices; every consumer goes through
/// [`ReservoirSpec::inject_matrix`] and [`ReservoirSpec::remove_matrix`], which
/// is where that generalisation would plug in.
#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirSpec {
    inject: Vec<f64>,
    remove: Vec<f64>,
}

/// Parameters of a metallic lead in the wide-band limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermiLead {
    /// Hybridisation `g = 2 pi |tau|^2 nu`.
    pub coupling: f64,
    pub chemical_potential: f64,
    pub temperature: f64,
}

fn fermi(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

impl ReservoirSpec {
    pub fn new(inject: Vec<f64>, remove: Vec<f64>) -> Result<Self> {
        if inject.len() != remove.len() {
            return Err(Error::DimensionMismatch {
                expected: inject.len(),
                found: remove.len(),
            });
        }
        if let Some(r) = inject
            .iter()
            .chain(remove.iter())
            .find(|r| !(r.is_finite() && **r >= 0.0))
        {
            return Err(Error::Domain(format!("rate {r} is not a finite nonnegative number")));
        }
        Ok(Self { inject, remove })
    }

    /// No coupling to any reservoir.
    pub fn closed(n_sites: usize) -> Self {
        Self {
            inject: vec![0.0; n_sites],
            remove: vec![0.0; n_sites],
        }
    }

    /// Reservoirs at both ends, given as `(Gamma_1, gamma_1, Gamma_N, gamma_N)`.
    pub fn ends(n_sites: usize, left: (f64, f64), right: (f64, f64)) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::Validation("end reservoirs need at least 2 sites".into()));
        }
        let mut inject = vec![0.0; n_sites];
        let mut remove = vec![0.0; n_sites];
        inject[0] = left.0;
        remove[0] = left.1;
        inject[n_sites - 1] = right.0;
        remove[n_sites - 1] = right.1;
        Self::new(inject, remove)
    }

    /// Large-bias rates: `Gamma_1 = g(1+delta)`, `gamma_N = g(1-delta)`.
    pub fn large_bias(n_sites: usize, g: f64, delta: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::Domain(format!("coupling g = {g} must be positive")));
        }
        if !(delta.abs() < 1.0) {
            return Err(Error::Domain(format!(
                "particle-hole asymmetry |delta| = {} must be below 1",
                delta.abs()
            )));
        }
        Self::ends(n_sites, (g * (1.0 + delta), 0.0), (0.0, g * (1.0 - delta)))
    }

    /// Linear-response rates with drive amplitude `phi`.
    pub fn linear_response(n_sites: usize, g: f64, delta: f64, phi: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(Error::Domain(format!("coupling g = {g} must be positive")));
        }
        let h = 0.5 * g;
        let left = (h * (1.0 + delta + phi), h * (1.0 - delta - phi));
        let right = (h * (1.0 + delta - phi), h * (1.0 - delta + phi));
        for r in [left.0, left.1, right.0, right.1] {
            if r < 0.0 {
                return Err(Error::Domain(format!(
                    "delta = {delta}, phi = {phi} give a negative rate {r}"
                )));
            }
        }
        Self::ends(n_sites, left, right)
    }

    /// Rates from Fermi factors of two leads evaluated at the end-site
    /// energies `eps_first` and `eps_last`.
    pub fn from_fermi(
        n_sites: usize,
        left: FermiLead,
        right: FermiLead,
        eps_first: f64,
        eps_last: f64,
    ) -> Result<Self> {
        for lead in [left, right] {
            if !(lead.temperature > 0.0) {
                return Err(Error::Domain(format!(
                    "lead temperature {} must be positive",
                    lead.temperature
                )));
            }
            if !(lead.coupling >= 0.0) {
                return Err(Error::Domain(format!(
                    "lead coupling {} must be nonnegative",
                    lead.coupling
                )));
            }
        }
        let bias = left.chemical_potential - right.chemical_potential;
        let mean = 0.5 * (left.chemical_potential + right.chemical_potential);
        let f_left = fermi((eps_first - mean - 0.5 * bias) / left.temperature);
        let f_right = fermi((eps_last - mean + 0.5 * bias) / right.temperature);
        Self::ends(
            n_sites,
            (left.coupling * f_left, left.coupling * (1.0 - f_left)),
            (right.coupling * f_right, right.coupling * (1.0 - f_right)),
        )
    }

    pub fn n_sites(&self) -> usize {
        self.inject.len()
    }

    pub fn inject(&self) -> &[f64] {
        &self.inject
    }

    pub fn remove(&self) -> &[f64] {
        &self.remove
    }

    /// `Gamma_j` for 1-based `j`.
    pub fn inject_at(&self, j: usize) -> f64 {
        self.inject[j - 1]
    }

    /// `gamma_j` for 1-based `j`.
    pub fn remove_at(&self, j: usize) -> f64 {
        self.remove[j - 1]
    }

    pub fn max_rate(&self) -> f64 {
        self.inject
            .iter()
            .chain(self.remove.iter())
            .fold(0.0_f64, |m, r| m.max(*r))
    }

    pub fn is_closed(&self) -> bool {
        self.max_rate() == 0.0
    }

    pub fn inject_matrix(&self) -> CMatrix {
        diag(&self.inject)
    }

    pub fn remove_matrix(&self) -> CMatrix {
        diag(&self.remove)
    }
}

fn diag(v: &[f64]) -> CMatrix {
    let n = v.len();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(v[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(m: &CMatrix) -> DMatrix<f64> {
        m.map(|z| z.re)
    }

    #[test]
    fn hamiltonian_three_sites() {
        let eps2 = 0.7;
        let chain = ChainSpec::uniform(3, 1.0, 0.0)
            .unwrap()
            .with_site_defect(2, eps2)
            .unwrap();
        let h = chain.hamiltonian();
        let expected =
            DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 1.0, eps2, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(re(&h), expected);
        assert!(h.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn decoupled_sites_give_zero_matrix() {
        let h = ChainSpec::uniform(2, 0.0, 0.0).unwrap().hamiltonian();
        assert!(h.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn bond_defect_and_exact_hermiticity() {
        let chain = ChainSpec::new(vec![1.0, 0.5, 1.0], vec![0.0; 4]).unwrap();
        let h = chain.hamiltonian();
        assert_eq!(h[(0, 1)].re, 1.0);
        assert_eq!(h[(1, 2)].re, 0.5);
        assert_eq!(h[(2, 3)].re, 1.0);
        assert_eq!(h, h.adjoint());
        let bond = ChainSpec::uniform(4, 1.0, 0.0)
            .unwrap()
            .with_bond_defect(2, 0.5)
            .unwrap();
        assert_eq!(bond, chain);
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(vec![], vec![0.0]).is_err());
        assert!(matches!(
            ChainSpec::new(vec![1.0], vec![0.0, 0.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ChainSpec::uniform(3, 1.0, 0.0).unwrap().with_site_defect(4, 1.0).is_err());
    }

    #[test]
    fn large_bias_rates() {
        let r = ReservoirSpec::large_bias(5, 1.0, 0.0).unwrap();
        assert_eq!(r.inject(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.remove(), &[0.0, 0.0, 0.0, 0.0, 1.0]);
        let r = ReservoirSpec::large_bias(7, 1.0, 0.75).unwrap();
        assert_eq!(r.inject_at(1), 1.75);
        assert_eq!(r.remove_at(7), 0.25);
        let r = ReservoirSpec::large_bias(3, 2.0, -0.5).unwrap();
        assert_eq!(r.inject_at(1), 1.0);
        assert_eq!(r.remove_at(3), 3.0);
        assert!(matches!(
            ReservoirSpec::large_bias(3, 1.0, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(ReservoirSpec::large_bias(3, 0.0, 0.0).is_err());
    }

    #[test]
    fn linear_response_rates() {
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        let r = ReservoirSpec::linear_response(21, 1.0, 0.0, 0.1).unwrap();
        assert!(close(r.inject_at(1), 0.55));
        assert!(close(r.remove_at(1), 0.45));
        assert!(close(r.inject_at(21), 0.45));
        assert!(close(r.remove_at(21), 0.55));
        let r = ReservoirSpec::linear_response(4, 1.0, 0.0, 0.0).unwrap();
        for v in [r.inject_at(1), r.remove_at(1), r.inject_at(4), r.remove_at(4)] {
            assert_eq!(v, 0.5);
        }
        assert_eq!(r.inject()[0], r.inject()[3]);
        assert_eq!(r.remove()[0], r.remove()[3]);
        let r = ReservoirSpec::linear_response(4, 1.0, 0.2, 0.1).unwrap();
        assert!(close(r.inject_at(1), 0.65));
        assert!(close(r.remove_at(1), 0.35));
        assert!(close(r.inject_at(4), 0.55));
        assert!(close(r.remove_at(4), 0.45));
        assert!(ReservoirSpec::linear_response(4, 1.0, 0.8, 0.3).is_err());
    }

    #[test]
    fn fermi_rates_limits() {
        let lead = |mu: f64, t: f64| FermiLead {
            coupling: 1.0,
            chemical_potential: mu,
            temperature: t,
        };
        // infinite bias reproduces the large-bias rates
        let r = ReservoirSpec::from_fermi(5, lead(1e6, 1.0), lead(-1e6, 1.0), 0.0, 0.0).unwrap();
        let lb = ReservoirSpec::large_bias(5, 1.0, 0.0).unwrap();
        for (a, b) in r.inject().iter().zip(lb.inject()) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in r.remove().iter().zip(lb.remove()) {
            assert!((a - b).abs() < 1e-12);
        }
        // symmetric point
        let r = ReservoirSpec::from_fermi(3, lead(0.3, 0.5), lead(0.3, 0.5), 0.3, 0.3).unwrap();
        for v in [r.inject_at(1), r.remove_at(1), r.inject_at(3), r.remove_at(3)] {
            assert_eq!(v, 0.5);
        }
        // infinite temperature
        let r = ReservoirSpec::from_fermi(3, lead(2.0, 1e12), lead(-2.0, 1e12), 0.0, 0.0).unwrap();
        assert!((r.inject_at(1) - 0.5).abs() < 1e-10);
        assert!((r.inject_at(3) - 0.5).abs() < 1e-10);
        assert!(ReservoirSpec::from_fermi(3, lead(0.0, 0.0), lead(0.0, 1.0), 0.0, 0.0).is_err());
    }

    #[test]
    fn negative_rates_rejected() {
        assert!(ReservoirSpec::new(vec![0.0, -1.0], vec![0.0, 0.0]).is_err());
        assert!(ReservoirSpec::new(vec![0.0], vec![0.0, 0.0]).is_err());
    }
}
