//! Closed-form steady state of the three-site chain.
//!
//! Setup: uniform hopping `J`, onsite energies `(0, eps2, 0)`, injection
//! `Gamma1` on site 1 and removal `gamma3` on site 3 (large bias), or the
//! four-rate linear-response coupling. These expressions are independent of
//! the Lyapunov solver and serve as its oracle.

use num_complex::Complex64;

use crate::correlation::CorrelationMatrix;
use crate::error::{Error, Result};
use crate::CMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn check_domain(g: f64, hopping: f64, eps2: f64) -> Result<()> {
    if !(g.is_finite() && g > 0.0) {
        return Err(Error::Domain(format!("coupling g must be positive, got {g}")));
    }
    if !(hopping.is_finite() && hopping != 0.0) {
        return Err(Error::Domain(format!("hopping J must be nonzero, got {hopping}")));
    }
    if !eps2.is_finite() {
        return Err(Error::Domain("defect energy must be finite".into()));
    }
    Ok(())
}

/// NESS for injection `gamma_in` on site 1 and removal `gamma_out` on site 3.
pub fn ness_two_rate(gamma_in: f64, gamma_out: f64, hopping: f64, eps2: f64) -> Result<CorrelationMatrix> {
    if !(gamma_in > 0.0 && gamma_out > 0.0) {
        return Err(Error::Domain(format!(
            "both rates must be positive, got ({gamma_in}, {gamma_out})"
        )));
    }
    check_domain(1.0, hopping, eps2)?;
    let (g1, g3, j) = (gamma_in, gamma_out, hopping);
    let j2 = j * j;
    let a = 4.0 * j2 + g1 * g3;
    let d = (g1 + g3) * (a * a + 4.0 * g1 * g3 * eps2 * eps2);
    let c11 = 1.0 - 4.0 * j2 * g3 * a / d;
    let c22 = g1 * (a * (4.0 * j2 + g3 * g3) + 4.0 * g1 * g3 * eps2 * eps2) / d;
    let c33 = g1 / g3 * (1.0 - c11);
    let c12 = -2.0 * I * j * g1 * g3 * (c(4.0 * j2) + g3 * (c(g1) - 2.0 * I * eps2)) / d;
    let c13 = 8.0 * I * j2 * g1 * g3 * eps2 / d;
    let c23 = -2.0 * I * j * g1 * g3 * (c(4.0 * j2) + g1 * (c(g3) + 2.0 * I * eps2)) / d;
    Ok(assemble([c11, c22, c33], c12, c13, c23))
}

fn assemble(diag: [f64; 3], c12: Complex64, c13: Complex64, c23: Complex64) -> CorrelationMatrix {
    let mut m = CMatrix::zeros(3, 3);
    for k in 0..3 {
        m[(k, k)] = c(diag[k]);
    }
    m[(0, 1)] = c12;
    m[(1, 0)] = c12.conj();
    m[(0, 2)] = c13;
    m[(2, 0)] = c13.conj();
    m[(1, 2)] = c23;
    m[(2, 1)] = c23.conj();
    CorrelationMatrix::new(m).expect("assembled matrix is Hermitian")
}

/// Large-bias NESS with `Gamma1 = g (1 + delta)` and `gamma3 = g (1 - delta)`.
pub fn ness_large_bias(g: f64, hopping: f64, eps2: f64, delta: f64) -> Result<CorrelationMatrix> {
    check_domain(g, hopping, eps2)?;
    if !(delta > -1.0 && delta < 1.0) {
        return Err(Error::Domain(format!(
            "asymmetry must lie in (-1, 1) for a unique steady state, got {delta}"
        )));
    }
    ness_two_rate(g * (1.0 + delta), g * (1.0 - delta), hopping, eps2)
}

/// Particle current through the chain, evaluated both as the depletion
/// `Gamma1 (1 - C11)` of the injected site and as the bond current
/// `-2 J Im C12`. The two must agree; a mismatch is an internal error.
pub fn particle_current(g: f64, hopping: f64, eps2: f64, delta: f64) -> Result<f64> {
    let cm = ness_large_bias(g, hopping, eps2, delta)?;
    let injected = g * (1.0 + delta) * (1.0 - cm.occupation(1));
    let bond = -2.0 * hopping * cm.get(1, 2).im;
    if (injected - bond).abs() > 1e-12 * injected.abs().max(1.0) {
        return Err(Error::Internal(format!(
            "current forms disagree: {injected} vs {bond}"
        )));
    }
    Ok(injected)
}

/// Zeroth-order NESS plus the derivative with respect to `delta` at
/// `delta = 0`, so that `C(delta) = c0 + delta * c1 + O(delta^2)`.
pub fn first_order_in_delta(g: f64, hopping: f64, eps2: f64) -> Result<(CorrelationMatrix, CMatrix)> {
    check_domain(g, hopping, eps2)?;
    let c0 = ness_large_bias(g, hopping, eps2, 0.0)?;
    let j = hopping;
    let d = Complex64::new(g * g + 4.0 * j * j, 2.0 * g * eps2);
    let d2 = d.norm_sqr();
    let c33_0 = c0.occupation(3);
    let off = 2.0 * j * g * g * eps2 / d2;
    let mut c1 = CMatrix::zeros(3, 3);
    c1[(0, 0)] = c(c33_0);
    c1[(2, 2)] = c(c33_0);
    c1[(1, 1)] = c((16.0 * j.powi(4) - g.powi(4) + 4.0 * g * g * eps2 * eps2) / (2.0 * d2));
    c1[(0, 1)] = c(off);
    c1[(1, 0)] = c(off);
    c1[(1, 2)] = c(off);
    c1[(2, 1)] = c(off);
    Ok((c0, c1))
}

/// NESS at `delta = 0` to first order in the linear-response bias `phi`,
/// with rates `Gamma1 = (g/2)(1 + phi)`, `gamma1 = (g/2)(1 - phi)`,
/// `Gamma3 = (g/2)(1 - phi)`, `gamma3 = (g/2)(1 + phi)`.
pub fn ness_linear_response(g: f64, hopping: f64, eps2: f64, phi: f64) -> Result<CorrelationMatrix> {
    check_domain(g, hopping, eps2)?;
    if !(phi.abs() <= 1.0) {
        return Err(Error::Domain(format!("bias phi must lie in [-1, 1], got {phi}")));
    }
    let j = hopping;
    let d = Complex64::new(g * g + 4.0 * j * j, 2.0 * g * eps2);
    let d2 = d.norm_sqr();
    let c11 = 0.5 + (1.0 - 4.0 * j * j * (g * g + 4.0 * j * j) / d2) * phi / 2.0;
    let c12 = -I * g * j * phi / d;
    let c23 = -I * g * j * phi / d.conj();
    let c13 = 4.0 * I * g * j * j * eps2 * phi / d2;
    Ok(assemble([c11, 0.5, 1.0 - c11], c12, c13, c23))
}

/// Coefficients `(A1, A2, A3)` of the expansion of the bottom-layer
/// environment currents at the two ends,
/// `I_env(site 1 / site 3) = -A1 log2(1 + A2) ∓ A3 delta + O(delta^2)`.
pub fn end_environment_current_coefficients(g: f64, hopping: f64, eps2: f64) -> Result<(f64, f64, f64)> {
    check_domain(g, hopping, eps2)?;
    let j2 = hopping * hopping;
    let s = g * g + 4.0 * j2;
    let d2 = s * s + 4.0 * g * g * eps2 * eps2;
    let a1 = 2.0 * g * j2 * s / d2;
    let a2 = g * g * (s + 4.0 * eps2 * eps2) / (2.0 * j2 * s);
    let a3 = 2.0 * g * j2 * s / (std::f64::consts::LN_2 * (d2 - 2.0 * j2 * s));
    Ok((a1, a2, a3))
}

/// Asymmetry `delta*` at which the last site of the three-site chain reaches
/// half filling, `(sqrt(g^4 + 4 J^4) - 2 J^2) / g^2`. Beyond it the
/// information lattice loses its shielding.
pub fn shielding_threshold(g: f64, hopping: f64) -> Result<f64> {
    check_domain(g, hopping, 0.0)?;
    let j2 = hopping * hopping;
    Ok(((g.powi(4) + 4.0 * j2 * j2).sqrt() - 2.0 * j2) / (g * g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_point_values() {
        let c = ness_large_bias(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(c.occupations().len(), 3);
        assert!((c.occupation(1) - 0.6).abs() < 1e-14);
        assert!((c.occupation(2) - 0.5).abs() < 1e-14);
        assert!((c.occupation(3) - 0.4).abs() < 1e-14);
        assert!((c.get(1, 2) - Complex64::new(0.0, -0.2)).norm() < 1e-14);
        assert!((c.get(2, 3) - Complex64::new(0.0, -0.2)).norm() < 1e-14);
        assert!(c.get(1, 3).norm() < 1e-14);
        assert!((particle_current(1.0, 1.0, 0.0, 0.0).unwrap() - 0.4).abs() < 1e-14);
    }

    #[test]
    fn last_site_half_filled_at_threshold() {
        for &(g, j) in &[(1.0, 1.0), (0.5, 1.0), (2.0, 0.7)] {
            let ds = shielding_threshold(g, j).unwrap();
            let c = ness_large_bias(g, j, 0.0, ds).unwrap();
            assert!((c.occupation(3) - 0.5).abs() < 1e-12);
        }
        assert!((shielding_threshold(1.0, 1.0).unwrap() - (5f64.sqrt() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn first_order_matches_finite_difference() {
        let (g, j, e) = (1.0, 1.0, 0.7);
        let (c0, c1) = first_order_in_delta(g, j, e).unwrap();
        let h = 1e-6;
        let p = ness_large_bias(g, j, e, h).unwrap();
        let m = ness_large_bias(g, j, e, -h).unwrap();
        let fd = (p.matrix() - m.matrix()) / Complex64::new(2.0 * h, 0.0);
        assert!((fd - &c1).norm() < 1e-7);
        assert_eq!(c0, ness_large_bias(g, j, e, 0.0).unwrap());
    }

    #[test]
    fn domain_errors() {
        assert!(ness_large_bias(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(ness_large_bias(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ness_large_bias(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(shielding_threshold(-1.0, 1.0).is_err());
        assert!(ness_linear_response(1.0, 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn linear_response_is_particle_hole_symmetric_at_zero_bias() {
        let c = ness_linear_response(1.0, 1.0, 2.0, 0.0).unwrap();
        for j in 1..=3 {
            assert!((c.occupation(j) - 0.5).abs() < 1e-15);
        }
        assert!(c.get(1, 2).norm() < 1e-15);
    }
}
