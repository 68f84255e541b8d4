use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Principal Dirichlet eigenpair of `φ″ + a₀φ = σφ` on `(−L, L)` with
/// `a₀ = a_inf/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub half_length: f64,
    pub a0: f64,
    pub sigma: f64,
}

impl EigenPair {
    /// `φ_L(x) = cos(πx/(2L))`.
    pub fn phi(&self, x: f64) -> f64 {
        (PI * x / (2.0 * self.half_length)).cos()
    }
}

pub fn principal_eigenpair(a_inf: f64, half_length: f64) -> Result<EigenPair> {
    if !(half_length > 0.0) {
        return Err(Error::InvalidParameter {
            name: "L",
            reason: format!("half-length must be positive, got {half_length}"),
        });
    }
    let a0 = a_inf / 3.0;
    Ok(EigenPair {
        half_length,
        a0,
        sigma: -PI * PI / (4.0 * half_length * half_length) + a0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_crossing() {
        let e = principal_eigenpair(3.0, PI / 2.0).unwrap();
        assert_eq!(e.a0, 1.0);
        assert!(e.sigma.abs() < 1e-15);
    }

    #[test]
    fn large_domain_limit() {
        let e = principal_eigenpair(3.0, 1e6).unwrap();
        assert!((e.sigma - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eigenfunction_values_and_monotone_sigma() {
        let mut last = f64::NEG_INFINITY;
        for l in [0.1, 0.5, 1.0, 7.0, 100.0] {
            let e = principal_eigenpair(1.2, l).unwrap();
            assert_eq!(e.phi(0.0), 1.0);
            assert!(e.phi(l).abs() < 1e-15 && e.phi(-l).abs() < 1e-15);
            assert!(e.sigma > last);
            last = e.sigma;
        }
        assert!(principal_eigenpair(1.0, 0.0).is_err());
    }

    #[test]
    fn eigen_equation_residual() {
        let e = principal_eigenpair(0.9, 2.0).unwrap();
        let d = 1e-4;
        for x in [-1.5, -0.3, 0.0, 0.8, 1.9] {
            let second = (e.phi(x + d) - 2.0 * e.phi(x) + e.phi(x - d)) / (d * d);
            assert!((second + e.a0 * e.phi(x) - e.sigma * e.phi(x)).abs() < 1e-6);
        }
    }
}
