use serde::{Deserialize, Serialize};

use crate::elliptic::{estimate_tolerance, solve_chemical};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model_params::{compute_k, compute_m, ModelParams};

/// Outcome of the two cross-chemical estimates for one density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossChemicalCheck {
    /// `max_x (χ₂λ₂v₂ − χ₁λ₁v₁)` with `vᵢ` produced at rate `μᵢ`.
    pub signed_max: f64,
    /// `M·C₀`.
    pub signed_bound: f64,
    /// `‖χ₂μ₂w₂ − χ₁μ₁w₁‖∞` with `wᵢ` produced at rate `λᵢ`.
    pub abs_max: f64,
    /// `K·‖u‖∞`.
    pub abs_bound: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Check both estimates for a nonnegative density `u` with `‖u‖∞ ≤ c0`.
///
/// The difference estimate is stated for chemicals produced at their decay
/// rates, `0 = wᵢ″ − λᵢwᵢ + λᵢu`. With production `μᵢ` instead the bound by
/// `K` does not hold in general.
pub fn check_cross_chemical(
    grid: &Grid,
    u: &[f64],
    p: &ModelParams,
    c0: f64,
) -> Result<CrossChemicalCheck> {
    p.validate()?;
    grid.check_len(u)?;
    let sup = u.iter().copied().fold(0.0, f64::max);
    if u.iter().any(|&x| x < 0.0) || sup > c0 {
        return Err(Error::InvalidParameter {
            name: "u",
            reason: format!("density must lie in [0, C0 = {c0}]"),
        });
    }
    let v1 = solve_chemical(grid, u, p.lambda1, p.mu1)?;
    let v2 = solve_chemical(grid, u, p.lambda2, p.mu2)?;
    let signed_max = v1
        .iter()
        .zip(&v2)
        .map(|(a, b)| p.chi2 * p.lambda2 * b - p.chi1 * p.lambda1 * a)
        .fold(f64::NEG_INFINITY, f64::max);

    let w1 = solve_chemical(grid, u, p.lambda1, p.lambda1)?;
    let w2 = solve_chemical(grid, u, p.lambda2, p.lambda2)?;
    let abs_max = w1
        .iter()
        .zip(&w2)
        .map(|(a, b)| (p.chi2 * p.mu2 * b - p.chi1 * p.mu1 * a).abs())
        .fold(0.0, f64::max);

    let tol = estimate_tolerance(grid.dx);
    let signed_bound = compute_m(p) * c0;
    let abs_bound = compute_k(p) * sup;
    Ok(CrossChemicalCheck {
        signed_max,
        signed_bound,
        abs_max,
        abs_bound,
        tol,
        passed: signed_max <= signed_bound + tol && abs_max <= abs_bound + tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridKind};

    #[test]
    fn balanced_chemicals_cancel() {
        let g = make_grid(GridKind::HalfLine, 20.0, 200).unwrap();
        let p = ModelParams::new(1.0, 1.0, 1.5, 1.5, 2.0, 2.0, 1.0).unwrap();
        let u = g.sample(|x| 1.0 + (-(x - 5.0).powi(2)).exp());
        let r = check_cross_chemical(&g, &u, &p, 2.0).unwrap();
        assert!(r.signed_max.abs() < 1e-12 && r.abs_max < 1e-12);
        assert!(r.passed);
    }

    #[test]
    fn uniform_density_saturates_the_signed_estimate() {
        // v_i = μ_i c/λ_i, so χ₂λ₂v₂ − χ₁λ₁v₁ = (χ₂μ₂ − χ₁μ₁)c
        let g = make_grid(GridKind::HalfLine, 20.0, 200).unwrap();
        let p = ModelParams::new(0.5, 2.0, 1.0, 3.0, 1.0, 1.0, 1.0).unwrap();
        let r = check_cross_chemical(&g, &vec![1.5; 201], &p, 1.5).unwrap();
        assert!((r.signed_max - 1.5 * (2.0 - 0.5)).abs() < 1e-9);
        assert!(r.passed);
    }

    #[test]
    fn rejects_density_above_ceiling() {
        let g = make_grid(GridKind::HalfLine, 20.0, 200).unwrap();
        assert!(check_cross_chemical(&g, &vec![3.0; 201], &ModelParams::default(), 2.0).is_err());
    }
}
