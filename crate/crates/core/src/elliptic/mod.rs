//! Screened-Poisson solves `0 = v_xx − λv + μu` for the chemical fields.
//!
//! The production path is a second-order central-difference discretization
//! with ghost-node reflection at zero-flux edges, solved by one tridiagonal
//! elimination. [`greens_oracle`] evaluates the same problem independently by
//! quadrature against the exponential resolvent kernel.

mod oracle;

pub use oracle::{greens_oracle, ORACLE_TOL};

use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid};
use crate::tridiag::Tridiagonal;

fn check_rates(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive and finite, got {lambda}"),
        });
    }
    if !mu.is_finite() {
        return Err(Error::InvalidParameter {
            name: "mu",
            reason: format!("must be finite, got {mu}"),
        });
    }
    Ok(())
}

/// Solve the discrete screened-Poisson problem on a uniform lattice with
/// spacing `dx` and the given edge conditions.
pub(crate) fn solve_screened(
    dx: f64,
    left: BoundaryCondition,
    right: BoundaryCondition,
    u: &[f64],
    lambda: f64,
    mu: f64,
) -> Result<Vec<f64>> {
    check_rates(lambda, mu)?;
    let n = u.len();
    let h2 = dx * dx;
    let mut a = Tridiagonal::zeros(n);
    let mut rhs: Vec<f64> = u.iter().map(|&ui| mu * h2 * ui).collect();
    let centre = 2.0 + lambda * h2;
    for i in 0..n {
        a.lower[i] = -1.0;
        a.diag[i] = centre;
        a.upper[i] = -1.0;
    }
    // ghost reflection v_{-1} = v_1, v_{n} = v_{n-2}
    match left {
        BoundaryCondition::DirichletZero => {
            a.pin(0);
            rhs[0] = 0.0;
        }
        _ => a.upper[0] = -2.0,
    }
    match right {
        BoundaryCondition::DirichletZero => {
            a.pin(n - 1);
            rhs[n - 1] = 0.0;
        }
        _ => a.lower[n - 1] = -2.0,
    }
    a.solve_in_place(&mut rhs)?;
    Ok(rhs)
}

/// Chemical concentration produced by density `u` at rate `mu`, decaying at
/// rate `lambda`.
pub fn solve_chemical(grid: &Grid, u: &[f64], lambda: f64, mu: f64) -> Result<Vec<f64>> {
    grid.check_len(u)?;
    solve_screened(grid.dx, grid.left_bc, grid.right_bc, u, lambda, mu)
}

/// Spatial derivative on a uniform lattice: central differences inside,
/// second-order one-sided differences at the ends, and exactly zero at an end
/// flagged `zero_left`/`zero_right`.
pub(crate) fn gradient(dx: f64, v: &[f64], zero_left: bool, zero_right: bool) -> Vec<f64> {
    let n = v.len();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        g[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    }
    g[0] = if zero_left {
        0.0
    } else {
        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx)
    };
    g[n - 1] = if zero_right {
        0.0
    } else {
        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx)
    };
    g
}

/// `v_x` at every node of `grid`.
pub fn chemical_gradient(grid: &Grid, v: &[f64]) -> Result<Vec<f64>> {
    grid.check_len(v)?;
    Ok(gradient(
        grid.dx,
        v,
        grid.left_bc == BoundaryCondition::NeumannZero,
        grid.right_bc == BoundaryCondition::NeumannZero,
    ))
}

/// Discretization allowance used by the cross-chemical estimates.
pub fn estimate_tolerance(dx: f64) -> f64 {
    1e-8 + 10.0 * dx * dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridKind};
    use proptest::prelude::*;

    fn closed_form(x: f64) -> f64 {
        0.5 * (1.0 + x) * (-x).exp()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn constant_forcing() {
        for kind in [
            GridKind::HalfLine,
            GridKind::WholeLine,
            GridKind::ReferenceUnit,
        ] {
            let g = make_grid(kind, 10.0, 64).unwrap();
            let u = vec![2.5; g.node_count()];
            let v = solve_chemical(&g, &u, 0.8, 1.3).unwrap();
            for vi in v {
                assert!((vi - 1.3 * 2.5 / 0.8).abs() < 1e-10, "{kind:?}: {vi}");
            }
        }
    }

    #[test]
    fn exponential_closed_form_second_order() {
        let mut errs = Vec::new();
        for n in [100, 200, 400, 800] {
            let g = make_grid(GridKind::HalfLine, 40.0, n).unwrap();
            let v = solve_chemical(&g, &g.sample(|x| (-x).exp()), 1.0, 1.0).unwrap();
            errs.push(max_err(&v, &g.sample(closed_form)));
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.2, "order {order}, errors {errs:?}");
        }
    }

    #[test]
    fn gradient_of_closed_form() {
        let g = make_grid(GridKind::HalfLine, 40.0, 400).unwrap();
        let v = solve_chemical(&g, &g.sample(|x| (-x).exp()), 1.0, 1.0).unwrap();
        let vx = chemical_gradient(&g, &v).unwrap();
        assert_eq!(vx[0], 0.0);
        let exact = g.sample(|x| -0.5 * x * (-x).exp());
        assert!(max_err(&vx, &exact) < 5.0 * g.dx * g.dx);
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let g = make_grid(GridKind::WholeLine, 5.0, 50).unwrap();
        assert!(chemical_gradient(&g, &vec![3.0; 51])
            .unwrap()
            .iter()
            .all(|&d| d.abs() < 1e-12));
    }

    #[test]
    fn rejects_nonpositive_decay() {
        let g = make_grid(GridKind::HalfLine, 5.0, 50).unwrap();
        assert!(solve_chemical(&g, &vec![1.0; 51], 0.0, 1.0).is_err());
        assert!(solve_chemical(&g, &vec![1.0; 50], 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn maximum_principle(vals in prop::collection::vec(0.0..5.0f64, 33), lambda in 0.1..5.0f64, mu in 0.0..3.0f64) {
            let g = make_grid(GridKind::HalfLine, 8.0, 32).unwrap();
            let v = solve_chemical(&g, &vals, lambda, mu).unwrap();
            let umax = vals.iter().copied().fold(0.0, f64::max);
            let vmin = v.iter().copied().fold(f64::INFINITY, f64::min);
            let vmax = v.iter().copied().fold(0.0, f64::max);
            prop_assert!(vmin >= 0.0);
            prop_assert!(lambda * vmax <= mu * umax * (1.0 + 1e-12) + 1e-14);
        }
    }
}
