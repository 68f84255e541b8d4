//! Green's-function evaluation of the screened-Poisson solution.
//!
//! On the whole line `v = μ ∫ e^{−√λ|x−z|}/(2√λ) u(z) dz`. Edge conditions are
//! imposed by the method of images: a zero-flux edge reflects the source with
//! weight +1, a Dirichlet edge with weight −1. The density is interpolated by
//! local cubics between nodes and integrated with 6-point Gauss–Legendre per
//! cell, so the only discretization in the oracle is the interpolation of `u`.

use crate::grid::{BoundaryCondition, Grid};

/// Declared quadrature tolerance of the oracle.
pub const ORACLE_TOL: f64 = 1e-6;

const GAUSS_NODES: [f64; 6] = [
    -0.932_469_514_203_152,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152,
];
const GAUSS_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_3,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691,
    0.467_913_934_572_691,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_3,
];

/// Kernel decay beyond which image contributions are dropped (`e^{-40}`).
const CUTOFF: f64 = 40.0;

fn lagrange_cubic(xs: [f64; 4], ys: [f64; 4], x: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..4 {
        let mut l = 1.0;
        for m in 0..4 {
            if m != j {
                l *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
        s += l * ys[j];
    }
    s
}

/// Screened-Poisson solution at every node of `grid`, by quadrature.
pub fn greens_oracle(grid: &Grid, u: &[f64], lambda: f64, mu: f64) -> Vec<f64> {
    assert!(lambda > 0.0, "decay rate must be positive");
    assert_eq!(u.len(), grid.node_count());
    let n = grid.n_cells;
    let dx = grid.dx;
    let len = grid.x_max - grid.x_min;
    let root = lambda.sqrt();
    let sign = |bc: BoundaryCondition| if bc.is_neumann() { 1.0 } else { -1.0 };
    let (s0, s1) = (sign(grid.left_bc), sign(grid.right_bc));

    // quadrature points in local coordinates y = x - x_min
    let mut pts = Vec::with_capacity(6 * n);
    for j in 0..n {
        let lo = j.saturating_sub(1).min(n.saturating_sub(3));
        let idx = [lo, lo + 1, lo + 2, lo + 3];
        let xs = idx.map(|k| k as f64 * dx);
        let ys = idx.map(|k| u[k]);
        let mid = (j as f64 + 0.5) * dx;
        for (gx, gw) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            let y = mid + 0.5 * dx * gx;
            pts.push((y, 0.5 * dx * gw * lagrange_cubic(xs, ys, y)));
        }
    }

    let n_img = 1 + (CUTOFF / (2.0 * root * len)).ceil() as i64;
    let kernel = |r: f64| {
        let d = root * r.abs();
        if d > CUTOFF {
            0.0
        } else {
            (-d).exp() / (2.0 * root)
        }
    };

    (0..=n)
        .map(|i| {
            let y = i as f64 * dx;
            let mut acc = 0.0;
            for &(z, wz) in &pts {
                let mut g = 0.0;
                for m in -n_img..=n_img {
                    let parity = if m % 2 == 0 { 1.0 } else { s0 * s1 };
                    let shift = 2.0 * m as f64 * len;
                    g += parity * (kernel(y - z - shift) + s0 * kernel(y + z - shift));
                }
                acc += g * wz;
            }
            mu * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridKind};

    #[test]
    fn constant_density() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let v = greens_oracle(&g, &vec![2.0; 101], 1.5, 0.75);
        for vi in v {
            assert!((vi - 0.75 * 2.0 / 1.5).abs() < 1e-10);
        }
    }

    #[test]
    fn exponential_closed_form() {
        let g = make_grid(GridKind::HalfLine, 40.0, 400).unwrap();
        let v = greens_oracle(&g, &g.sample(|x| (-x).exp()), 1.0, 1.0);
        for (i, vi) in v.iter().enumerate() {
            let x = g.x(i);
            assert!((vi - 0.5 * (1.0 + x) * (-x).exp()).abs() < 1e-5);
        }
    }

    #[test]
    fn point_hat_matches_image_charge() {
        let g = make_grid(GridKind::HalfLine, 40.0, 400).unwrap();
        let i0 = 50;
        let x0 = g.x(i0);
        let mut u = vec![0.0; 401];
        u[i0] = 1.0;
        let mu = 2.0;
        let v = greens_oracle(&g, &u, 1.0, mu);
        let mass = g.dx;
        for i in [0, 20, 100, 200] {
            let x = g.x(i);
            let expect = 0.5 * mu * mass * ((-(x - x0).abs()).exp() + (-(x + x0)).exp());
            assert!(
                (v[i] - expect).abs() < 1e-3 * expect,
                "x = {x}: {} vs {expect}",
                v[i]
            );
        }
    }

    #[test]
    fn dirichlet_images_vanish_at_edge() {
        let g = make_grid(GridKind::ReferenceUnit, 1.0, 64)
            .unwrap()
            .with_bcs(
                BoundaryCondition::NeumannZero,
                BoundaryCondition::DirichletZero,
            );
        let v = greens_oracle(&g, &vec![1.0; 65], 4.0, 1.0);
        assert!(v[64].abs() < 1e-12);
        assert!(v[0] > 0.0);
    }
}
