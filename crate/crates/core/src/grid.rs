//! Uniform grids on truncated domains and the per-node state carried on them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    HalfLine,
    WholeLine,
    ReferenceUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Physical zero-flux condition.
    NeumannZero,
    DirichletZero,
    /// Zero-flux condition at a truncation edge of an unbounded domain.
    ArtificialNeumann,
}

impl BoundaryCondition {
    pub fn is_neumann(self) -> bool {
        !matches!(self, BoundaryCondition::DirichletZero)
    }
}

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub kind: GridKind,
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub left_bc: BoundaryCondition,
    pub right_bc: BoundaryCondition,
}

/// Build a grid. `x_max` is ignored for [`GridKind::ReferenceUnit`].
pub fn make_grid(kind: GridKind, x_max: f64, n_cells: usize) -> Result<Grid> {
    use BoundaryCondition::*;
    if n_cells < MIN_CELLS {
        return Err(Error::InvalidGrid(format!(
            "n_cells must be at least {MIN_CELLS}, got {n_cells}"
        )));
    }
    let (x_min, x_max, left_bc, right_bc) = match kind {
        GridKind::HalfLine => (0.0, x_max, NeumannZero, ArtificialNeumann),
        GridKind::WholeLine => (-x_max, x_max, ArtificialNeumann, ArtificialNeumann),
        GridKind::ReferenceUnit => (0.0, 1.0, NeumannZero, NeumannZero),
    };
    if kind != GridKind::ReferenceUnit && !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "x_max must be positive and finite, got {x_max}"
        )));
    }
    Ok(Grid {
        kind,
        x_min,
        x_max,
        n_cells,
        dx: (x_max - x_min) / n_cells as f64,
        left_bc,
        right_bc,
    })
}

impl Grid {
    /// Same nodes with different boundary conditions.
    pub fn with_bcs(self, left_bc: BoundaryCondition, right_bc: BoundaryCondition) -> Self {
        Self {
            left_bc,
            right_bc,
            ..self
        }
    }

    pub fn node_count(&self) -> usize {
        self.n_cells + 1
    }

    /// Position of node `i`, computed per index.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i == self.n_cells {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.node_count()).map(|i| self.x(i)).collect()
    }

    /// Evaluate `f` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..self.node_count()).map(|i| f(self.x(i))).collect()
    }

    /// Trapezoidal quadrature weights (half cells at both ends).
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.node_count()];
        w[0] *= 0.5;
        w[self.n_cells] *= 0.5;
        w
    }

    /// Trapezoidal integral of node values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n = self.n_cells;
        let inner: f64 = values[1..n].iter().sum();
        self.dx * (inner + 0.5 * (values[0] + values[n]))
    }

    pub(crate) fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.node_count() {
            return Err(Error::LengthMismatch {
                expected: self.node_count(),
                found: values.len(),
            });
        }
        Ok(())
    }

    /// Index of the node at `x = 0` on an even-celled whole-line grid.
    fn origin_index(&self) -> Result<usize> {
        if self.kind != GridKind::WholeLine || !self.n_cells.is_multiple_of(2) {
            return Err(Error::InvalidGrid(
                "reflection requires a whole-line grid with an even cell count".into(),
            ));
        }
        Ok(self.n_cells / 2)
    }

    /// The half-line grid matching the right half of this whole-line grid.
    pub fn right_half(&self) -> Result<Grid> {
        let mid = self.origin_index()?;
        make_grid(GridKind::HalfLine, self.x_max, mid)
    }

    /// The whole-line grid whose right half is this half-line grid.
    pub fn mirrored(&self) -> Result<Grid> {
        if self.kind != GridKind::HalfLine {
            return Err(Error::InvalidGrid(
                "mirroring requires a half-line grid".into(),
            ));
        }
        make_grid(GridKind::WholeLine, self.x_max, 2 * self.n_cells)
    }
}

/// Density and chemical concentrations at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub t: f64,
    pub u: Vec<f64>,
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl StateField {
    /// A state with chemicals not yet solved (zero).
    pub fn new(t: f64, u: Vec<f64>) -> Self {
        let n = u.len();
        Self {
            t,
            u,
            v1: vec![0.0; n],
            v2: vec![0.0; n],
        }
    }

    pub fn sup_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn inf_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Maximum-norm tolerance for the evenness check in [`restrict_even`].
pub const EVEN_TOL: f64 = 1e-10;

/// Restrict an even whole-line field to `x ≥ 0`.
pub fn restrict_even(grid: &Grid, field: &StateField) -> Result<(Grid, StateField)> {
    let mid = grid.origin_index()?;
    let n = grid.n_cells;
    let mut asym: f64 = 0.0;
    for arr in [&field.u, &field.v1, &field.v2] {
        grid.check_len(arr)?;
        for i in 0..=mid {
            asym = asym.max((arr[mid + i] - arr[mid - i]).abs());
        }
    }
    if !(asym <= EVEN_TOL) {
        return Err(Error::NotEven { asymmetry: asym });
    }
    let half = grid.right_half()?;
    let take = |a: &Vec<f64>| a[mid..=n].to_vec();
    Ok((
        half,
        StateField {
            t: field.t,
            u: take(&field.u),
            v1: take(&field.v1),
            v2: take(&field.v2),
        },
    ))
}

/// Even extension of a half-line field to the whole line.
pub fn even_extension(grid: &Grid, field: &StateField) -> Result<(Grid, StateField)> {
    let whole = grid.mirrored()?;
    let extend = |a: &Vec<f64>| -> Result<Vec<f64>> {
        grid.check_len(a)?;
        Ok(a.iter().skip(1).rev().chain(a.iter()).copied().collect())
    };
    Ok((
        whole,
        StateField {
            t: field.t,
            u: extend(&field.u)?,
            v1: extend(&field.v1)?,
            v2: extend(&field.v2)?,
        },
    ))
}
