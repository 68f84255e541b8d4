//! Time stepping for `u_t = u_xx − (u V)_x + u(a − b u)` with the chemotactic
//! velocity `V = χ₁v₁ₓ − χ₂v₂ₓ` recomputed from the chemicals each step.
//!
//! One step is split as: conservative first-order upwind transport, then
//! diffusion (backward Euler for [`Scheme::Imex`], forward Euler for
//! [`Scheme::Explicit`]), then the logistic reaction by classical RK4 with
//! `a`, `b` evaluated at the stage times. On spatially uniform states the
//! transport and diffusion stages are exact, so the uniform mode follows the
//! reaction ODE to fourth order.

use serde::{Deserialize, Serialize};

use crate::elliptic::solve_screened;
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, Grid, StateField};
use crate::model_params::{CoefficientField, ModelParams};
use crate::series::{ProbeRecord, ProbeSpec, TimeSeries};
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Imex,
    Explicit,
}

pub const DEFAULT_CFL_SAFETY: f64 = 0.45;

/// Factor on `C(u₀)` beyond which a run is declared blown up.
pub const BLOWUP_FACTOR: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub clip_negative: bool,
    /// `max u` above which stepping fails with [`Error::Blowup`].
    pub blowup_ceiling: f64,
}

impl StepConfig {
    pub fn new(dt: f64, t0: f64, t_end: f64) -> Self {
        Self {
            dt,
            t0,
            t_end,
            scheme: Scheme::Imex,
            cfl_safety: DEFAULT_CFL_SAFETY,
            clip_negative: true,
            blowup_ceiling: f64::INFINITY,
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.blowup_ceiling = ceiling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive and finite, got {}", self.dt),
            });
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidParameter {
                name: "t_end",
                reason: format!("must exceed t0 = {}, got {}", self.t0, self.t_end),
            });
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "cfl_safety",
                reason: format!("must lie in (0, 1], got {}", self.cfl_safety),
            });
        }
        Ok(())
    }
}

/// Upper bound on `‖χ₁v₁ₓ − χ₂v₂ₓ‖_∞` for densities bounded by `ceiling`,
/// from `‖vₓ‖_∞ ≤ (μ/√λ)‖u‖_∞`.
pub fn velocity_bound(p: &ModelParams, ceiling: f64) -> f64 {
    (p.chi1 * p.mu1 / p.lambda1.sqrt() + p.chi2 * p.mu2 / p.lambda2.sqrt()) * ceiling
}

/// Largest stable step for a given face-velocity bound.
pub fn stable_dt(dx: f64, max_velocity: f64, scheme: Scheme, cfl: f64) -> f64 {
    let advective = cfl * dx / max_velocity.max(1.0);
    match scheme {
        Scheme::Imex => advective,
        Scheme::Explicit => advective.min(cfl * dx * dx / 2.0),
    }
}

/// Default step: 90% of the stable step for densities up to `ceiling`.
pub fn default_dt(grid: &Grid, p: &ModelParams, ceiling: f64, scheme: Scheme, cfl: f64) -> f64 {
    0.9 * stable_dt(grid.dx, velocity_bound(p, ceiling), scheme, cfl)
}

/// Treatment of one edge node in the transport and diffusion stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Edge {
    /// Zero-flux edge with a half control volume (ghost reflection).
    Reflecting,
    /// Node held at zero.
    Pinned,
}

impl From<BoundaryCondition> for Edge {
    fn from(bc: BoundaryCondition) -> Self {
        if bc.is_neumann() {
            Edge::Reflecting
        } else {
            Edge::Pinned
        }
    }
}

/// Face velocities `V_{i+1/2} = (χ₁Δv₁ − χ₂Δv₂)/dx` from nodal chemicals.
pub(crate) fn face_velocities(dx: f64, v1: &[f64], v2: &[f64], p: &ModelParams) -> Vec<f64> {
    (0..v1.len() - 1)
        .map(|i| (p.chi1 * (v1[i + 1] - v1[i]) - p.chi2 * (v2[i + 1] - v2[i])) / dx)
        .collect()
}

/// Explicit upwind transport `u ← u − dt·(F_{i+1/2} − F_{i−1/2})/dx`. Every
/// face flux enters two nodes with opposite signs, so the trapezoidal mass is
/// conserved exactly up to flux through pinned nodes.
pub(crate) fn upwind_transport(
    dx: f64,
    dt: f64,
    u: &[f64],
    faces: &[f64],
    left: Edge,
    right: Edge,
) -> Vec<f64> {
    let n = u.len();
    let mut out = u.to_vec();
    let r = dt / dx;
    for (i, &vel) in faces.iter().enumerate() {
        let flux = if vel > 0.0 {
            vel * u[i]
        } else {
            vel * u[i + 1]
        };
        let left_share = if i == 0 { 2.0 } else { 1.0 };
        let right_share = if i + 1 == n - 1 { 2.0 } else { 1.0 };
        out[i] -= left_share * r * flux;
        out[i + 1] += right_share * r * flux;
    }
    if left == Edge::Pinned {
        out[0] = 0.0;
    }
    if right == Edge::Pinned {
        out[n - 1] = 0.0;
    }
    out
}

/// The matrix of `coef·u_xx` with ghost reflection or pinned edges.
fn laplacian(n: usize, coef: f64, left: Edge, right: Edge) -> Tridiagonal {
    let mut a = Tridiagonal::zeros(n);
    for i in 0..n {
        a.lower[i] = coef;
        a.diag[i] = -2.0 * coef;
        a.upper[i] = coef;
    }
    match left {
        Edge::Reflecting => a.upper[0] = 2.0 * coef,
        Edge::Pinned => {
            a.lower[0] = 0.0;
            a.diag[0] = 0.0;
            a.upper[0] = 0.0;
        }
    }
    match right {
        Edge::Reflecting => a.lower[n - 1] = 2.0 * coef,
        Edge::Pinned => {
            a.lower[n - 1] = 0.0;
            a.diag[n - 1] = 0.0;
            a.upper[n - 1] = 0.0;
        }
    }
    a
}

/// Advance `u_t = diffusivity·u_xx` by one step.
pub(crate) fn diffuse(
    dx: f64,
    dt: f64,
    diffusivity: f64,
    u: &mut [f64],
    scheme: Scheme,
    left: Edge,
    right: Edge,
) -> Result<()> {
    let n = u.len();
    let lap = laplacian(n, diffusivity / (dx * dx), left, right);
    match scheme {
        Scheme::Explicit => {
            let du = lap.apply(u);
            for (ui, d) in u.iter_mut().zip(du) {
                *ui += dt * d;
            }
        }
        Scheme::Imex => {
            let mut m = Tridiagonal::zeros(n);
            for i in 0..n {
                m.lower[i] = -dt * lap.lower[i];
                m.diag[i] = 1.0 - dt * lap.diag[i];
                m.upper[i] = -dt * lap.upper[i];
            }
            m.solve_in_place(u)?;
        }
    }
    if left == Edge::Pinned {
        u[0] = 0.0;
    }
    if right == Edge::Pinned {
        u[n - 1] = 0.0;
    }
    Ok(())
}

/// RK4 step of `u′ = u(a − b u)` at every node; `x_of(i)` gives the physical
/// position of node `i`.
pub(crate) fn react(
    coeffs: &CoefficientField,
    t: f64,
    dt: f64,
    u: &mut [f64],
    x_of: impl Fn(usize) -> f64,
) {
    let (tm, te) = (t + 0.5 * dt, t + dt);
    for (i, ui) in u.iter_mut().enumerate() {
        let x = x_of(i);
        let f = |s: f64, v: f64| v * (coeffs.a(s, x) - coeffs.b(s, x) * v);
        let u0 = *ui;
        let k1 = f(t, u0);
        let k2 = f(tm, u0 + 0.5 * dt * k1);
        let k3 = f(tm, u0 + 0.5 * dt * k2);
        let k4 = f(te, u0 + dt * k3);
        *ui = u0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

/// Clip negative values to zero; returns the removed mass.
pub(crate) fn clip_negative(u: &mut [f64], weights: &[f64]) -> f64 {
    let mut removed = 0.0;
    for (ui, w) in u.iter_mut().zip(weights) {
        if *ui < 0.0 {
            removed += -*ui * w;
            *ui = 0.0;
        }
    }
    removed
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Recompute both chemicals from `state.u`.
pub fn refresh_chemicals(grid: &Grid, state: &mut StateField, p: &ModelParams) -> Result<()> {
    grid.check_len(&state.u)?;
    state.v1 = solve_screened(
        grid.dx,
        grid.left_bc,
        grid.right_bc,
        &state.u,
        p.lambda1,
        p.mu1,
    )?;
    state.v2 = solve_screened(
        grid.dx,
        grid.left_bc,
        grid.right_bc,
        &state.u,
        p.lambda2,
        p.mu2,
    )?;
    Ok(())
}

/// Advance a state whose chemicals are consistent with its density. Returns
/// the new state (chemicals refreshed) and the mass removed by clipping.
fn advance(
    grid: &Grid,
    state: &StateField,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &StepConfig,
    dt: f64,
) -> Result<(StateField, f64)> {
    let dx = grid.dx;
    let (left, right) = (Edge::from(grid.left_bc), Edge::from(grid.right_bc));
    let faces = face_velocities(dx, &state.v1, &state.v2, p);
    let limit = stable_dt(dx, max_abs(&faces), cfg.scheme, cfg.cfl_safety);
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }

    let mut u = upwind_transport(dx, dt, &state.u, &faces, left, right);
    diffuse(dx, dt, 1.0, &mut u, cfg.scheme, left, right)?;
    react(coeffs, state.t, dt, &mut u, |i| grid.x(i));
    let clipped = if cfg.clip_negative {
        clip_negative(&mut u, &grid.weights())
    } else {
        0.0
    };

    let max_u = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max_u <= cfg.blowup_ceiling) {
        return Err(Error::Blowup {
            max_u,
            ceiling: cfg.blowup_ceiling,
        });
    }
    let mut next = StateField::new(state.t + dt, u);
    refresh_chemicals(grid, &mut next, p)?;
    Ok((next, clipped))
}

/// One step of size `cfg.dt` from `state`. The chemicals are re-solved from
/// `state.u` first; the returned state carries chemicals consistent with its
/// density.
pub fn step(
    grid: &Grid,
    state: &StateField,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &StepConfig,
) -> Result<StateField> {
    let mut current = state.clone();
    refresh_chemicals(grid, &mut current, p)?;
    advance(grid, &current, coeffs, p, cfg, cfg.dt)
        .map(|(s, _)| s)
        .map_err(|e| e.at(state.t))
}

/// Step count, uniform step size and probe stride. The step is shrunk so that
/// probes fall on multiples of `interval` and the last step lands on `t_end`.
pub(crate) fn step_plan(cfg: &StepConfig, interval: f64) -> (usize, f64, usize) {
    let span = cfg.t_end - cfg.t0;
    let ceil = |x: f64| (x - 1e-9).ceil().max(1.0) as usize;
    if !(interval > 0.0) || interval >= span {
        let n = ceil(span / cfg.dt);
        return (n, span / n as f64, n);
    }
    let per_probe = ceil(interval / cfg.dt);
    let n = ceil(span / (interval / per_probe as f64));
    (n, span / n as f64, per_probe)
}

/// Evolve `u0` from `cfg.t0` to `cfg.t_end`, recording probes.
pub fn run(
    grid: &Grid,
    u0: &[f64],
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &StepConfig,
    probes: &ProbeSpec,
) -> Result<TimeSeries> {
    cfg.validate()?;
    p.validate()?;
    grid.check_len(u0)?;
    if let Some(&bad) = u0.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "u0",
            reason: format!("initial density must be finite and nonnegative, found {bad}"),
        });
    }
    let (n_steps, dt, stride) = step_plan(cfg, probes.interval);

    let mut state = StateField::new(cfg.t0, u0.to_vec());
    refresh_chemicals(grid, &mut state, p)?;
    let mut series = TimeSeries::new(cfg.t0, cfg.t_end, dt, &state);
    let record = |s: &StateField, clip: f64| ProbeRecord {
        t: s.t,
        sup_u: s.sup_u(),
        inf_u: s.inf_u(),
        mass: grid.integrate(&s.u),
        err_to_target: probes.target.as_ref().map(|tg| tg.distance(s.t, &s.u)),
        h: None,
        g: None,
        ux_front: None,
        clip_mass: clip,
    };
    series.push(record(&state, 0.0));

    for k in 1..=n_steps {
        let (mut next, clipped) =
            advance(grid, &state, coeffs, p, cfg, dt).map_err(|e| e.at(state.t))?;
        if k == n_steps {
            next.t = cfg.t_end;
        } else {
            next.t = cfg.t0 + k as f64 * dt;
        }
        state = next;
        series.observe_step(&state, clipped);
        if k % stride == 0 || k == n_steps {
            series.push(record(&state, series.clip_mass));
        }
    }
    series.final_state = state;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridKind};

    fn logistic(t: f64, u0: f64) -> f64 {
        u0 * t.exp() / (1.0 + u0 * (t.exp() - 1.0))
    }

    #[test]
    fn uniform_equilibrium_is_fixed() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let c = CoefficientField::constant(1.0, 1.0);
        let p = ModelParams::default();
        let cfg = StepConfig::new(0.04, 0.0, 1.0);
        let mut s = StateField::new(0.0, vec![1.0; 101]);
        for _ in 0..25 {
            s = step(&g, &s, &c, &p, &cfg).unwrap();
        }
        assert!(s.u.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!((s.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chemotactic_equilibrium_is_fixed() {
        let g = make_grid(GridKind::WholeLine, 10.0, 200).unwrap();
        let c = CoefficientField::constant(2.0, 4.0);
        let p = ModelParams::new(0.3, 0.8, 1.5, 0.5, 1.2, 0.4, 1.0).unwrap();
        let cfg = StepConfig::new(0.02, 0.0, 1.0);
        let mut s = StateField::new(0.0, vec![0.5; 201]);
        for _ in 0..50 {
            s = step(&g, &s, &c, &p, &cfg).unwrap();
        }
        let drift = s.u.iter().map(|x| (x - 0.5).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-8, "drift {drift}");
        assert!(s.v1.iter().all(|v| (v - 1.2 * 0.5 / 1.5).abs() < 1e-8));
        assert!(s.v2.iter().all(|v| (v - 0.4 * 0.5 / 0.5).abs() < 1e-8));
    }

    #[test]
    fn uniform_state_follows_logistic_curve() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let c = CoefficientField::constant(1.0, 1.0);
        let p = ModelParams::default();
        for (dt, tol) in [(0.01, 2e-5), (0.005, 5e-6)] {
            let cfg = StepConfig::new(dt, 0.0, 3.0);
            let ts = run(&g, &vec![0.1; 101], &c, &p, &cfg, &ProbeSpec::every(0.5)).unwrap();
            for r in &ts.records {
                let exact = logistic(r.t, 0.1);
                assert!(
                    (r.sup_u - exact).abs() < tol,
                    "t={} {} vs {exact}",
                    r.t,
                    r.sup_u
                );
                assert!((r.inf_u - exact).abs() < tol);
            }
        }
    }

    #[test]
    fn rejects_cfl_violation() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let c = CoefficientField::constant(1.0, 1.0);
        let p = ModelParams::default();
        let cfg = StepConfig::new(0.01, 0.0, 1.0).with_scheme(Scheme::Explicit);
        let s = StateField::new(0.0, vec![1.0; 101]);
        let err = step(&g, &s, &c, &p, &cfg).unwrap_err();
        assert!(matches!(err.root(), Error::CflViolation { .. }));
    }

    #[test]
    fn detects_blowup() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let c = CoefficientField::constant(5.0, 1.0);
        let p = ModelParams::default();
        let cfg = StepConfig::new(0.01, 0.0, 5.0).with_ceiling(2.0);
        let err = run(&g, &vec![1.0; 101], &c, &p, &cfg, &ProbeSpec::every(1.0)).unwrap_err();
        assert!(matches!(err.root(), Error::Blowup { .. }));
        assert!(matches!(err, Error::AtTime { .. }));
    }

    #[test]
    fn probes_land_on_integer_times() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let c = CoefficientField::constant(1.0, 1.0);
        let p = ModelParams::default();
        let cfg = StepConfig::new(0.03, 0.0, 10.0);
        let ts = run(&g, &vec![1.0; 101], &c, &p, &cfg, &ProbeSpec::every(1.0)).unwrap();
        assert_eq!(ts.records.len(), 11);
        for (k, r) in ts.records.iter().enumerate() {
            assert!((r.t - k as f64).abs() < 1e-9, "{} vs {k}", r.t);
            assert!((r.sup_u - 1.0).abs() < 1e-12 && (r.inf_u - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transport_conserves_mass() {
        let g = make_grid(GridKind::HalfLine, 10.0, 100).unwrap();
        let u = g.sample(|x| 1.0 + (-(x - 3.0) * (x - 3.0)).exp());
        let faces: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let e = Edge::Reflecting;
        let out = upwind_transport(g.dx, 0.04, &u, &faces, e, e);
        assert!((g.integrate(&out) - g.integrate(&u)).abs() < 1e-13);
        assert!(out.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn default_dt_is_stable() {
        let g = make_grid(GridKind::HalfLine, 40.0, 400).unwrap();
        let p = ModelParams::new(2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let dt = default_dt(&g, &p, 3.0, Scheme::Imex, DEFAULT_CFL_SAFETY);
        assert!(dt <= 0.45 * 0.1 / 9.0);
        let dt_e = default_dt(&g, &p, 3.0, Scheme::Explicit, DEFAULT_CFL_SAFETY);
        assert!(dt_e <= 0.45 * 0.01 / 2.0);
    }
}
