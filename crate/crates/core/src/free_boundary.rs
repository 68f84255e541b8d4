//! Stefan-type free-boundary problems on `[0, h(t)]` (one front, zero flux at
//! the origin) and `[g(t), h(t)]` (two fronts), solved by front fixing.
//!
//! With `ℓ = h − g` and `ξ = (x − g)/ℓ ∈ [0, 1]`, the density `w(t, ξ) = u(t, x)`
//! is advanced through the mass density `q = ℓw`, which obeys the
//! conservation law
//!
//! ```text
//! q_t = q_ξξ/ℓ² − (q W)_ξ + q(a − b q/ℓ),   W = (V − g′ − ξℓ′)/ℓ
//! ```
//!
//! where `V = χ₁v₁ₓ − χ₂v₂ₓ` is the physical chemotactic velocity and the
//! chemicals solve `v_ξξ/ℓ² − λv + μw = 0` with zero flux at both ends. The
//! fronts move by the Stefan law `h′ = −ν uₓ(t, h)`, `g′ = −ν uₓ(t, g)`.

use serde::{Deserialize, Serialize};

use crate::elliptic::solve_screened;
use crate::error::{Error, Result};
use crate::grid::{make_grid, BoundaryCondition, Grid, GridKind, StateField};
use crate::model_params::{CoefficientField, ModelParams};
use crate::series::{ProbeRecord, ProbeSpec, TimeSeries};
use crate::stepper::{
    clip_negative, diffuse, max_abs, react, stable_dt, step_plan, upwind_transport, velocity_bound,
    Edge, Scheme, StepConfig,
};

/// Default width (in reference cells times the initial width) below which
/// the domain is declared collapsed.
pub const DEFAULT_COLLAPSE_FACTOR: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontKind {
    Single,
    Double,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeBoundaryState {
    pub t: f64,
    pub kind: FrontKind,
    /// Right front.
    pub h: f64,
    /// Left front; fixed at 0 for a single front.
    pub g: f64,
    /// Width `h − g` at the initial time.
    pub width0: f64,
    /// Reference grid on `[0, 1]`.
    pub grid: Grid,
    pub w: Vec<f64>,
    pub v1w: Vec<f64>,
    pub v2w: Vec<f64>,
    pub h_history: Vec<(f64, f64)>,
    pub g_history: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontConfig {
    pub step: StepConfig,
    pub collapse_factor: f64,
}

impl FrontConfig {
    pub fn new(step: StepConfig) -> Self {
        Self {
            step,
            collapse_factor: DEFAULT_COLLAPSE_FACTOR,
        }
    }
}

/// Tolerance on `u₀` at a front before the datum is projected.
const COMPAT_TOL: f64 = 1e-12;

impl FreeBoundaryState {
    /// Single front on `[0, h0]` with initial density `u0(x)`.
    pub fn single(
        t0: f64,
        h0: f64,
        u0: impl Fn(f64) -> f64,
        n_cells: usize,
        p: &ModelParams,
    ) -> Result<Self> {
        Self::build(FrontKind::Single, t0, 0.0, h0, u0, n_cells, p)
    }

    /// Two fronts on `[g0, h0]`.
    pub fn double(
        t0: f64,
        g0: f64,
        h0: f64,
        u0: impl Fn(f64) -> f64,
        n_cells: usize,
        p: &ModelParams,
    ) -> Result<Self> {
        Self::build(FrontKind::Double, t0, g0, h0, u0, n_cells, p)
    }

    fn build(
        kind: FrontKind,
        t0: f64,
        g0: f64,
        h0: f64,
        u0: impl Fn(f64) -> f64,
        n_cells: usize,
        p: &ModelParams,
    ) -> Result<Self> {
        p.validate()?;
        if kind == FrontKind::Single && !(h0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "h0",
                reason: format!("must be positive, got {h0}"),
            });
        }
        if !(h0 > g0 && (h0 - g0).is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g0",
                reason: format!("left front {g0} must lie below right front {h0}"),
            });
        }
        let left_bc = match kind {
            FrontKind::Single => BoundaryCondition::NeumannZero,
            FrontKind::Double => BoundaryCondition::DirichletZero,
        };
        let grid = make_grid(GridKind::ReferenceUnit, 1.0, n_cells)?
            .with_bcs(left_bc, BoundaryCondition::DirichletZero);
        let width = h0 - g0;
        let mut w = grid.sample(|xi| u0(g0 + xi * width));
        if let Some(&bad) = w.iter().find(|&&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "u0",
                reason: format!("initial density must be finite and nonnegative, found {bad}"),
            });
        }
        project_front(&mut w, true);
        if kind == FrontKind::Double {
            project_front(&mut w, false);
        }
        let mut state = Self {
            t: t0,
            kind,
            h: h0,
            g: g0,
            width0: width,
            grid,
            w,
            v1w: Vec::new(),
            v2w: Vec::new(),
            h_history: vec![(t0, h0)],
            g_history: match kind {
                FrontKind::Single => Vec::new(),
                FrontKind::Double => vec![(t0, g0)],
            },
        };
        state.refresh_chemicals(p)?;
        Ok(state)
    }

    pub fn width(&self) -> f64 {
        self.h - self.g
    }

    /// Physical position of reference node `i`.
    pub fn position(&self, i: usize) -> f64 {
        self.g + self.grid.x(i) * self.width()
    }

    pub fn left_front(&self) -> Option<f64> {
        (self.kind == FrontKind::Double).then_some(self.g)
    }

    fn left_edge(&self) -> Edge {
        match self.kind {
            FrontKind::Single => Edge::Reflecting,
            FrontKind::Double => Edge::Pinned,
        }
    }

    fn refresh_chemicals(&mut self, p: &ModelParams) -> Result<()> {
        let dx = self.width() * self.grid.dx;
        let n = BoundaryCondition::NeumannZero;
        self.v1w = solve_screened(dx, n, n, &self.w, p.lambda1, p.mu1)?;
        self.v2w = solve_screened(dx, n, n, &self.w, p.lambda2, p.mu2)?;
        Ok(())
    }

    /// `uₓ(t, h)` from a three-point one-sided difference, capped at zero.
    pub fn slope_at_right(&self) -> f64 {
        let n = self.w.len() - 1;
        let dxi = self.grid.dx;
        let d = (3.0 * self.w[n] - 4.0 * self.w[n - 1] + self.w[n - 2]) / (2.0 * dxi);
        (d / self.width()).min(0.0)
    }

    /// `uₓ(t, g)`, capped at zero from below; zero for a single front.
    pub fn slope_at_left(&self) -> f64 {
        match self.kind {
            FrontKind::Single => 0.0,
            FrontKind::Double => {
                let dxi = self.grid.dx;
                let d = (-3.0 * self.w[0] + 4.0 * self.w[1] - self.w[2]) / (2.0 * dxi);
                (d / self.width()).max(0.0)
            }
        }
    }

    pub fn sup_u(&self) -> f64 {
        self.w.iter().copied().fold(0.0, f64::max)
    }

    pub fn inf_u(&self) -> f64 {
        self.w.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `∫_g^h u dx`.
    pub fn mass(&self) -> f64 {
        self.width() * self.grid.integrate(&self.w)
    }

    /// Density at physical position `x`; zero outside `[g, h]`.
    pub fn density_at(&self, x: f64) -> f64 {
        if x < self.g || x > self.h {
            return 0.0;
        }
        interpolate(&self.w, (x - self.g) / self.width())
    }

    /// The state as a [`StateField`] on the reference nodes.
    pub fn as_state_field(&self) -> StateField {
        StateField {
            t: self.t,
            u: self.w.clone(),
            v1: self.v1w.clone(),
            v2: self.v2w.clone(),
        }
    }

    /// Front velocities `(g′, h′)` from the Stefan law.
    fn front_speeds(&self, p: &ModelParams) -> (f64, f64) {
        (-p.nu * self.slope_at_left(), -p.nu * self.slope_at_right())
    }

    /// Reference-frame face velocities `W_{i+1/2}`.
    fn reference_velocities(&self, p: &ModelParams, g_rate: f64, h_rate: f64) -> Vec<f64> {
        let ell = self.width();
        let dx = ell * self.grid.dx;
        let rate = h_rate - g_rate;
        (0..self.w.len() - 1)
            .map(|i| {
                let vel = (p.chi1 * (self.v1w[i + 1] - self.v1w[i])
                    - p.chi2 * (self.v2w[i + 1] - self.v2w[i]))
                    / dx;
                let xi = (i as f64 + 0.5) * self.grid.dx;
                (vel - g_rate - xi * rate) / ell
            })
            .collect()
    }

    /// Largest stable step from the current state.
    pub fn stable_dt(&self, p: &ModelParams, scheme: Scheme, cfl: f64) -> f64 {
        let (gr, hr) = self.front_speeds(p);
        let faces = self.reference_velocities(p, gr, hr);
        stable_limit(self.grid.dx, self.width(), max_abs(&faces), scheme, cfl)
    }

    /// A default step: half the stable step at the initial state, further
    /// limited by the fixed-domain bound with densities up to `ceiling`.
    pub fn default_dt(&self, p: &ModelParams, ceiling: f64, scheme: Scheme, cfl: f64) -> f64 {
        let dx = self.width() * self.grid.dx;
        let fixed = stable_dt(dx, velocity_bound(p, ceiling), scheme, cfl);
        0.5 * self.stable_dt(p, scheme, cfl).min(fixed)
    }
}

fn stable_limit(dxi: f64, ell: f64, max_w: f64, scheme: Scheme, cfl: f64) -> f64 {
    let advective = if max_w > 0.0 {
        cfl * dxi / max_w
    } else {
        f64::INFINITY
    };
    match scheme {
        Scheme::Imex => advective,
        Scheme::Explicit => advective.min(cfl * (ell * dxi).powi(2) / 2.0),
    }
}

/// Force a zero at the right (or left) end; a nonzero value there is removed
/// and its neighbour replaced by the average of its own neighbours.
fn project_front(w: &mut [f64], right: bool) {
    let n = w.len() - 1;
    let (end, next, far) = if right { (n, n - 1, n - 2) } else { (0, 1, 2) };
    if w[end].abs() > COMPAT_TOL {
        w[end] = 0.0;
        w[next] = 0.5 * (w[far] + w[end]);
    } else {
        w[end] = 0.0;
    }
}

/// Piecewise-linear interpolation of uniform samples on `[0, 1]`.
pub fn interpolate(w: &[f64], xi: f64) -> f64 {
    let n = w.len() - 1;
    let s = (xi.clamp(0.0, 1.0)) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let f = s - i as f64;
    (1.0 - f) * w[i] + f * w[i + 1]
}

fn resample(values: &[f64], n_cells: usize) -> Vec<f64> {
    if values.len() == n_cells + 1 {
        return values.to_vec();
    }
    (0..=n_cells)
        .map(|i| interpolate(values, i as f64 / n_cells as f64))
        .collect()
}

fn check_front(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: format!("front position must be positive, got {h}"),
        });
    }
    Ok(())
}

/// Map samples of `u` at uniform nodes of `[0, h]` to `w(ξ) = u(ξh)` on
/// `n_cells` reference cells. Identity on matching grids.
pub fn to_reference(u: &[f64], h: f64, n_cells: usize) -> Result<Vec<f64>> {
    check_front(h)?;
    if u.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    Ok(resample(u, n_cells))
}

/// Map reference samples `w` back to `u(x) = w(x/h)` on `n_cells` uniform
/// cells of `[0, h]`.
pub fn from_reference(w: &[f64], h: f64, n_cells: usize) -> Result<Vec<f64>> {
    check_front(h)?;
    if w.len() < 2 {
        return Err(Error::InvalidGrid("need at least two samples".into()));
    }
    Ok(resample(w, n_cells))
}

/// Advance a free-boundary state by `dt` (uses the state's own chemicals,
/// which must be consistent with `w`).
fn advance(
    state: &FreeBoundaryState,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &FrontConfig,
    dt: f64,
) -> Result<(FreeBoundaryState, f64)> {
    let step_cfg = &cfg.step;
    let dxi = state.grid.dx;
    let ell = state.width();
    let (g_rate, h_rate) = state.front_speeds(p);
    let faces = state.reference_velocities(p, g_rate, h_rate);

    let limit = stable_limit(
        dxi,
        ell,
        max_abs(&faces),
        step_cfg.scheme,
        step_cfg.cfl_safety,
    );
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }

    let h_new = state.h + dt * h_rate;
    let g_new = state.g + dt * g_rate;
    let ell_new = h_new - g_new;
    let threshold = cfg.collapse_factor * dxi * state.width0;
    if !(ell_new >= threshold) {
        return Err(Error::FrontCollapse {
            width: ell_new,
            threshold,
        });
    }

    let left = state.left_edge();
    let q: Vec<f64> = state.w.iter().map(|&wi| ell * wi).collect();
    let q = upwind_transport(dxi, dt, &q, &faces, left, Edge::Pinned);
    let mut w: Vec<f64> = q.into_iter().map(|qi| qi / ell_new).collect();
    diffuse(
        dxi,
        dt,
        1.0 / (ell_new * ell_new),
        &mut w,
        step_cfg.scheme,
        left,
        Edge::Pinned,
    )?;
    let grid = state.grid;
    react(coeffs, state.t, dt, &mut w, |i| g_new + grid.x(i) * ell_new);
    let clipped = if step_cfg.clip_negative {
        let weights: Vec<f64> = grid.weights().iter().map(|wt| wt * ell_new).collect();
        clip_negative(&mut w, &weights)
    } else {
        0.0
    };
    let n = w.len() - 1;
    w[n] = 0.0;
    if state.kind == FrontKind::Double {
        w[0] = 0.0;
    }

    let max_u = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max_u <= step_cfg.blowup_ceiling) {
        return Err(Error::Blowup {
            max_u,
            ceiling: step_cfg.blowup_ceiling,
        });
    }

    let t = state.t + dt;
    let mut next = FreeBoundaryState {
        t,
        kind: state.kind,
        h: h_new,
        g: g_new,
        width0: state.width0,
        grid,
        w,
        v1w: Vec::new(),
        v2w: Vec::new(),
        h_history: Vec::new(),
        g_history: Vec::new(),
    };
    next.refresh_chemicals(p)?;
    Ok((next, clipped))
}

/// One front-fixed step of size `cfg.step.dt`: chemicals re-solved from `w`,
/// fronts moved by the Stefan law, then `w` advanced on the reference grid.
pub fn stefan_step(
    state: &FreeBoundaryState,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &FrontConfig,
) -> Result<FreeBoundaryState> {
    let mut current = state.clone();
    current.refresh_chemicals(p)?;
    let (mut next, _) =
        advance(&current, coeffs, p, cfg, cfg.step.dt).map_err(|e| e.at(state.t))?;
    next.h_history = state.h_history.clone();
    next.h_history.push((next.t, next.h));
    next.g_history = state.g_history.clone();
    if next.kind == FrontKind::Double {
        next.g_history.push((next.t, next.g));
    }
    Ok(next)
}

fn record(
    state: &FreeBoundaryState,
    target: Option<&crate::series::Target>,
    clip: f64,
) -> ProbeRecord {
    ProbeRecord {
        t: state.t,
        sup_u: state.sup_u(),
        inf_u: state.inf_u(),
        mass: state.mass(),
        err_to_target: target.map(|tg| tg.distance(state.t, &state.w)),
        h: Some(state.h),
        g: state.left_front(),
        ux_front: Some(state.slope_at_right()),
        clip_mass: clip,
    }
}

/// Evolve a free-boundary state to `cfg.step.t_end`. The step's `t0` is
/// taken from the state.
pub fn run_free_boundary(
    initial: &FreeBoundaryState,
    coeffs: &CoefficientField,
    p: &ModelParams,
    cfg: &FrontConfig,
    probes: &ProbeSpec,
) -> Result<(TimeSeries, FreeBoundaryState)> {
    let step_cfg = StepConfig {
        t0: initial.t,
        ..cfg.step
    };
    step_cfg.validate()?;
    let (n_steps, dt, stride) = step_plan(&step_cfg, probes.interval);
    let target = probes.target.as_ref();

    let mut state = initial.clone();
    state.refresh_chemicals(p)?;
    let mut series = TimeSeries::new(step_cfg.t0, step_cfg.t_end, dt, &state.as_state_field());
    series.push(record(&state, target, 0.0));
    let mut h_hist = state.h_history.clone();
    let mut g_hist = state.g_history.clone();

    for k in 1..=n_steps {
        let (mut next, clipped) = advance(&state, coeffs, p, cfg, dt).map_err(|e| e.at(state.t))?;
        next.t = if k == n_steps {
            step_cfg.t_end
        } else {
            step_cfg.t0 + k as f64 * dt
        };
        state = next;
        h_hist.push((state.t, state.h));
        if state.kind == FrontKind::Double {
            g_hist.push((state.t, state.g));
        }
        series.observe_step(&state.as_state_field(), clipped);
        if k % stride == 0 || k == n_steps {
            series.push(record(&state, target, series.clip_mass));
        }
    }
    state.h_history = h_hist;
    state.g_history = g_hist;
    series.final_state = state.as_state_field();
    Ok((series, state))
}

/// Numerical classification of a completed free-boundary run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Spreading,
    Vanishing,
    Undecided,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Spreading => "spreading",
            Outcome::Vanishing => "vanishing",
            Outcome::Undecided => "undecided",
        })
    }
}

/// Thresholds of the spreading/vanishing classifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutcomeThresholds {
    /// Spreading requires the final width to exceed this multiple of the
    /// initial width.
    pub spread_factor: f64,
    /// Vanishing requires the final `sup u` below this value.
    pub vanish_sup: f64,
    /// Vanishing requires relative width growth per unit time below this
    /// rate over the final window.
    pub plateau_rate: f64,
    /// Fraction of the run forming the final window.
    pub window_fraction: f64,
}

impl Default for OutcomeThresholds {
    fn default() -> Self {
        Self {
            spread_factor: 10.0,
            vanish_sup: 1e-4,
            plateau_rate: 1e-6,
            window_fraction: 0.25,
        }
    }
}

/// Classify a free-boundary run. `floor` is the persistence level: spreading
/// requires `sup u ≥ floor/2` throughout the final window.
pub fn detect_outcome(series: &TimeSeries, floor: f64, thr: &OutcomeThresholds) -> Outcome {
    let width = |r: &ProbeRecord| r.h.unwrap_or(0.0) - r.g.unwrap_or(0.0);
    let first = &series.records[0];
    let last = series.last();
    let window: Vec<&ProbeRecord> = series.final_window(thr.window_fraction).collect();
    let start = window.first().copied().unwrap_or(last);

    let spread = width(last) > thr.spread_factor * width(first)
        && window.iter().all(|r| r.sup_u >= 0.5 * floor);
    if spread {
        return Outcome::Spreading;
    }
    let span = last.t - start.t;
    let growth = if span > 0.0 {
        (width(last) - width(start)) / (width(start) * span)
    } else {
        0.0
    };
    if last.sup_u < thr.vanish_sup && growth < thr.plateau_rate {
        return Outcome::Vanishing;
    }
    Outcome::Undecided
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg(dt: f64, t_end: f64) -> FrontConfig {
        FrontConfig::new(StepConfig::new(dt, 0.0, t_end))
    }

    #[test]
    fn reference_map_cosine() {
        let h = 3.0;
        let u: Vec<f64> = (0..=100)
            .map(|i| (PI * (i as f64 * h / 100.0) / (2.0 * h)).cos())
            .collect();
        let w = to_reference(&u, h, 100).unwrap();
        for (i, wi) in w.iter().enumerate() {
            assert!((wi - (PI * i as f64 / 200.0).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn reference_round_trip() {
        let u: Vec<f64> = (0..=64).map(|i| (i as f64 * 0.3).sin().abs()).collect();
        let back = from_reference(&to_reference(&u, 2.5, 64).unwrap(), 2.5, 64).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_profile_slope_scales() {
        let h = 4.0;
        let u: Vec<f64> = (0..=40).map(|i| i as f64 * h / 40.0).collect();
        let w = to_reference(&u, h, 80).unwrap();
        for (i, wi) in w.iter().enumerate() {
            assert!((wi - h * i as f64 / 80.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_nonpositive_front() {
        assert!(to_reference(&[1.0, 0.0], 0.0, 4).is_err());
        assert!(from_reference(&[1.0, 0.0], -1.0, 4).is_err());
        let p = ModelParams::default();
        assert!(FreeBoundaryState::single(0.0, 0.0, |_| 0.0, 16, &p).is_err());
    }

    #[test]
    fn stefan_update_formula() {
        // w(ξ) = 2(1 − ξ): w_ξ(1) = −2, h = 1
        let p = ModelParams {
            nu: 0.5,
            ..ModelParams::default()
        };
        let s = FreeBoundaryState::single(0.0, 1.0, |x| 2.0 * (1.0 - x), 20, &p).unwrap();
        assert!((s.slope_at_right() + 2.0).abs() < 1e-12);
        let c = CoefficientField::constant(1.0, 1.0);
        let next = stefan_step(&s, &c, &p, &cfg(0.01, 1.0)).unwrap();
        assert!((next.h - 1.01).abs() < 1e-12);
        assert_eq!(next.w[20], 0.0);
        assert_eq!(next.h_history.len(), 2);
    }

    #[test]
    fn front_never_recedes() {
        let p = ModelParams::new(1.0, 0.5, 1.0, 2.0, 1.0, 1.0, 2.0).unwrap();
        let c = CoefficientField::constant(1.0, 2.0);
        // cubic tangency at the front: the raw three-point slope is positive
        let s = FreeBoundaryState::single(0.0, 2.0, |x| (1.0 - x / 2.0).powi(3), 100, &p).unwrap();
        assert_eq!(s.slope_at_right(), 0.0);
        let (ts, end) =
            run_free_boundary(&s, &c, &p, &cfg(0.002, 2.0), &ProbeSpec::every(0.1)).unwrap();
        for pair in end.h_history.windows(2) {
            assert!(pair[1].1 >= pair[0].1);
        }
        assert!(ts.records.iter().all(|r| r.ux_front.unwrap() <= 0.0));
    }

    #[test]
    fn zero_datum_vanishes_immediately() {
        let p = ModelParams::default();
        let c = CoefficientField::constant(1.0, 1.0);
        let s = FreeBoundaryState::single(0.0, 1.0, |_| 0.0, 50, &p).unwrap();
        let (ts, end) =
            run_free_boundary(&s, &c, &p, &cfg(0.01, 1.0), &ProbeSpec::every(0.1)).unwrap();
        assert_eq!(end.h, 1.0);
        assert_eq!(
            detect_outcome(&ts, 1.0, &OutcomeThresholds::default()),
            Outcome::Vanishing
        );
    }

    #[test]
    fn incompatible_datum_is_projected() {
        let p = ModelParams::default();
        let s = FreeBoundaryState::single(0.0, 1.0, |_| 1.0, 20, &p).unwrap();
        assert_eq!(s.w[20], 0.0);
        assert_eq!(s.w[19], 0.5);
        let d = FreeBoundaryState::double(0.0, -1.0, 1.0, |_| 1.0, 20, &p).unwrap();
        assert_eq!((d.w[0], d.w[20]), (0.0, 0.0));
    }

    #[test]
    fn double_front_symmetry() {
        let p = ModelParams::new(0.4, 0.2, 1.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let c = CoefficientField::constant(1.0, 1.0);
        let bump = |x: f64| (PI * x / 4.0).cos().max(0.0);
        let s = FreeBoundaryState::double(0.0, -2.0, 2.0, bump, 100, &p).unwrap();
        let (_, end) =
            run_free_boundary(&s, &c, &p, &cfg(0.002, 1.0), &ProbeSpec::every(0.5)).unwrap();
        for ((_, h), (_, g)) in end.h_history.iter().zip(&end.g_history) {
            assert!((h + g).abs() < 1e-10);
        }
        assert!(end.h > 2.0);
    }

    #[test]
    fn collapse_is_reported() {
        let p = ModelParams::default();
        let c = CoefficientField::constant(1.0, 1.0);
        let s = FreeBoundaryState::single(0.0, 1.0, |x| 1.0 - x, 16, &p).unwrap();
        let tight = FrontConfig {
            collapse_factor: 1e3,
            ..cfg(0.001, 0.1)
        };
        let err = stefan_step(&s, &c, &p, &tight).unwrap_err();
        assert!(matches!(err.root(), Error::FrontCollapse { .. }));
    }
}
