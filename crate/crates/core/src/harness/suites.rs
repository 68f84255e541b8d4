//! Built-in scenario suites and the verification report.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::free_boundary::{run_free_boundary, FreeBoundaryState, FrontConfig};
use crate::grid::{make_grid, restrict_even, Grid, GridKind};
use crate::model_params::{
    check_hypotheses, derive_bounds, BoundSet, CoefficientField, HypothesisReport, ModelParams,
    SampleWindow,
};
use crate::series::{ProbeSpec, Target, TimeSeries};
use crate::stepper::{default_dt, run, Scheme, StepConfig, BLOWUP_FACTOR, DEFAULT_CFL_SAFETY};

use super::checks::{check_theorem_1_1, check_theorem_1_2, check_theorem_1_3, CheckTolerances};
use super::estimates::check_cross_chemical;
use super::periodic::solve_periodic_orbit;

/// One scenario's entry in a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub name: String,
    pub passed: bool,
    /// Whether the outcome counts toward the suite verdict. Negative controls
    /// are recorded only.
    pub asserted: bool,
    pub measured: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl ScenarioResult {
    pub fn new(name: impl Into<String>, asserted: bool) -> Self {
        Self {
            name: name.into(),
            passed: false,
            asserted,
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            note: None,
        }
    }

    fn measure(&mut self, key: &str, value: f64) -> &mut Self {
        self.measured.insert(key.to_string(), value);
        self
    }

    fn bound(&mut self, key: &str, value: Option<f64>) -> &mut Self {
        if let Some(v) = value {
            self.bounds.insert(key.to_string(), v);
        }
        self
    }

    fn tolerance(&mut self, key: &str, value: f64) -> &mut Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    fn failed_with(mut self, err: &Error) -> Self {
        self.passed = false;
        self.note = Some(err.to_string());
        self
    }
}

/// Merged outcome of a suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub scenarios: Vec<ScenarioResult>,
}

impl VerificationReport {
    pub fn aggregate(suite: impl Into<String>, seed: u64, scenarios: Vec<ScenarioResult>) -> Self {
        let passed = scenarios.iter().all(|s| s.passed || !s.asserted);
        Self {
            suite: suite.into(),
            seed,
            passed,
            scenarios,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[serde(rename = "theorem-1-1")]
    Theorem11,
    #[serde(rename = "theorem-1-2")]
    Theorem12,
    #[serde(rename = "theorem-1-3")]
    Theorem13,
    Estimates,
    Reflection,
    FreeBoundary,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Theorem11,
        Suite::Theorem12,
        Suite::Theorem13,
        Suite::Estimates,
        Suite::Reflection,
        Suite::FreeBoundary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Theorem11 => "theorem-1-1",
            Suite::Theorem12 => "theorem-1-2",
            Suite::Theorem13 => "theorem-1-3",
            Suite::Estimates => "estimates",
            Suite::Reflection => "reflection",
            Suite::FreeBoundary => "free-boundary",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown suite '{s}' (expected one of: {})",
                    names.join(", ")
                )
            })
    }
}

/// A run on a fixed half-line or whole-line grid.
#[derive(Clone, Debug)]
pub struct FixedScenario {
    pub name: String,
    pub params: ModelParams,
    pub coeffs: CoefficientField,
    pub grid: Grid,
    pub u0: Vec<f64>,
    pub t0: f64,
    pub t_end: f64,
    pub probe_interval: f64,
    /// Step size; chosen from the CFL bound when absent.
    pub dt: Option<f64>,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub clip_negative: bool,
    /// False for negative controls.
    pub asserted: bool,
}

/// Density level used to size the time step and the blowup ceiling.
pub fn density_ceiling(bounds: &BoundSet, u0_sup: f64, coeffs: &CoefficientField) -> f64 {
    bounds
        .C_u0
        .unwrap_or_else(|| 10.0 * u0_sup.max(coeffs.a_sup / coeffs.b_inf.max(1e-12)))
        .max(1e-12)
}

impl FixedScenario {
    pub fn new(
        name: impl Into<String>,
        params: ModelParams,
        coeffs: CoefficientField,
        grid: Grid,
        u0: impl Fn(f64) -> f64,
        t_end: f64,
    ) -> Self {
        let u0 = grid.sample(u0);
        Self {
            name: name.into(),
            params,
            coeffs,
            grid,
            u0,
            t0: 0.0,
            t_end,
            probe_interval: 0.1,
            dt: None,
            scheme: Scheme::Imex,
            cfl_safety: DEFAULT_CFL_SAFETY,
            clip_negative: true,
            asserted: true,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn negative_control(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn u0_sup(&self) -> f64 {
        self.u0.iter().copied().fold(0.0, f64::max)
    }

    pub fn constants(&self) -> (HypothesisReport, BoundSet) {
        (
            check_hypotheses(&self.params, &self.coeffs),
            derive_bounds(&self.params, &self.coeffs, self.u0_sup()),
        )
    }

    pub fn step_config(&self) -> StepConfig {
        let (_, bounds) = self.constants();
        let ceiling = density_ceiling(&bounds, self.u0_sup(), &self.coeffs);
        let dt = self.dt.unwrap_or_else(|| {
            default_dt(
                &self.grid,
                &self.params,
                ceiling,
                self.scheme,
                self.cfl_safety,
            )
        });
        StepConfig {
            scheme: self.scheme,
            cfl_safety: self.cfl_safety,
            clip_negative: self.clip_negative,
            ..StepConfig::new(dt, self.t0, self.t_end).with_ceiling(BLOWUP_FACTOR * ceiling)
        }
    }

    pub fn run(&self, target: Option<Target>) -> Result<TimeSeries> {
        let mut probes = ProbeSpec::every(self.probe_interval);
        probes.target = target;
        run(
            &self.grid,
            &self.u0,
            &self.coeffs,
            &self.params,
            &self.step_config(),
            &probes,
        )
    }
}

fn half_line() -> Grid {
    make_grid(GridKind::HalfLine, 40.0, 400).expect("valid grid")
}

fn params(chi1: f64, mu1: f64, l1: f64, chi2: f64, mu2: f64, l2: f64) -> ModelParams {
    ModelParams::new(chi1, chi2, l1, l2, mu1, mu2, 1.0).expect("valid parameters")
}

fn window(t_end: f64, x_max: f64) -> SampleWindow {
    SampleWindow::new(0.0, t_end, 501, 0.0, x_max, 401)
}

/// Global-bound scenarios: five (H1) configurations, zero data and one
/// negative control.
pub fn theorem_1_1_scenarios() -> Vec<FixedScenario> {
    let t_end = 50.0;
    let m1 = params(1.0, 1.0, 2.0, 1.0, 2.0, 1.0);
    let repulsive = params(0.5, 1.0, 1.0, 1.0, 1.0, 2.0);
    let limsup_m1 = 1.0 / (5.0 + 2.0 - 1.0 - 1.0);
    let varying = CoefficientField::sampled(
        |t, x| 1.0 + 0.3 * t.sin() * (x / 3.0).cos(),
        |_, x| 1.2 + 0.2 * (-(x - 10.0).powi(2) / 8.0).exp(),
        &window(t_end, 40.0),
        None,
    )
    .expect("finite coefficients");
    vec![
        FixedScenario::new(
            "pure-logistic",
            ModelParams::default(),
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |_| 2.0,
            t_end,
        ),
        FixedScenario::new(
            "imbalance-m1",
            m1,
            CoefficientField::constant(1.0, 5.0),
            half_line(),
            |x| 0.1 + 0.5 * (-(x - 10.0).powi(2) / 4.0).exp(),
            t_end,
        ),
        FixedScenario::new(
            "imbalance-m1-above-limsup",
            m1,
            CoefficientField::constant(1.0, 5.0),
            half_line(),
            move |_| 2.0 * limsup_m1,
            t_end,
        ),
        FixedScenario::new(
            "attraction",
            params(0.5, 1.0, 1.0, 0.0, 0.0, 1.0),
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |x| 1.0 + 0.8 * x.cos() * (-x * x / 50.0).exp(),
            t_end,
        ),
        FixedScenario::new(
            "repulsion-dominant",
            repulsive,
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |x| 0.5 + 1.5 * (-(x - 5.0).powi(2)).exp(),
            t_end,
        ),
        FixedScenario::new(
            "space-time-coefficients",
            params(0.4, 1.0, 1.0, 0.0, 0.0, 1.0),
            varying,
            half_line(),
            |x| 0.3 + (-(x - 20.0).powi(2) / 10.0).exp(),
            t_end,
        ),
        FixedScenario::new(
            "zero-datum",
            params(0.4, 1.0, 1.0, 0.0, 0.0, 1.0),
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |_| 0.0,
            t_end,
        ),
        FixedScenario::new(
            "strong-attraction",
            params(2.0, 1.0, 1.0, 0.0, 0.0, 1.0),
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |x| 1.0 + 0.2 * (-(x - 10.0).powi(2)).exp(),
            10.0,
        )
        .negative_control(),
    ]
}

/// Persistence scenarios satisfying (H2) with positive initial data.
pub fn theorem_1_2_scenarios() -> Vec<FixedScenario> {
    let t_end = 50.0;
    let weak = params(0.2, 1.0, 1.0, 0.0, 0.0, 1.0);
    let bounds = derive_bounds(&weak, &CoefficientField::constant(1.0, 1.0), 1.0);
    let (m0, big_m0) = (bounds.m0.expect("H2 holds"), bounds.M0.expect("H1 holds"));
    let seasonal = CoefficientField::time_only(
        |t| 1.0 + 0.2 * (2.0 * PI * t / 5.0).sin(),
        |_| 1.0,
        &window(5.0, 0.0),
        Some(5.0),
    )
    .expect("periodic coefficients");
    vec![
        FixedScenario::new(
            "pure-logistic",
            ModelParams::default(),
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            |x| 1.6 + 1.4 * (x / 2.0).cos(),
            t_end,
        ),
        FixedScenario::new(
            "rise-from-below",
            weak,
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            move |_| m0 / 10.0,
            t_end,
        ),
        FixedScenario::new(
            "fall-from-above",
            weak,
            CoefficientField::constant(1.0, 1.0),
            half_line(),
            move |_| 2.0 * big_m0,
            t_end,
        ),
        FixedScenario::new(
            "seasonal-growth",
            params(0.1, 1.0, 1.0, 0.0, 0.0, 1.0),
            seasonal,
            half_line(),
            |x| 0.5 + 0.4 * (-(x - 8.0).powi(2) / 6.0).exp(),
            t_end,
        ),
    ]
}

/// `a(t) = 1 + 0.5 sin 2πt`, `b ≡ 1`.
pub fn sinusoidal_growth() -> CoefficientField {
    CoefficientField::time_only(
        |t| 1.0 + 0.5 * (2.0 * PI * t).sin(),
        |_| 1.0,
        &window(1.0, 0.0),
        Some(1.0),
    )
    .expect("periodic coefficients")
}

fn constant_periodic(a: f64, b: f64) -> CoefficientField {
    CoefficientField::time_only(move |_| a, move |_| b, &window(1.0, 0.0), Some(1.0))
        .expect("periodic coefficients")
}

/// Step used by the convergence scenarios.
pub const CONVERGENCE_DT: f64 = 0.005;

/// Convergence scenarios: three positive data under (H3) with
/// `χ₁μ₁ = 0.3`, plus logistic, margin and negative-control cases.
pub fn theorem_1_3_scenarios() -> Vec<FixedScenario> {
    let t_end = 40.0;
    let p = params(0.3, 1.0, 1.0, 0.0, 0.0, 1.0);
    let strong = params(1.0, 1.0, 1.0, 0.0, 0.0, 1.0);
    let fixed = |name: &str, p: ModelParams, c: CoefficientField, u0: fn(f64) -> f64| {
        FixedScenario::new(name, p, c, half_line(), u0, t_end).with_dt(CONVERGENCE_DT)
    };
    vec![
        fixed("sinusoidal-bump", p, sinusoidal_growth(), |x| {
            1.0 + 0.5 * x.cos() * (-x * x / 20.0).exp()
        }),
        fixed("sinusoidal-low", p, sinusoidal_growth(), |x| {
            0.6 + 0.3 * (x / 3.0).sin().powi(2)
        }),
        fixed("sinusoidal-high", p, sinusoidal_growth(), |x| {
            1.5 + 0.5 * (-(x - 10.0).powi(2)).exp()
        }),
        fixed(
            "logistic",
            ModelParams::default(),
            constant_periodic(1.0, 1.0),
            |x| 1.0 + 0.5 * x.cos() * (-x * x).exp(),
        ),
        fixed("margin-one", strong, constant_periodic(1.0, 3.0), |x| {
            0.4 + 0.1 * (-(x - 5.0).powi(2)).exp()
        }),
        fixed(
            "below-threshold",
            strong,
            constant_periodic(1.0, 1.9),
            |x| 0.5 + 0.1 * (-(x - 5.0).powi(2)).exp(),
        )
        .negative_control(),
    ]
}

fn check_global(sc: &FixedScenario, tol: &CheckTolerances) -> ScenarioResult {
    let mut out = ScenarioResult::new(&sc.name, sc.asserted);
    let (hyp, bounds) = sc.constants();
    out.bound("C_u0", bounds.C_u0)
        .bound("limsup_bound", bounds.limsup_bound)
        .tolerance("rel_tol", tol.rel_tol);
    let series = match sc.run(None) {
        Ok(s) => s,
        Err(e) => return out.failed_with(&e),
    };
    let r = check_theorem_1_1(&series, &hyp, &bounds, tol);
    out.measure("max_sup_u", r.max_sup_u)
        .measure("final_sup_u", r.final_sup_u)
        .measure("relative_clip_mass", series.relative_clip_mass());
    if let Some(gap) = r.observed_gap {
        out.measure("observed_gap", gap);
    }
    out.passed = r.passed;
    out.note = r.failure;
    out
}

fn check_corridor(sc: &FixedScenario, tol: &CheckTolerances) -> ScenarioResult {
    let mut out = ScenarioResult::new(&sc.name, sc.asserted);
    let (hyp, bounds) = sc.constants();
    out.bound("m0", bounds.m0)
        .bound("M0", bounds.M0)
        .tolerance("rel_tol", tol.rel_tol);
    let series = match sc.run(None) {
        Ok(s) => s,
        Err(e) => return out.failed_with(&e),
    };
    let r = check_theorem_1_2(&series, &hyp, &bounds, tol);
    out.measure("relative_clip_mass", series.relative_clip_mass());
    if let Some(t) = r.entry_time {
        out.measure("entry_time", t);
    }
    if let Some(v) = r.min_inf_after_entry {
        out.measure("min_inf_after_entry", v);
    }
    if let Some(v) = r.max_sup_after_entry {
        out.measure("max_sup_after_entry", v);
    }
    out.passed = r.passed;
    out.note = r.failure;
    out
}

fn check_convergence(sc: &FixedScenario, tol: &CheckTolerances) -> ScenarioResult {
    let mut out = ScenarioResult::new(&sc.name, sc.asserted);
    let (hyp, bounds) = sc.constants();
    out.bound("rho", bounds.rho)
        .tolerance("conv_tol", tol.conv_tol)
        .tolerance("envelope_slack", tol.envelope_slack);
    let orbit = match solve_periodic_orbit(&sc.coeffs) {
        Ok(o) => o,
        Err(e) => return out.failed_with(&e),
    };
    let series = match sc.run(Some(orbit.as_target())) {
        Ok(s) => s,
        Err(e) => return out.failed_with(&e),
    };
    let r = check_theorem_1_3(
        &series,
        &hyp,
        &bounds,
        &orbit,
        sc.coeffs.is_time_only(),
        tol,
    );
    out.measure("final_error", r.final_error)
        .measure("relative_clip_mass", series.relative_clip_mass());
    if let Some(m) = r.max_ratio {
        out.measure("max_plateau_ratio", m);
    }
    out.passed = r.passed;
    out.note = r.failure;
    out
}

/// Run every scenario in parallel, keeping input order.
fn fan_out<T: Sync>(
    items: &[T],
    f: impl Fn(&T) -> ScenarioResult + Sync + Send,
) -> Vec<ScenarioResult> {
    items.par_iter().map(f).collect()
}

/// Random nonnegative density with `‖u‖∞ ≤ c0`: a floor plus Gaussian bumps,
/// or piecewise-constant steps.
pub fn random_density(rng: &mut ChaCha8Rng, grid: &Grid, c0: f64) -> Vec<f64> {
    let mut u: Vec<f64> = if rng.gen_bool(0.5) {
        let base = rng.gen_range(0.0..0.5);
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..5))
            .map(|_| {
                (
                    rng.gen_range(grid.x_min..grid.x_max),
                    rng.gen_range(0.2..5.0),
                    rng.gen_range(0.0..1.0),
                )
            })
            .collect();
        grid.sample(|x| {
            base + bumps
                .iter()
                .map(|(c, w, h)| h * (-(x - c).powi(2) / (w * w)).exp())
                .sum::<f64>()
        })
    } else {
        let levels: Vec<f64> = (0..8).map(|_| rng.gen_range(0.0..1.0)).collect();
        let span = grid.x_max - grid.x_min;
        grid.sample(|x| levels[(((x - grid.x_min) / span * 8.0) as usize).min(7)])
    };
    let sup = u.iter().copied().fold(0.0, f64::max);
    if sup > 0.0 {
        let scale = c0 * rng.gen_range(0.1..1.0) / sup;
        u.iter_mut().for_each(|v| *v *= scale);
    }
    u
}

/// Random admissible parameters with at least one nonzero sensitivity.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    ModelParams::new(
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.0..2.0),
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.2..5.0),
        rng.gen_range(0.0..3.0),
        rng.gen_range(0.0..3.0),
        1.0,
    )
    .expect("valid parameters")
}

/// Cross-chemical estimates on `count` seeded random densities and
/// parameter sets.
pub fn estimates_suite(seed: u64, count: usize) -> Vec<ScenarioResult> {
    let grid = make_grid(GridKind::HalfLine, 20.0, 200).expect("valid grid");
    type Case = (ModelParams, Vec<f64>, f64);
    let cases: Vec<Case> = {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                let p = random_params(&mut rng);
                let c0 = rng.gen_range(0.1..5.0);
                (p, random_density(&mut rng, &grid, c0), c0)
            })
            .collect()
    };
    let indexed: Vec<(usize, &Case)> = cases.iter().enumerate().collect();
    fan_out(&indexed, |(i, (p, u, c0))| {
        let mut out = ScenarioResult::new(format!("density-{i}"), true);
        match check_cross_chemical(&grid, u, p, *c0) {
            Ok(r) => {
                out.measure("signed_max", r.signed_max)
                    .measure("abs_max", r.abs_max)
                    .bound("signed_bound", Some(r.signed_bound))
                    .bound("abs_bound", Some(r.abs_bound))
                    .tolerance("tol", r.tol);
                out.passed = r.passed;
                out
            }
            Err(e) => out.failed_with(&e),
        }
    })
}

/// Whole-line run with even data against the half-line run, compared on
/// `x ≥ 0` at `t_end`.
pub fn reflection_scenario(
    name: &str,
    p: ModelParams,
    coeffs: CoefficientField,
    x_max: f64,
    half_cells: usize,
    u0: impl Fn(f64) -> f64,
    t_end: f64,
) -> ScenarioResult {
    let mut out = ScenarioResult::new(name, true);
    out.tolerance("max_error", 1e-3);
    let result = (|| -> Result<f64> {
        let half = make_grid(GridKind::HalfLine, x_max, half_cells)?;
        let whole = half.mirrored()?;
        let wh = FixedScenario::new(name, p, coeffs.clone(), whole, &u0, t_end);
        let hl = FixedScenario::new(name, p, coeffs.clone(), half, &u0, t_end);
        // one step size for both runs
        let dt = wh.step_config().dt.min(hl.step_config().dt);
        let (wh, hl) = (wh.with_dt(dt), hl.with_dt(dt));
        let (sw, sh) = (wh.run(None)?, hl.run(None)?);
        let (_, restricted) = restrict_even(&wh.grid, &sw.final_state)?;
        Ok(restricted
            .u
            .iter()
            .zip(&sh.final_state.u)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    })();
    match result {
        Ok(err) => {
            out.measure("max_error", err);
            out.passed = err <= 1e-3;
            out
        }
        Err(e) => out.failed_with(&e),
    }
}

fn even_bumps(x: f64) -> f64 {
    0.4 + 0.8 * (-x * x / 4.0).exp() + 0.3 * (-(x.abs() - 8.0).powi(2) / 2.0).exp()
}

pub fn reflection_suite() -> Vec<ScenarioResult> {
    let even_coeffs = CoefficientField::sampled(
        |t, x| 1.0 + 0.3 * (t).sin() * (-x * x / 20.0).exp(),
        |_, x| 1.0 + 0.1 * (x / 4.0).cos(),
        &SampleWindow::new(0.0, 10.0, 101, -20.0, 20.0, 401),
        None,
    )
    .expect("finite coefficients");
    vec![
        reflection_scenario(
            "attraction",
            params(0.5, 1.0, 1.0, 0.0, 0.0, 1.0),
            CoefficientField::constant(1.0, 1.0),
            20.0,
            200,
            even_bumps,
            10.0,
        ),
        reflection_scenario(
            "attraction-repulsion",
            params(0.8, 1.0, 1.0, 0.5, 1.0, 2.0),
            even_coeffs,
            20.0,
            200,
            even_bumps,
            10.0,
        ),
    ]
}

/// Largest decrease of a front trajectory (zero when monotone).
fn worst_decrease(history: &[(f64, f64)], sign: f64) -> f64 {
    history
        .windows(2)
        .map(|w| sign * (w[0].1 - w[1].1))
        .fold(0.0, f64::max)
}

/// Monotone fronts on one free-boundary run.
pub fn front_monotonicity(
    name: &str,
    initial: FreeBoundaryState,
    coeffs: &CoefficientField,
    p: &ModelParams,
    t_end: f64,
) -> ScenarioResult {
    let mut out = ScenarioResult::new(name, true);
    let dt = initial.default_dt(
        p,
        10.0 * initial.sup_u().max(1.0),
        Scheme::Imex,
        DEFAULT_CFL_SAFETY,
    );
    let cfg = FrontConfig::new(StepConfig::new(dt, initial.t, t_end));
    match run_free_boundary(&initial, coeffs, p, &cfg, &ProbeSpec::every(0.5)) {
        Ok((series, fin)) => {
            let dh = worst_decrease(&fin.h_history, 1.0);
            let dg = worst_decrease(&fin.g_history, -1.0);
            out.measure("h_final", fin.h)
                .measure("width_final", fin.width())
                .measure("h_max_decrease", dh)
                .measure("g_max_increase", dg)
                .measure("relative_clip_mass", series.relative_clip_mass());
            out.passed = dh == 0.0 && dg == 0.0;
            out
        }
        Err(e) => out.failed_with(&e),
    }
}

/// Free-boundary interior against a half-line run with the same data, on
/// `[0, h0/2]` at time `t_end`.
pub fn front_consistency(h0: f64, n_cells: usize, t_end: f64) -> ScenarioResult {
    let mut out = ScenarioResult::new("interior-consistency", true);
    out.tolerance("max_error", 1e-3);
    let result = (|| -> Result<(f64, f64)> {
        let p = params(0.3, 1.0, 1.0, 0.0, 0.0, 1.0);
        let coeffs = CoefficientField::constant(1.0, 1.0);
        let taper = move |x: f64| {
            let s = ((h0 - x) / 2.0).clamp(0.0, 1.0);
            s * s * (3.0 - 2.0 * s)
        };
        let fb = FreeBoundaryState::single(0.0, h0, taper, n_cells, &p)?;
        let grid = make_grid(GridKind::HalfLine, h0, n_cells)?;
        let fixed = FixedScenario::new("half-line", p, coeffs.clone(), grid, taper, t_end);
        let dt = fb
            .default_dt(&p, 2.0, Scheme::Imex, DEFAULT_CFL_SAFETY)
            .min(fixed.step_config().dt);
        let fixed = fixed.with_dt(dt);
        let series = fixed.run(None)?;
        let cfg = FrontConfig::new(StepConfig::new(dt, 0.0, t_end));
        let (_, fin) = run_free_boundary(&fb, &coeffs, &p, &cfg, &ProbeSpec::every(t_end))?;
        let err = (0..=n_cells)
            .map(|i| fixed.grid.x(i))
            .take_while(|&x| x <= 0.5 * h0 + 1e-12)
            .zip(&series.final_state.u)
            .map(|(x, &u)| (fin.density_at(x) - u).abs())
            .fold(0.0, f64::max);
        Ok((err, fin.h - h0))
    })();
    match result {
        Ok((err, moved)) => {
            out.measure("max_error", err)
                .measure("front_displacement", moved);
            out.passed = err <= 1e-3;
            out
        }
        Err(e) => out.failed_with(&e),
    }
}

/// Symmetric double-front run: `|g + h|` over the run.
pub fn front_symmetry(h0: f64, n_cells: usize, t_end: f64) -> ScenarioResult {
    let mut out = ScenarioResult::new("double-front-symmetry", true);
    out.tolerance("max_asymmetry", 1e-8);
    let result = (|| -> Result<f64> {
        let p = params(0.4, 1.0, 1.0, 0.2, 1.0, 2.0);
        let coeffs = CoefficientField::sampled(
            |t, x| 1.0 + 0.2 * t.cos() * (-x * x).exp(),
            |_, _| 1.0,
            &SampleWindow::new(0.0, t_end, 101, -10.0, 10.0, 201),
            None,
        )?;
        let fb = FreeBoundaryState::double(
            0.0,
            -h0,
            h0,
            move |x| (PI * x / (2.0 * h0)).cos(),
            n_cells,
            &p,
        )?;
        let dt = fb.default_dt(&p, 10.0, Scheme::Imex, DEFAULT_CFL_SAFETY);
        let cfg = FrontConfig::new(StepConfig::new(dt, 0.0, t_end));
        let (_, fin) = run_free_boundary(&fb, &coeffs, &p, &cfg, &ProbeSpec::every(0.5))?;
        Ok(fin
            .h_history
            .iter()
            .zip(&fin.g_history)
            .map(|((_, h), (_, g))| (h + g).abs())
            .fold(0.0, f64::max))
    })();
    match result {
        Ok(asym) => {
            out.measure("max_asymmetry", asym);
            out.passed = asym <= 1e-8;
            out
        }
        Err(e) => out.failed_with(&e),
    }
}

pub fn free_boundary_suite() -> Vec<ScenarioResult> {
    let p = params(0.3, 1.0, 1.0, 0.0, 0.0, 1.0);
    let logistic = CoefficientField::constant(1.0, 1.0);
    let mono = |name: &str, init: Result<FreeBoundaryState>, t_end: f64| match init {
        Ok(s) => front_monotonicity(name, s, &logistic, &p, t_end),
        Err(e) => ScenarioResult::new(name, true).failed_with(&e),
    };
    let mut out = vec![
        mono(
            "single-cosine",
            FreeBoundaryState::single(0.0, 2.0, |x| (PI * x / 4.0).cos(), 100, &p),
            10.0,
        ),
        mono(
            "single-small",
            FreeBoundaryState::single(0.0, 0.5, |x| 1e-3 * (PI * x).cos(), 100, &p),
            10.0,
        ),
        mono(
            "double-offset",
            FreeBoundaryState::double(0.0, -1.0, 2.0, |x| (PI * (x - 0.5) / 3.0).cos(), 100, &p),
            10.0,
        ),
    ];
    out.push(front_consistency(20.0, 400, 0.5));
    out.push(front_symmetry(2.0, 100, 10.0));
    out
}

/// Run a built-in suite.
pub fn run_suite(suite: Suite, seed: u64, tol: &CheckTolerances) -> VerificationReport {
    let scenarios = match suite {
        Suite::Theorem11 => fan_out(&theorem_1_1_scenarios(), |s| check_global(s, tol)),
        Suite::Theorem12 => fan_out(&theorem_1_2_scenarios(), |s| check_corridor(s, tol)),
        Suite::Theorem13 => fan_out(&theorem_1_3_scenarios(), |s| check_convergence(s, tol)),
        Suite::Estimates => estimates_suite(seed, 200),
        Suite::Reflection => reflection_suite(),
        Suite::FreeBoundary => free_boundary_suite(),
    };
    VerificationReport::aggregate(suite.name(), seed, scenarios)
}

/// Run one theorem check on a single scenario.
pub fn check_scenario(
    suite: Suite,
    sc: &FixedScenario,
    tol: &CheckTolerances,
) -> Result<ScenarioResult> {
    match suite {
        Suite::Theorem11 => Ok(check_global(sc, tol)),
        Suite::Theorem12 => Ok(check_corridor(sc, tol)),
        Suite::Theorem13 => Ok(check_convergence(sc, tol)),
        other => Err(Error::InvalidParameter {
            name: "suite",
            reason: format!("suite '{other}' does not apply to a single configured run"),
        }),
    }
}
