//! TOML run configuration.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::free_boundary::{OutcomeThresholds, DEFAULT_COLLAPSE_FACTOR};
use crate::grid::{make_grid, Grid, GridKind};
use crate::harness::CheckTolerances;
use crate::model_params::{CoefFn, CoefficientField, ModelParams, SampleWindow};
use crate::stepper::{Scheme, DEFAULT_CFL_SAFETY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    HalfLine,
    WholeLine,
    FreeBoundarySingle,
    FreeBoundaryDouble,
}

impl Problem {
    pub fn is_free_boundary(self) -> bool {
        matches!(
            self,
            Problem::FreeBoundarySingle | Problem::FreeBoundaryDouble
        )
    }
}

/// A built-in coefficient family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefSpec {
    Constant {
        value: f64,
    },
    /// `mean + amplitude·sin(2πt/period + phase)`.
    SinusoidalT {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `base + height·exp(−(x − center)²/width²)`.
    GaussianBumpX {
        base: f64,
        height: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `(mean + amplitude·sin(2πt/period + phase))·(1 + height·exp(−(x − center)²/width²))`.
    Product {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
        height: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
}

impl Default for CoefSpec {
    fn default() -> Self {
        CoefSpec::Constant { value: 1.0 }
    }
}

impl CoefSpec {
    pub fn function(&self) -> CoefFn {
        match *self {
            CoefSpec::Constant { value } => Arc::new(move |_, _| value),
            CoefSpec::SinusoidalT {
                mean,
                amplitude,
                period,
                phase,
            } => Arc::new(move |t, _| mean + amplitude * (2.0 * PI * t / period + phase).sin()),
            CoefSpec::GaussianBumpX {
                base,
                height,
                center,
                width,
            } => Arc::new(move |_, x| base + height * (-((x - center) / width).powi(2)).exp()),
            CoefSpec::Product {
                mean,
                amplitude,
                period,
                phase,
                height,
                center,
                width,
            } => Arc::new(move |t, x| {
                (mean + amplitude * (2.0 * PI * t / period + phase).sin())
                    * (1.0 + height * (-((x - center) / width).powi(2)).exp())
            }),
        }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            CoefSpec::SinusoidalT { period, .. } | CoefSpec::Product { period, .. } => Some(period),
            _ => None,
        }
    }

    pub fn is_time_only(&self) -> bool {
        matches!(
            self,
            CoefSpec::Constant { .. } | CoefSpec::SinusoidalT { .. }
        )
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err((name, format!("must be positive and finite, got {v}")))
            }
        };
        match *self {
            CoefSpec::Constant { value } if !value.is_finite() => {
                Err(("value", format!("must be finite, got {value}")))
            }
            CoefSpec::SinusoidalT { period, .. } => positive("period", period),
            CoefSpec::GaussianBumpX { width, .. } => positive("width", width),
            CoefSpec::Product { period, width, .. } => {
                positive("period", period)?;
                positive("width", width)
            }
            _ => Ok(()),
        }
    }
}

/// Common period of two coefficient specs, when one exists.
fn joint_period(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (None, p) | (p, None) => p,
        (Some(p), Some(q)) => {
            let (lo, hi) = (p.min(q), p.max(q));
            let ratio = hi / lo;
            ((ratio - ratio.round()).abs() < 1e-9).then_some(hi)
        }
    }
}

/// A built-in initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    Constant {
        value: f64,
    },
    /// `base + height·exp(−(x − center)²/width²)`.
    Gaussian {
        #[serde(default)]
        base: f64,
        height: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// `height·cos(π(x − center)/(2·half_width))` on `|x − center| < half_width`,
    /// zero elsewhere.
    CosineBump {
        height: f64,
        #[serde(default)]
        center: f64,
        half_width: f64,
    },
    /// `values[k]` on `[breaks[k−1], breaks[k])`.
    Piecewise {
        breaks: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Constant { value: 1.0 }
    }
}

impl InitialSpec {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            InitialSpec::Constant { value } => *value,
            InitialSpec::Gaussian {
                base,
                height,
                center,
                width,
            } => base + height * (-((x - center) / width).powi(2)).exp(),
            InitialSpec::CosineBump {
                height,
                center,
                half_width,
            } => {
                let s = (x - center) / half_width;
                if s.abs() < 1.0 {
                    height * (0.5 * PI * s).cos()
                } else {
                    0.0
                }
            }
            InitialSpec::Piecewise { breaks, values } => {
                let k = breaks.iter().take_while(|&&b| x >= b).count();
                values[k]
            }
        }
    }

    /// `(inf, sup)` of the datum over the nodes of `grid`.
    pub fn extrema(&self, grid: &Grid) -> (f64, f64) {
        grid.sample(|x| self.value(x))
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    fn validate(&self) -> Result<(), (&'static str, String)> {
        match self {
            InitialSpec::Constant { value } if !(*value >= 0.0 && value.is_finite()) => {
                Err(("value", format!("must be nonnegative, got {value}")))
            }
            InitialSpec::Gaussian {
                base,
                height,
                width,
                ..
            } => {
                if !(*width > 0.0) {
                    Err(("width", format!("must be positive, got {width}")))
                } else if *base < 0.0 || base + height.min(0.0) < 0.0 {
                    Err(("height", "datum must be nonnegative".into()))
                } else {
                    Ok(())
                }
            }
            InitialSpec::CosineBump {
                height, half_width, ..
            } => {
                if !(*half_width > 0.0) {
                    Err(("half_width", format!("must be positive, got {half_width}")))
                } else if *height < 0.0 {
                    Err(("height", format!("must be nonnegative, got {height}")))
                } else {
                    Ok(())
                }
            }
            InitialSpec::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    Err((
                        "values",
                        format!(
                            "expected {} values for {} breaks, got {}",
                            breaks.len() + 1,
                            breaks.len(),
                            values.len()
                        ),
                    ))
                } else if breaks.windows(2).any(|w| w[1] <= w[0]) {
                    Err(("breaks", "must be strictly increasing".into()))
                } else if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                    Err(("values", "must be nonnegative".into()))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n_cells: usize,
    /// Right end of the half line, or half-width of the whole line.
    pub x_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_cells: 400,
            x_max: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepSpec {
    /// Step size; chosen from the CFL bound when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    pub clip_negative: bool,
}

impl Default for StepSpec {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: 10.0,
            scheme: Scheme::Imex,
            cfl_safety: DEFAULT_CFL_SAFETY,
            clip_negative: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrontSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    /// Left front for two-front problems; `−h0` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    pub collapse_factor: f64,
}

impl Default for FrontSpec {
    fn default() -> Self {
        Self {
            h0: None,
            g0: None,
            collapse_factor: DEFAULT_COLLAPSE_FACTOR,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    #[default]
    None,
    /// The positive periodic solution of the logistic ODE.
    PeriodicOrbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub interval: f64,
    pub target: TargetKind,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            interval: 0.1,
            target: TargetKind::None,
        }
    }
}

/// Parameter grid of the free-boundary sweep: initial fronts `h0` and
/// cosine-bump heights `amplitude`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub h0: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            h0: vec![0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
            amplitude: vec![0.01, 0.1, 1.0],
        }
    }
}

/// Output file names, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: String,
    pub series: String,
    pub report: String,
    pub phase_table: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: ".".into(),
            series: "series.csv".into(),
            report: "report.json".into(),
            phase_table: "phase.csv".into(),
        }
    }
}

/// Everything needed to reproduce one run, check or sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub t0: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ModelParams,
    /// Growth rate `a(t, x)`.
    #[serde(default)]
    pub growth: CoefSpec,
    /// Self-limitation rate `b(t, x)`.
    #[serde(default)]
    pub limitation: CoefSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub step: StepSpec,
    #[serde(default)]
    pub front: FrontSpec,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default)]
    pub checks: CheckTolerances,
    #[serde(default)]
    pub outcome: OutcomeThresholds,
    #[serde(default)]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A configuration error with its position in the source text when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Line of `key` inside `[section]` (top level when `section` is empty),
/// falling back to the section header.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

fn invalid(text: &str, section: &str, key: &str, message: impl fmt::Display) -> ConfigError {
    let path = if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    };
    ConfigError {
        line: locate(text, section, key),
        column: None,
        message: format!("invalid `{path}`: {message}"),
    }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let (l, c) = line_col(text, span.start);
                (Some(l), Some(c))
            }
            None => (None, None),
        };
        ConfigError {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    cfg.validate(text)?;
    Ok(cfg)
}

impl RunConfig {
    /// Serialize back to TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    fn validate(&self, text: &str) -> Result<(), ConfigError> {
        if let Err(Error::InvalidParameter { name, reason }) = self.params.validate() {
            return Err(invalid(text, "params", name, reason));
        }
        if !self.t0.is_finite() {
            return Err(invalid(text, "", "t0", "must be finite"));
        }
        if !(self.step.t_end > self.t0) {
            return Err(invalid(
                text,
                "step",
                "t_end",
                format!("must exceed t0 = {}", self.t0),
            ));
        }
        if let Some(dt) = self.step.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid(
                    text,
                    "step",
                    "dt",
                    format!("must be positive, got {dt}"),
                ));
            }
        }
        if !(self.step.cfl_safety > 0.0 && self.step.cfl_safety <= 1.0) {
            return Err(invalid(text, "step", "cfl_safety", "must lie in (0, 1]"));
        }
        if self.grid.n_cells < 8 {
            return Err(invalid(text, "grid", "n_cells", "must be at least 8"));
        }
        if !(self.grid.x_max > 0.0 && self.grid.x_max.is_finite()) {
            return Err(invalid(text, "grid", "x_max", "must be positive"));
        }
        if !(self.probes.interval > 0.0) {
            return Err(invalid(text, "probes", "interval", "must be positive"));
        }
        if let Err((key, msg)) = self.growth.validate() {
            return Err(invalid(text, "growth", key, msg));
        }
        if let Err((key, msg)) = self.limitation.validate() {
            return Err(invalid(text, "limitation", key, msg));
        }
        if let Err((key, msg)) = self.initial.validate() {
            return Err(invalid(text, "initial", key, msg));
        }
        if self.problem.is_free_boundary() {
            let Some(h0) = self.front.h0 else {
                return Err(invalid(
                    text,
                    "front",
                    "h0",
                    "required for free-boundary problems",
                ));
            };
            if !(h0 > 0.0 && h0.is_finite()) {
                return Err(invalid(
                    text,
                    "front",
                    "h0",
                    format!("must be positive, got {h0}"),
                ));
            }
            if let Some(g0) = self.front.g0 {
                if self.problem == Problem::FreeBoundarySingle {
                    return Err(invalid(
                        text,
                        "front",
                        "g0",
                        "only used by free_boundary_double",
                    ));
                }
                if !(g0 < h0) {
                    return Err(invalid(
                        text,
                        "front",
                        "g0",
                        format!("must lie below h0 = {h0}"),
                    ));
                }
            }
            if !(self.front.collapse_factor > 0.0) {
                return Err(invalid(
                    text,
                    "front",
                    "collapse_factor",
                    "must be positive",
                ));
            }
        }
        if self.sweep.h0.iter().any(|&h| !(h > 0.0)) {
            return Err(invalid(text, "sweep", "h0", "entries must be positive"));
        }
        if self.sweep.amplitude.iter().any(|&a| !(a >= 0.0)) {
            return Err(invalid(
                text,
                "sweep",
                "amplitude",
                "entries must be nonnegative",
            ));
        }
        if self.probes.target == TargetKind::PeriodicOrbit
            && !(self.growth.is_time_only() && self.limitation.is_time_only())
        {
            return Err(invalid(
                text,
                "probes",
                "target",
                "periodic_orbit needs coefficients in t only",
            ));
        }
        if let Err(e) = self.coefficients() {
            return Err(invalid(text, "growth", "kind", e));
        }
        Ok(())
    }

    /// Left front of a free-boundary problem.
    pub fn g0(&self) -> f64 {
        match self.problem {
            Problem::FreeBoundaryDouble => self.front.g0.unwrap_or(-self.front.h0.unwrap_or(1.0)),
            _ => 0.0,
        }
    }

    /// Grid of a fixed-domain problem.
    pub fn grid(&self) -> crate::Result<Grid> {
        match self.problem {
            Problem::HalfLine => make_grid(GridKind::HalfLine, self.grid.x_max, self.grid.n_cells),
            Problem::WholeLine => {
                make_grid(GridKind::WholeLine, self.grid.x_max, self.grid.n_cells)
            }
            _ => Err(Error::InvalidGrid(
                "free-boundary problems use a moving reference grid".into(),
            )),
        }
    }

    /// `(inf, sup)` of the initial datum on the initial domain.
    pub fn initial_extrema(&self) -> crate::Result<(f64, f64)> {
        if self.problem.is_free_boundary() {
            let (g0, h0) = (self.g0(), self.front.h0.unwrap_or(1.0));
            let unit = make_grid(GridKind::ReferenceUnit, 1.0, self.grid.n_cells)?;
            Ok(unit
                .sample(|xi| self.initial.value(g0 + xi * (h0 - g0)))
                .into_iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                }))
        } else {
            Ok(self.initial.extrema(&self.grid()?))
        }
    }

    /// Coefficient field with extrema sampled over `[t0, t_end]` and the
    /// spatial window of the problem.
    pub fn coefficients(&self) -> crate::Result<CoefficientField> {
        let (x_lo, x_hi) = match self.problem {
            Problem::HalfLine => (0.0, self.grid.x_max),
            _ => (-self.grid.x_max, self.grid.x_max),
        };
        let nx = 2 * self.grid.n_cells.max(200) + 1;
        let window = SampleWindow::new(self.t0, self.step.t_end, 501, x_lo, x_hi, nx);
        let time_only = self.growth.is_time_only() && self.limitation.is_time_only();
        let both_constant = matches!(
            (&self.growth, &self.limitation),
            (CoefSpec::Constant { .. }, CoefSpec::Constant { .. })
        );
        // constants are periodic with any period; 1 keeps the orbit solver cheap
        let period = joint_period(self.growth.period(), self.limitation.period())
            .or(both_constant.then_some(1.0));
        CoefficientField::from_shared(
            self.growth.function(),
            self.limitation.function(),
            &window,
            period,
            time_only,
        )
    }
}
