//! Configuration files, command-line driver, and serialization of series and
//! reports.

mod config;
mod output;

pub use config::{
    parse_config, CoefSpec, ConfigError, FrontSpec, GridSpec, InitialSpec, OutputSpec, ProbeConfig,
    Problem, RunConfig, StepSpec, SweepSpec, TargetKind,
};
pub use output::{emit_report, emit_series, emit_table, num, report_json, series_csv, OutputError};

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::free_boundary::{
    detect_outcome, run_free_boundary, FreeBoundaryState, FrontConfig, Outcome,
};
use crate::harness::suites::{check_scenario, density_ceiling, FixedScenario};
use crate::harness::{run_suite, solve_periodic_orbit, Suite, VerificationReport};
use crate::model_params::{constants_report, ConstantsReport};
use crate::series::{ProbeSpec, TimeSeries};
use crate::stepper::{StepConfig, BLOWUP_FACTOR};

/// Exit status of the command-line driver.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const ASSERTION: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Environment variable capping the worker-pool size.
pub const THREADS_ENV: &str = "CHEMO_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{0}")]
    Assertion(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Assertion(_) => exit::ASSERTION,
            CliError::Model(e) if e.is_numerical() => exit::NUMERICAL,
            _ => exit::USAGE,
        }
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: Problem,
    pub constants: ConstantsReport,
    pub u0_inf: f64,
    pub u0_sup: f64,
    pub dt: f64,
    pub steps: usize,
    pub t_end: f64,
    pub max_sup_u: f64,
    pub max_sup_time: f64,
    pub final_sup_u: f64,
    pub final_inf_u: f64,
    pub final_mass: f64,
    pub relative_clip_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Outcome>,
}

/// Build the fixed-domain scenario described by a configuration.
pub fn fixed_scenario(cfg: &RunConfig) -> crate::Result<FixedScenario> {
    let grid = cfg.grid()?;
    let mut sc = FixedScenario::new(
        "config",
        cfg.params,
        cfg.coefficients()?,
        grid,
        |x| cfg.initial.value(x),
        cfg.step.t_end,
    );
    sc.t0 = cfg.t0;
    sc.probe_interval = cfg.probes.interval;
    sc.dt = cfg.step.dt;
    sc.scheme = cfg.step.scheme;
    sc.cfl_safety = cfg.step.cfl_safety;
    sc.clip_negative = cfg.step.clip_negative;
    Ok(sc)
}

/// Initial free-boundary state described by a configuration, with the
/// datum optionally replaced.
fn front_state(
    cfg: &RunConfig,
    h0: f64,
    u0: impl Fn(f64) -> f64,
) -> crate::Result<FreeBoundaryState> {
    match cfg.problem {
        Problem::FreeBoundaryDouble => {
            let g0 = cfg.front.g0.unwrap_or(-h0);
            FreeBoundaryState::double(cfg.t0, g0, h0, u0, cfg.grid.n_cells, &cfg.params)
        }
        _ => FreeBoundaryState::single(cfg.t0, h0, u0, cfg.grid.n_cells, &cfg.params),
    }
}

fn front_run(
    cfg: &RunConfig,
    initial: &FreeBoundaryState,
    ceiling: f64,
) -> crate::Result<(TimeSeries, FreeBoundaryState, f64)> {
    let coeffs = cfg.coefficients()?;
    let dt = cfg.step.dt.unwrap_or_else(|| {
        initial.default_dt(&cfg.params, ceiling, cfg.step.scheme, cfg.step.cfl_safety)
    });
    let step = StepConfig {
        scheme: cfg.step.scheme,
        cfl_safety: cfg.step.cfl_safety,
        clip_negative: cfg.step.clip_negative,
        ..StepConfig::new(dt, cfg.t0, cfg.step.t_end).with_ceiling(BLOWUP_FACTOR * ceiling)
    };
    let fc = FrontConfig {
        step,
        collapse_factor: cfg.front.collapse_factor,
    };
    let (series, fin) = run_free_boundary(
        initial,
        &coeffs,
        &cfg.params,
        &fc,
        &ProbeSpec::every(cfg.probes.interval),
    )?;
    Ok((series, fin, dt))
}

/// Execute the simulation described by `cfg`.
pub fn execute_run(cfg: &RunConfig) -> crate::Result<(TimeSeries, RunSummary)> {
    let coeffs = cfg.coefficients()?;
    let (u0_inf, u0_sup) = cfg.initial_extrema()?;
    let constants = constants_report(&cfg.params, &coeffs, u0_sup);
    let ceiling = density_ceiling(&constants.bounds, u0_sup, &coeffs);

    let (series, dt, h_final, g_final, outcome) = if cfg.problem.is_free_boundary() {
        let h0 = cfg.front.h0.unwrap_or(1.0);
        let initial = front_state(cfg, h0, |x| cfg.initial.value(x))?;
        let (series, fin, dt) = front_run(cfg, &initial, ceiling)?;
        let floor = constants.bounds.m0.unwrap_or(0.0);
        let outcome = detect_outcome(&series, floor, &cfg.outcome);
        (series, dt, Some(fin.h), fin.left_front(), Some(outcome))
    } else {
        let sc = fixed_scenario(cfg)?;
        let target = match cfg.probes.target {
            TargetKind::PeriodicOrbit => Some(solve_periodic_orbit(&coeffs)?.as_target()),
            TargetKind::None => None,
        };
        let dt = sc.step_config().dt;
        (sc.run(target)?, dt, None, None, None)
    };
    let last = *series.last();
    let summary = RunSummary {
        problem: cfg.problem,
        constants,
        u0_inf,
        u0_sup,
        dt,
        steps: series.steps,
        t_end: series.t_end,
        max_sup_u: series.max_sup_u,
        max_sup_time: series.max_sup_time,
        final_sup_u: last.sup_u,
        final_inf_u: last.inf_u,
        final_mass: last.mass,
        relative_clip_mass: series.relative_clip_mass(),
        final_error: last.err_to_target,
        h_final,
        g_final,
        outcome,
    };
    Ok((series, summary))
}

/// One row of the spreading/vanishing phase table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub h0: f64,
    pub u0_sup: f64,
    pub outcome: String,
    pub h_final: Option<f64>,
    pub sup_u_final: Option<f64>,
}

/// Free-boundary sweep over `h0` and cosine-bump heights.
pub fn execute_sweep(cfg: &RunConfig) -> crate::Result<Vec<PhaseRow>> {
    if !cfg.problem.is_free_boundary() {
        return Err(Error::InvalidParameter {
            name: "problem",
            reason: "sweep requires a free-boundary problem".into(),
        });
    }
    let coeffs = cfg.coefficients()?;
    let cases: Vec<(f64, f64)> = cfg
        .sweep
        .h0
        .iter()
        .flat_map(|&h| cfg.sweep.amplitude.iter().map(move |&a| (h, a)))
        .collect();
    let rows = cases
        .par_iter()
        .map(|&(h0, amp)| {
            let bump = move |x: f64| amp * (PI * x / (2.0 * h0)).cos().max(0.0);
            let constants = constants_report(&cfg.params, &coeffs, amp);
            let ceiling = density_ceiling(&constants.bounds, amp, &coeffs);
            let floor = constants.bounds.m0.unwrap_or(0.0);
            let attempt = front_state(cfg, h0, bump).and_then(|s| front_run(cfg, &s, ceiling));
            match attempt {
                Ok((series, fin, _)) => PhaseRow {
                    h0,
                    u0_sup: amp,
                    outcome: detect_outcome(&series, floor, &cfg.outcome).to_string(),
                    h_final: Some(fin.h),
                    sup_u_final: Some(fin.sup_u()),
                },
                Err(e) => PhaseRow {
                    h0,
                    u0_sup: amp,
                    outcome: match e.root() {
                        Error::FrontCollapse { .. } => Outcome::Vanishing.to_string(),
                        _ => format!("failed: {}", e.root()),
                    },
                    h_final: None,
                    sup_u_final: None,
                },
            }
        })
        .collect();
    Ok(rows)
}

pub fn phase_table(rows: &[PhaseRow]) -> Vec<Vec<String>> {
    let opt = |v: Option<f64>| v.map_or_else(String::new, num);
    let mut table = vec![vec![
        "h0".to_string(),
        "u0_sup".into(),
        "outcome".into(),
        "h_final".into(),
        "sup_u_final".into(),
    ]];
    table.extend(rows.iter().map(|r| {
        vec![
            num(r.h0),
            num(r.u0_sup),
            r.outcome.clone(),
            opt(r.h_final),
            opt(r.sup_u_final),
        ]
    }));
    table
}

/// The reduced inequalities that hold when `χ₂ = 0` and `λ₂ = λ₁`.
#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct ReducedHypotheses {
    pub H1: Reduced,
    pub H2: Reduced,
    pub H3: Reduced,
}

#[derive(Debug, Clone, Serialize)]
pub struct Reduced {
    pub inequality: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesesOutput {
    #[serde(flatten)]
    pub constants: ConstantsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedHypotheses>,
}

pub fn hypotheses_output(cfg: &RunConfig) -> crate::Result<HypothesesOutput> {
    let coeffs = cfg.coefficients()?;
    let (_, u0_sup) = cfg.initial_extrema()?;
    let constants = constants_report(&cfg.params, &coeffs, u0_sup);
    let p = cfg.params;
    let reduced = (p.chi2 == 0.0 && p.lambda2 == p.lambda1).then(|| {
        let a1 = p.chi1 * p.mu1;
        let b = coeffs.b_inf;
        ReducedHypotheses {
            H1: Reduced {
                inequality: "b_inf > chi1*mu1",
                holds: b > a1,
            },
            H2: Reduced {
                inequality: "b_inf > (1 + a_sup/a_inf)*chi1*mu1",
                holds: coeffs.a_inf > 0.0 && b > (1.0 + coeffs.a_sup / coeffs.a_inf) * a1,
            },
            H3: Reduced {
                inequality: "b_inf > 2*chi1*mu1",
                holds: b > 2.0 * a1,
            },
        }
    });
    Ok(HypothesesOutput { constants, reduced })
}

#[derive(Parser, Debug)]
#[command(
    name = "chemo",
    version,
    about = "Chemotaxis simulator and bound verifier"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized suites
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Relative tolerance on theorem bounds
    #[arg(long, global = true, value_name = "X")]
    tol: Option<f64>,
    /// Print nothing but errors and requested reports
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print hypothesis constants and theorem bounds as JSON
    CheckHypotheses,
    /// Run one simulation and write its series and summary
    Run,
    /// Run a theorem suite (built-in scenarios, or the configured run)
    Verify {
        /// theorem-1-1, theorem-1-2, theorem-1-3, estimates, reflection or free-boundary
        suite: String,
    },
    /// Classify free-boundary runs over a grid of h0 and initial heights
    Sweep,
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|source| CliError::Config {
        path: path.display().to_string(),
        source,
    })
}

fn require_config(common: &Common) -> Result<RunConfig, CliError> {
    match &common.config {
        Some(p) => load_config(p),
        None => Err(CliError::Usage(
            "this command requires --config PATH".into(),
        )),
    }
}

fn out_dir(common: &Common, cfg: Option<&RunConfig>) -> PathBuf {
    common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.map_or(".", |c| c.output.dir.as_str())))
}

fn limit_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if n > 0 {
            // the global pool can only be configured once per process
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
}

fn say(quiet: bool, out: &mut dyn Write, line: impl std::fmt::Display) {
    if !quiet {
        let _ = writeln!(out, "{line}");
    }
}

fn verify(common: &Common, suite_name: &str, out: &mut dyn Write) -> Result<(), CliError> {
    let suite: Suite = suite_name.parse().map_err(CliError::Usage)?;
    let cfg = common.config.as_deref().map(load_config).transpose()?;
    let mut tol = cfg.as_ref().map(|c| c.checks).unwrap_or_default();
    if let Some(t) = common.tol {
        tol.rel_tol = t;
    }
    let seed = common.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
    let report = match &cfg {
        Some(c) => {
            let sc = fixed_scenario(c)?;
            let (hyp, _) = sc.constants();
            let applies = match suite {
                Suite::Theorem11 => hyp.h1_applies(tol.min_margin),
                Suite::Theorem12 => hyp.h2_applies(tol.min_margin),
                _ => hyp.h3_applies(tol.min_margin),
            };
            let sc = if applies { sc } else { sc.negative_control() };
            VerificationReport::aggregate(
                suite.name(),
                seed,
                vec![check_scenario(suite, &sc, &tol)?],
            )
        }
        None => run_suite(suite, seed, &tol),
    };
    for s in &report.scenarios {
        let verdict = match (s.passed, s.asserted) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "RECORDED",
        };
        let note = s
            .note
            .as_deref()
            .map(|n| format!(" ({n})"))
            .unwrap_or_default();
        say(
            common.quiet,
            out,
            format!("{verdict} {}/{}{note}", report.suite, s.name),
        );
    }
    if common.out.is_some() || cfg.is_some() {
        let path = out_dir(common, cfg.as_ref()).join(format!("verify-{}.json", suite.name()));
        emit_report(&report, &path)?;
    }
    say(
        common.quiet,
        out,
        format!(
            "suite {}: {}",
            report.suite,
            if report.passed { "PASS" } else { "FAIL" }
        ),
    );
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Assertion(format!(
            "suite {} failed",
            report.suite
        )))
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let common = &cli.common;
    match &cli.command {
        Command::CheckHypotheses => {
            let cfg = require_config(common)?;
            let report = hypotheses_output(&cfg)?;
            let _ = out.write_all(report_json(&report).as_bytes());
            if let Some(dir) = &common.out {
                emit_report(&report, &dir.join("hypotheses.json"))?;
            }
            Ok(())
        }
        Command::Run => {
            let cfg = require_config(common)?;
            let (series, summary) = execute_run(&cfg)?;
            let dir = out_dir(common, Some(&cfg));
            emit_series(&series, &dir.join(&cfg.output.series))?;
            emit_report(&summary, &dir.join(&cfg.output.report))?;
            say(
                common.quiet,
                out,
                format!(
                    "t = {} after {} steps: sup u = {}, inf u = {}",
                    summary.t_end, summary.steps, summary.final_sup_u, summary.final_inf_u
                ),
            );
            Ok(())
        }
        Command::Verify { suite } => verify(common, suite, out),
        Command::Sweep => {
            let cfg = require_config(common)?;
            let rows = execute_sweep(&cfg)?;
            let table = phase_table(&rows);
            emit_table(
                &table,
                &out_dir(common, Some(&cfg)).join(&cfg.output.phase_table),
            )?;
            for row in &table {
                say(common.quiet, out, row.join(","));
            }
            Ok(())
        }
    }
}

/// Command-line entry point; returns the process exit status.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    limit_threads();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::PASS
            };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match dispatch(&cli, &mut stdout) {
        Ok(()) => exit::PASS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
