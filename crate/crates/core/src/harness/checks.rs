//! Theorem checks. Every check is a pure function of a completed
//! [`TimeSeries`] and the constants; none of them touches run data.

use serde::{Deserialize, Serialize};

use crate::model_params::{BoundSet, HypothesisReport};
use crate::series::TimeSeries;

use super::periodic::PeriodicOrbit;

/// Tolerances shared by the theorem checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckTolerances {
    /// Relative allowance on bounds.
    pub rel_tol: f64,
    /// Absolute target on `‖u − u*‖∞` at the end of a convergence run.
    pub conv_tol: f64,
    /// Hypothesis margin required before a theorem is treated as applying.
    pub min_margin: f64,
    /// Fraction of the run treated as the limsup window.
    pub final_fraction: f64,
    /// Epoch length of the plateau envelope.
    pub epoch: f64,
    /// Allowed excess of the plateau ratio over `ρ`.
    pub envelope_slack: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-2,
            conv_tol: 1e-4,
            min_margin: 1e-6,
            final_fraction: 0.1,
            epoch: 4.0,
            envelope_slack: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem11Report {
    /// (H0) and (H1) hold with the required margin.
    pub applies: bool,
    pub passed: bool,
    pub c_u0: Option<f64>,
    pub limsup_bound: Option<f64>,
    pub max_sup_u: f64,
    pub max_sup_time: f64,
    pub final_sup_u: f64,
    pub final_sup_time: f64,
    /// `limsup_bound − final_sup_u`; the bound is not claimed to be tight.
    pub observed_gap: Option<f64>,
    pub failure: Option<String>,
}

/// Global ceiling `sup u ≤ C(u₀)(1+tol)` over every step, and
/// `sup u ≤ limsup_bound·(1+tol)` over the final window.
pub fn check_theorem_1_1(
    series: &TimeSeries,
    hyp: &HypothesisReport,
    bounds: &BoundSet,
    tol: &CheckTolerances,
) -> Theorem11Report {
    let applies = hyp.h1_applies(tol.min_margin);
    let (final_sup_u, final_sup_time) = series
        .final_window(tol.final_fraction)
        .map(|r| (r.sup_u, r.t))
        .fold(
            (0.0, series.t_end),
            |acc, x| if x.0 > acc.0 { x } else { acc },
        );
    let mut failure = None;
    if !applies {
        failure = Some("H1 does not hold; run recorded as a negative control".to_string());
    }
    if let Some(c) = bounds.C_u0 {
        if series.max_sup_u > c * (1.0 + tol.rel_tol) && failure.is_none() {
            failure = Some(format!(
                "global ceiling violated at t = {}: sup u = {} > C(u0)·(1+tol) = {}",
                series.max_sup_time,
                series.max_sup_u,
                c * (1.0 + tol.rel_tol)
            ));
        }
    }
    if let Some(l) = bounds.limsup_bound {
        if final_sup_u > l * (1.0 + tol.rel_tol) && failure.is_none() {
            failure = Some(format!(
                "limsup bound violated at t = {final_sup_time}: sup u = {final_sup_u} > {}",
                l * (1.0 + tol.rel_tol)
            ));
        }
    }
    if applies && (bounds.C_u0.is_none() || bounds.limsup_bound.is_none()) {
        failure = Some("bounds unavailable".to_string());
    }
    Theorem11Report {
        applies,
        passed: failure.is_none(),
        c_u0: bounds.C_u0,
        limsup_bound: bounds.limsup_bound,
        max_sup_u: series.max_sup_u,
        max_sup_time: series.max_sup_time,
        final_sup_u,
        final_sup_time,
        observed_gap: bounds.limsup_bound.map(|l| l - final_sup_u),
        failure,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem12Report {
    /// (H0), (H2) hold and `inf u₀ > 0`.
    pub applies: bool,
    pub passed: bool,
    pub corridor_low: Option<f64>,
    pub corridor_high: Option<f64>,
    /// Earliest probe time after which the corridor holds through `t_end`.
    pub entry_time: Option<f64>,
    pub min_inf_after_entry: Option<f64>,
    pub max_sup_after_entry: Option<f64>,
    pub failure: Option<String>,
}

/// Persistence corridor `m₀(1−tol) ≤ u ≤ M₀(1+tol)`, checked on probe records.
pub fn check_theorem_1_2(
    series: &TimeSeries,
    hyp: &HypothesisReport,
    bounds: &BoundSet,
    tol: &CheckTolerances,
) -> Theorem12Report {
    let inf_u0 = series.records.first().map_or(0.0, |r| r.inf_u);
    let applies = hyp.h2_applies(tol.min_margin) && inf_u0 > 0.0;
    let low = bounds.m0.map(|m| m * (1.0 - tol.rel_tol));
    let high = bounds.M0.map(|m| m * (1.0 + tol.rel_tol));
    let mut report = Theorem12Report {
        applies,
        passed: false,
        corridor_low: low,
        corridor_high: high,
        entry_time: None,
        min_inf_after_entry: None,
        max_sup_after_entry: None,
        failure: None,
    };
    let (Some(lo), Some(hi)) = (low, high) else {
        report.failure = Some("corridor unavailable: H2 does not hold".to_string());
        return report;
    };
    let inside = |r: &crate::series::ProbeRecord| r.inf_u >= lo && r.sup_u <= hi;
    let recs = &series.records;
    let mut k = recs.len();
    while k > 0 && inside(&recs[k - 1]) {
        k -= 1;
    }
    if k == recs.len() {
        let r = series.last();
        report.failure = Some(format!(
            "corridor [{lo}, {hi}] violated at t = {}: inf u = {}, sup u = {}",
            r.t, r.inf_u, r.sup_u
        ));
    } else {
        let tail = &recs[k..];
        report.entry_time = Some(tail[0].t);
        report.min_inf_after_entry =
            Some(tail.iter().map(|r| r.inf_u).fold(f64::INFINITY, f64::min));
        report.max_sup_after_entry = Some(tail.iter().map(|r| r.sup_u).fold(0.0, f64::max));
        if !applies {
            report.failure =
                Some("H2 or inf u0 > 0 fails; run recorded as a negative control".to_string());
        }
    }
    report.passed = report.failure.is_none();
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem13Report {
    /// (H0), (H3) hold, coefficients depend on t only, and `inf u₀ > 0`.
    pub applies: bool,
    pub passed: bool,
    pub final_error: f64,
    pub converged: bool,
    pub rho: Option<f64>,
    pub envelope_bound: Option<f64>,
    /// Largest error in each epoch.
    pub plateaus: Vec<f64>,
    /// Ratios of successive plateaus above the noise floor.
    pub ratios: Vec<f64>,
    pub max_ratio: Option<f64>,
    pub envelope_ok: bool,
    /// `(t, ‖u − u*‖∞)` at every probe.
    pub error_trace: Vec<(f64, f64)>,
    pub failure: Option<String>,
}

/// Plateaus below this multiple of the final error are treated as noise.
const PLATEAU_FLOOR_FACTOR: f64 = 100.0;
const PLATEAU_FLOOR_MIN: f64 = 1e-8;

/// Convergence to the periodic orbit with a plateau envelope. The run must
/// have been recorded with `orbit.as_target()`.
pub fn check_theorem_1_3(
    series: &TimeSeries,
    hyp: &HypothesisReport,
    bounds: &BoundSet,
    orbit: &PeriodicOrbit,
    time_only: bool,
    tol: &CheckTolerances,
) -> Theorem13Report {
    let inf_u0 = series.records.first().map_or(0.0, |r| r.inf_u);
    let applies = hyp.h3_applies(tol.min_margin) && time_only && inf_u0 > 0.0;
    let error_trace: Vec<(f64, f64)> = series
        .records
        .iter()
        .map(|r| (r.t, r.err_to_target.unwrap_or(f64::NAN)))
        .collect();
    let fs = &series.final_state;
    let c = orbit.value(fs.t);
    let final_error = fs.u.iter().map(|&u| (u - c).abs()).fold(0.0, f64::max);
    let converged = final_error < tol.conv_tol;

    let mut plateaus = Vec::new();
    if tol.epoch > 0.0 {
        let mut k = 0;
        loop {
            let (a, b) = (
                series.t0 + k as f64 * tol.epoch,
                series.t0 + (k + 1) as f64 * tol.epoch,
            );
            if a >= series.t_end - 1e-12 {
                break;
            }
            let peak = error_trace
                .iter()
                .filter(|(t, _)| *t >= a - 1e-12 && *t < b - 1e-12)
                .map(|&(_, e)| e)
                .fold(f64::NAN, f64::max);
            if peak.is_nan() {
                break;
            }
            plateaus.push(peak);
            k += 1;
        }
    }
    let floor = (PLATEAU_FLOOR_FACTOR * final_error).max(PLATEAU_FLOOR_MIN);
    let ratios: Vec<f64> = plateaus
        .windows(2)
        .take_while(|w| w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    let max_ratio = ratios.iter().copied().reduce(f64::max);
    let envelope_bound = bounds.rho.map(|r| r + tol.envelope_slack);
    let envelope_ok = match (max_ratio, envelope_bound) {
        (Some(m), Some(b)) => m <= b,
        (None, Some(_)) => true,
        _ => false,
    };

    let failure = if !applies {
        Some(
            "H3, t-only coefficients or inf u0 > 0 fails; run recorded as a negative control"
                .to_string(),
        )
    } else if error_trace.iter().any(|(_, e)| e.is_nan()) {
        Some("run carries no target error".to_string())
    } else if !converged {
        Some(format!(
            "no convergence: ‖u − u*‖ = {final_error} ≥ {} at t = {}",
            tol.conv_tol, fs.t
        ))
    } else if !envelope_ok {
        Some(format!(
            "plateau ratio {} exceeds ρ + slack = {}",
            max_ratio.unwrap_or(f64::NAN),
            envelope_bound.unwrap_or(f64::NAN)
        ))
    } else {
        None
    };
    Theorem13Report {
        applies,
        passed: failure.is_none(),
        final_error,
        converged,
        rho: bounds.rho,
        envelope_bound,
        plateaus,
        ratios,
        max_ratio,
        envelope_ok,
        error_trace,
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, GridKind};
    use crate::harness::solve_periodic_orbit;
    use crate::harness::suites::{sinusoidal_growth, FixedScenario};
    use crate::model_params::{CoefficientField, ModelParams};

    fn logistic(u0: fn(f64) -> f64, t_end: f64) -> FixedScenario {
        let g = make_grid(GridKind::HalfLine, 20.0, 100).unwrap();
        FixedScenario::new(
            "t",
            ModelParams::default(),
            CoefficientField::constant(1.0, 1.0),
            g,
            u0,
            t_end,
        )
    }

    #[test]
    fn logistic_settles_at_carrying_capacity() {
        let sc = logistic(|_| 2.0, 30.0);
        let (hyp, bounds) = sc.constants();
        let series = sc.run(None).unwrap();
        let before = series.clone().records;
        let r = check_theorem_1_1(&series, &hyp, &bounds, &CheckTolerances::default());
        assert!(r.passed && r.applies);
        assert!(r.final_sup_u >= 1.0 - 1e-9 && r.final_sup_u <= 1.01);
        assert_eq!(series.records, before);
    }

    #[test]
    fn zero_datum_stays_zero() {
        let sc = logistic(|_| 0.0, 5.0);
        let (hyp, bounds) = sc.constants();
        let series = sc.run(None).unwrap();
        assert_eq!(series.max_sup_u, 0.0);
        assert!(check_theorem_1_1(&series, &hyp, &bounds, &CheckTolerances::default()).passed);
    }

    #[test]
    fn corridor_violation_is_reported() {
        let sc = logistic(|_| 0.01, 2.0);
        let (hyp, bounds) = sc.constants();
        let r = check_theorem_1_2(
            &sc.run(None).unwrap(),
            &hyp,
            &bounds,
            &CheckTolerances::default(),
        );
        assert!(!r.passed && r.entry_time.is_none());
        assert!(r.failure.unwrap().contains("t = 2"));
    }

    #[test]
    fn orbit_is_invariant() {
        let c = sinusoidal_growth();
        let orbit = solve_periodic_orbit(&c).unwrap();
        let start = orbit.value(0.0);
        let g = make_grid(GridKind::HalfLine, 20.0, 100).unwrap();
        let p = ModelParams::new(0.3, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let sc = FixedScenario::new("orbit", p, c.clone(), g, move |_| start, 10.0).with_dt(0.005);
        let (hyp, bounds) = sc.constants();
        let series = sc.run(Some(orbit.as_target())).unwrap();
        let r = check_theorem_1_3(
            &series,
            &hyp,
            &bounds,
            &orbit,
            true,
            &CheckTolerances::default(),
        );
        assert!(
            r.error_trace.iter().all(|&(_, e)| e <= 1e-6),
            "{:?}",
            r.error_trace.last()
        );
        assert!(r.passed);
    }
}
