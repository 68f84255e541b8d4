//! Probe records collected along a run.

use std::fmt;
use std::sync::Arc;

use crate::grid::StateField;

/// Reference solution against which `err_to_target` is measured.
#[derive(Clone)]
pub enum Target {
    /// Spatially uniform target `u*(t)`.
    Uniform(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Fixed node profile.
    Profile(Vec<f64>),
}

impl fmt::Debug for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Uniform(_) => f.write_str("Target::Uniform(..)"),
            Target::Profile(p) => f.debug_tuple("Target::Profile").field(&p.len()).finish(),
        }
    }
}

impl Target {
    pub fn uniform(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Target::Uniform(Arc::new(f))
    }

    /// `max_i |u_i − target_i(t)|`.
    pub fn distance(&self, t: f64, u: &[f64]) -> f64 {
        match self {
            Target::Uniform(f) => {
                let c = f(t);
                u.iter().map(|&ui| (ui - c).abs()).fold(0.0, f64::max)
            }
            Target::Profile(p) => u
                .iter()
                .zip(p)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        }
    }
}

/// What to record during a run.
#[derive(Debug, Clone)]
pub struct ProbeSpec {
    /// Time between probe records; rounded to a whole number of steps.
    pub interval: f64,
    pub target: Option<Target>,
}

impl ProbeSpec {
    pub fn every(interval: f64) -> Self {
        Self {
            interval,
            target: None,
        }
    }

    pub fn with_target(mut self, target: Target) -> Self {
        self.target = Some(target);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRecord {
    pub t: f64,
    pub sup_u: f64,
    pub inf_u: f64,
    /// Trapezoidal mass of `u` over the physical domain.
    pub mass: f64,
    pub err_to_target: Option<f64>,
    pub h: Option<f64>,
    pub g: Option<f64>,
    pub ux_front: Option<f64>,
    /// Cumulative mass removed by negative clipping up to `t`.
    pub clip_mass: f64,
}

/// Output of a completed run.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub steps: usize,
    pub records: Vec<ProbeRecord>,
    /// Largest `sup_x u` over every step (not only probes).
    pub max_sup_u: f64,
    pub max_sup_time: f64,
    /// Smallest `inf_x u` over every step after the first.
    pub min_inf_u: f64,
    pub clip_mass: f64,
    pub max_mass: f64,
    pub final_state: StateField,
}

impl TimeSeries {
    pub(crate) fn new(t0: f64, t_end: f64, dt: f64, initial: &StateField) -> Self {
        Self {
            t0,
            t_end,
            dt,
            steps: 0,
            records: Vec::new(),
            max_sup_u: initial.sup_u(),
            max_sup_time: t0,
            min_inf_u: f64::INFINITY,
            clip_mass: 0.0,
            max_mass: 0.0,
            final_state: initial.clone(),
        }
    }

    pub(crate) fn observe_step(&mut self, state: &StateField, clip: f64) {
        self.steps += 1;
        self.clip_mass += clip;
        let sup = state.sup_u();
        if sup > self.max_sup_u {
            self.max_sup_u = sup;
            self.max_sup_time = state.t;
        }
        self.min_inf_u = self.min_inf_u.min(state.inf_u());
    }

    pub(crate) fn push(&mut self, record: ProbeRecord) {
        self.max_mass = self.max_mass.max(record.mass);
        self.records.push(record);
    }

    /// Records with `t ≥ t_end − fraction·(t_end − t0)`.
    pub fn final_window(&self, fraction: f64) -> impl Iterator<Item = &ProbeRecord> {
        let start = self.t_end - fraction * (self.t_end - self.t0) - 1e-9 * self.dt;
        self.records.iter().filter(move |r| r.t >= start)
    }

    pub fn last(&self) -> &ProbeRecord {
        self.records
            .last()
            .expect("a completed run has at least one record")
    }

    /// Clip mass relative to the largest recorded mass (0 when both vanish).
    pub fn relative_clip_mass(&self) -> f64 {
        if self.clip_mass == 0.0 {
            0.0
        } else {
            self.clip_mass / self.max_mass
        }
    }

    pub fn has_front(&self) -> bool {
        self.records.first().is_some_and(|r| r.h.is_some())
    }

    pub fn has_left_front(&self) -> bool {
        self.records.first().is_some_and(|r| r.g.is_some())
    }

    pub fn has_target(&self) -> bool {
        self.records
            .first()
            .is_some_and(|r| r.err_to_target.is_some())
    }
}
