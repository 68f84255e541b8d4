use crate::error::{Error, Result};
use crate::model_params::{CoefFn, CoefficientField};
use crate::series::Target;

/// Steps per period of the RK4 integrator.
pub const STEPS_PER_PERIOD: usize = 10_000;
/// Fixed-point tolerance on successive period-endpoint values.
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const MAX_PERIODS: usize = 1000;

/// The positive `T`-periodic solution of `u′ = (a(t) − b(t)u)u`.
#[derive(Clone)]
pub struct PeriodicOrbit {
    pub period_t: f64,
    /// Start of the sampled period.
    pub t_start: f64,
    /// `u*` at `t_start + k·T/n`, `k = 0..=n`.
    pub samples: Vec<f64>,
    pub u_star_inf: f64,
    pub iterations: usize,
    a: CoefFn,
    b: CoefFn,
}

impl std::fmt::Debug for PeriodicOrbit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicOrbit")
            .field("period_t", &self.period_t)
            .field("t_start", &self.t_start)
            .field("samples", &self.samples.len())
            .field("u_star_inf", &self.u_star_inf)
            .field("iterations", &self.iterations)
            .finish()
    }
}

fn rhs(a: &CoefFn, b: &CoefFn, t: f64, u: f64) -> f64 {
    (a(t, 0.0) - b(t, 0.0) * u) * u
}

fn rk4(a: &CoefFn, b: &CoefFn, t: f64, u: f64, dt: f64) -> f64 {
    let k1 = rhs(a, b, t, u);
    let k2 = rhs(a, b, t + 0.5 * dt, u + 0.5 * dt * k1);
    let k3 = rhs(a, b, t + 0.5 * dt, u + 0.5 * dt * k2);
    let k4 = rhs(a, b, t + dt, u + dt * k3);
    u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Fixed point of the period map, found by iterating it from
/// `u(0) = a_sup/b_inf`.
pub fn solve_periodic_orbit(coeffs: &CoefficientField) -> Result<PeriodicOrbit> {
    solve_periodic_orbit_from(coeffs, coeffs.a_sup / coeffs.b_inf)
}

/// As [`solve_periodic_orbit`] with an explicit positive starting value.
pub fn solve_periodic_orbit_from(coeffs: &CoefficientField, start: f64) -> Result<PeriodicOrbit> {
    let period = coeffs.period_t.ok_or(Error::InvalidParameter {
        name: "period_T",
        reason: "coefficients carry no period".into(),
    })?;
    if !coeffs.is_time_only() {
        return Err(Error::InvalidParameter {
            name: "coefficients",
            reason: "the periodic orbit requires coefficients depending on t only".into(),
        });
    }
    if !coeffs.h0_holds() {
        return Err(Error::InvalidParameter {
            name: "coefficients",
            reason: "a_inf and b_inf must be positive".into(),
        });
    }
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "start",
            reason: format!("must be positive, got {start}"),
        });
    }
    let (a, b) = (coeffs.a_fn(), coeffs.b_fn());
    let n = STEPS_PER_PERIOD;
    let dt = period / n as f64;
    let t_start = 0.0;
    let period_map = |u0: f64| {
        let mut u = u0;
        for k in 0..n {
            u = rk4(&a, &b, t_start + k as f64 * dt, u, dt);
        }
        u
    };

    let mut u = start;
    let mut iterations = 0;
    loop {
        if iterations >= MAX_PERIODS {
            return Err(Error::NoConvergence { iterations });
        }
        let next = period_map(u);
        iterations += 1;
        let done = (next - u).abs() < FIXED_POINT_TOL;
        u = next;
        if done {
            break;
        }
    }

    let mut samples = Vec::with_capacity(n + 1);
    samples.push(u);
    for k in 0..n {
        u = rk4(&a, &b, t_start + k as f64 * dt, u, dt);
        samples.push(u);
    }
    let u_star_inf = samples.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PeriodicOrbit {
        period_t: period,
        t_start,
        samples,
        u_star_inf,
        iterations,
        a,
        b,
    })
}

impl PeriodicOrbit {
    fn step(&self) -> f64 {
        self.period_t / (self.samples.len() - 1) as f64
    }

    /// `u*(t)` for any `t`, by cubic Hermite interpolation using the ODE
    /// right-hand side as the derivative.
    pub fn value(&self, t: f64) -> f64 {
        let n = self.samples.len() - 1;
        let dt = self.step();
        let phase = (t - self.t_start).rem_euclid(self.period_t);
        let s = phase / dt;
        let k = (s.floor() as usize).min(n - 1);
        let f = s - k as f64;
        let (t0, t1) = (
            self.t_start + k as f64 * dt,
            self.t_start + (k + 1) as f64 * dt,
        );
        let (y0, y1) = (self.samples[k], self.samples[k + 1]);
        let (d0, d1) = (rhs(&self.a, &self.b, t0, y0), rhs(&self.a, &self.b, t1, y1));
        let f2 = f * f;
        let f3 = f2 * f;
        (2.0 * f3 - 3.0 * f2 + 1.0) * y0
            + (f3 - 2.0 * f2 + f) * dt * d0
            + (-2.0 * f3 + 3.0 * f2) * y1
            + (f3 - f2) * dt * d1
    }

    /// `|u*(0) − u*(T)|` on the sample lattice.
    pub fn periodicity_gap(&self) -> f64 {
        (self.samples[0] - self.samples[self.samples.len() - 1]).abs()
    }

    /// Largest ODE residual `|u*′ − (a − bu*)u*|` on the lattice, with the
    /// derivative from fourth-order central differences.
    pub fn max_residual(&self) -> f64 {
        let n = self.samples.len() - 1;
        let dt = self.step();
        let at = |k: isize| self.samples[k.rem_euclid(n as isize) as usize];
        (0..n as isize)
            .map(|k| {
                let d = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * dt);
                let t = self.t_start + k as f64 * dt;
                (d - rhs(&self.a, &self.b, t, at(k))).abs()
            })
            .fold(0.0, f64::max)
    }

    /// The orbit as a spatially uniform run target.
    pub fn as_target(&self) -> Target {
        let orbit = self.clone();
        Target::uniform(move |t| orbit.value(t))
    }
}
