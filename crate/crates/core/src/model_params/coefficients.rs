use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A coefficient `(t, x) -> value`.
pub type CoefFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// The `(t, x)` lattice on which coefficient extrema are sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleWindow {
    pub t_start: f64,
    pub t_end: f64,
    pub nt: usize,
    pub x_start: f64,
    pub x_end: f64,
    pub nx: usize,
}

impl SampleWindow {
    pub fn new(t_start: f64, t_end: f64, nt: usize, x_start: f64, x_end: f64, nx: usize) -> Self {
        Self {
            t_start,
            t_end,
            nt: nt.max(1),
            x_start,
            x_end,
            nx: nx.max(1),
        }
    }

    fn times(&self) -> impl Iterator<Item = f64> + '_ {
        lattice(self.t_start, self.t_end, self.nt)
    }

    fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        lattice(self.x_start, self.x_end, self.nx)
    }
}

fn lattice(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 {
        (hi - lo) / (n - 1) as f64
    } else {
        0.0
    };
    (0..n).map(move |i| lo + i as f64 * step)
}

/// Number of samples per period when the coefficients are periodic in time.
const SAMPLES_PER_PERIOD: usize = 1024;

/// Logistic coefficients `a(t, x)` and `b(t, x)` together with their extrema
/// over the simulated window.
#[derive(Clone)]
pub struct CoefficientField {
    a: CoefFn,
    b: CoefFn,
    pub a_inf: f64,
    pub a_sup: f64,
    pub b_inf: f64,
    pub b_sup: f64,
    pub period_t: Option<f64>,
    time_only: bool,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientField")
            .field("a_inf", &self.a_inf)
            .field("a_sup", &self.a_sup)
            .field("b_inf", &self.b_inf)
            .field("b_sup", &self.b_sup)
            .field("period_t", &self.period_t)
            .field("time_only", &self.time_only)
            .finish()
    }
}

impl CoefficientField {
    /// Constant coefficients `a`, `b`.
    pub fn constant(a: f64, b: f64) -> Self {
        Self {
            a: Arc::new(move |_, _| a),
            b: Arc::new(move |_, _| b),
            a_inf: a,
            a_sup: a,
            b_inf: b,
            b_sup: b,
            period_t: None,
            time_only: true,
        }
    }

    /// Arbitrary coefficients with extrema sampled on `window`. When `period`
    /// is given, the time direction is sampled over one period starting at
    /// `window.t_start` instead.
    pub fn sampled<A, B>(a: A, b: B, window: &SampleWindow, period: Option<f64>) -> Result<Self>
    where
        A: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(Arc::new(a), Arc::new(b), window, period, false)
    }

    /// Coefficients depending on time only, `a(t)` and `b(t)`.
    pub fn time_only<A, B>(a: A, b: B, window: &SampleWindow, period: Option<f64>) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let window = SampleWindow { nx: 1, ..*window };
        Self::build(
            Arc::new(move |t, _| a(t)),
            Arc::new(move |t, _| b(t)),
            &window,
            period,
            true,
        )
    }

    /// Coefficients from shared callables; `time_only` declares that they
    /// ignore `x`.
    pub fn from_shared(
        a: CoefFn,
        b: CoefFn,
        window: &SampleWindow,
        period: Option<f64>,
        time_only: bool,
    ) -> Result<Self> {
        let window = if time_only {
            SampleWindow { nx: 1, ..*window }
        } else {
            *window
        };
        Self::build(a, b, &window, period, time_only)
    }

    fn build(
        a: CoefFn,
        b: CoefFn,
        window: &SampleWindow,
        period: Option<f64>,
        time_only: bool,
    ) -> Result<Self> {
        if let Some(p) = period {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "period_T",
                    reason: format!("must be positive and finite, got {p}"),
                });
            }
        }
        let window = match period {
            Some(p) => SampleWindow {
                t_start: window.t_start,
                t_end: window.t_start + p,
                nt: SAMPLES_PER_PERIOD + 1,
                ..*window
            },
            None => *window,
        };
        let mut ext = [
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ];
        for t in window.times() {
            for x in window.positions() {
                let (av, bv) = (a(t, x), b(t, x));
                if !av.is_finite() || !bv.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "coefficients",
                        reason: format!("non-finite value at (t, x) = ({t}, {x})"),
                    });
                }
                ext[0] = ext[0].min(av);
                ext[1] = ext[1].max(av);
                ext[2] = ext[2].min(bv);
                ext[3] = ext[3].max(bv);
            }
        }
        let field = Self {
            a,
            b,
            a_inf: ext[0],
            a_sup: ext[1],
            b_inf: ext[2],
            b_sup: ext[3],
            period_t: period,
            time_only,
        };
        if let Some(p) = period {
            field.check_periodic(p, &window)?;
        }
        Ok(field)
    }

    fn check_periodic(&self, p: f64, window: &SampleWindow) -> Result<()> {
        const TOL: f64 = 1e-9;
        for t in lattice(window.t_start, window.t_start + p, 33) {
            for x in window.positions().step_by((window.nx / 16).max(1)) {
                let da = (self.a(t + p, x) - self.a(t, x)).abs();
                let db = (self.b(t + p, x) - self.b(t, x)).abs();
                let scale = 1.0 + self.a_sup.abs().max(self.b_sup.abs());
                if da > TOL * scale || db > TOL * scale {
                    return Err(Error::InvalidParameter {
                        name: "period_T",
                        reason: format!("coefficients are not {p}-periodic at (t, x) = ({t}, {x})"),
                    });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn a(&self, t: f64, x: f64) -> f64 {
        (self.a)(t, x)
    }

    #[inline]
    pub fn b(&self, t: f64, x: f64) -> f64 {
        (self.b)(t, x)
    }

    pub fn a_fn(&self) -> CoefFn {
        Arc::clone(&self.a)
    }

    pub fn b_fn(&self) -> CoefFn {
        Arc::clone(&self.b)
    }

    /// Whether `a` and `b` depend on time only.
    pub fn is_time_only(&self) -> bool {
        self.time_only
    }

    /// Hypothesis (H0): both coefficients bounded below by a positive constant.
    pub fn h0_holds(&self) -> bool {
        self.a_inf > 0.0 && self.b_inf > 0.0
    }

    /// Override the sampled extrema, e.g. when they are known in closed form.
    pub fn with_extrema(mut self, a_inf: f64, a_sup: f64, b_inf: f64, b_sup: f64) -> Self {
        self.a_inf = a_inf;
        self.a_sup = a_sup;
        self.b_inf = b_inf;
        self.b_sup = b_sup;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_extrema() {
        let c = CoefficientField::constant(2.0, 3.0);
        assert_eq!((c.a_inf, c.a_sup, c.b_inf, c.b_sup), (2.0, 2.0, 3.0, 3.0));
        assert!(c.h0_holds());
        assert!(!CoefficientField::constant(0.0, 1.0).h0_holds());
    }

    #[test]
    fn sinusoid_extrema_sampled_over_one_period() {
        let w = SampleWindow::new(0.0, 40.0, 10, 0.0, 40.0, 1);
        let c = CoefficientField::time_only(
            |t| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * t).sin(),
            |_| 1.0,
            &w,
            Some(1.0),
        )
        .unwrap();
        assert!((c.a_sup - 1.5).abs() < 1e-12);
        assert!((c.a_inf - 0.5).abs() < 1e-12);
        assert!(c.is_time_only());
    }

    #[test]
    fn rejects_wrong_period() {
        let w = SampleWindow::new(0.0, 1.0, 10, 0.0, 1.0, 1);
        let r = CoefficientField::time_only(
            |t| 1.0 + 0.5 * (2.0 * std::f64::consts::PI * t).sin(),
            |_| 1.0,
            &w,
            Some(0.7),
        );
        assert!(matches!(
            r,
            Err(Error::InvalidParameter {
                name: "period_T",
                ..
            })
        ));
    }

    #[test]
    fn gaussian_bump_in_x() {
        let w = SampleWindow::new(0.0, 1.0, 2, 0.0, 10.0, 1001);
        let c = CoefficientField::sampled(
            |_, x| 1.0 + (-(x - 5.0) * (x - 5.0)).exp(),
            |_, _| 2.0,
            &w,
            None,
        )
        .unwrap();
        assert!((c.a_sup - 2.0).abs() < 1e-12);
        assert!(c.a_inf > 1.0 && c.a_inf < 1.0 + 1e-10);
    }
}
