//! Model constants, logistic coefficients, and the hypothesis/bound engine.
//!
//! The two chemical-coupling constants are
//!
//! ```text
//! M = min{ [(χ₂μ₂λ₂ − χ₁μ₁λ₁)₊ + χ₁μ₁(λ₁ − λ₂)₊] / λ₂ ,
//!          [(χ₂μ₂λ₂ − χ₁μ₁λ₁)₊ + χ₂μ₂(λ₁ − λ₂)₊] / λ₁ }
//! K = min{ [|χ₁μ₁λ₁ − χ₂μ₂λ₂| + χ₁μ₁|λ₁ − λ₂|] / λ₂ ,
//!          [|χ₁μ₁λ₁ − χ₂μ₂λ₂| + χ₂μ₂|λ₁ − λ₂|] / λ₁ }
//! ```
//!
//! and the standing assumptions compare `b_inf` against them:
//!
//! * (H1) `b_inf > χ₁μ₁ − χ₂μ₂ + M`
//! * (H2) `b_inf > (1 + a_sup/a_inf)χ₁μ₁ − χ₂μ₂ + M`
//! * (H3) `b_inf > χ₁μ₁ − χ₂μ₂ + K`

mod coefficients;

pub use coefficients::{CoefFn, CoefficientField, SampleWindow};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chemotactic sensitivities, chemical decay and production rates, and the
/// free-boundary expansion coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelParams {
    pub chi1: f64,
    pub chi2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub nu: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            chi1: 0.0,
            chi2: 0.0,
            lambda1: 1.0,
            lambda2: 1.0,
            mu1: 1.0,
            mu2: 1.0,
            nu: 1.0,
        }
    }
}

impl ModelParams {
    pub fn new(
        chi1: f64,
        chi2: f64,
        lambda1: f64,
        lambda2: f64,
        mu1: f64,
        mu2: f64,
        nu: f64,
    ) -> Result<Self> {
        let p = Self {
            chi1,
            chi2,
            lambda1,
            lambda2,
            mu1,
            mu2,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    /// Attraction only (`χ₂ = μ₂ = 0`) with the repellent decay rate bound to
    /// `λ₂ := λ₁`, which makes the hypotheses reduce to their simplest form.
    pub fn attraction_only(chi1: f64, lambda1: f64, mu1: f64, nu: f64) -> Result<Self> {
        Self::new(chi1, 0.0, lambda1, lambda1, mu1, 0.0, nu)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda1", self.lambda1),
            ("lambda2", self.lambda2),
            ("nu", self.nu),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        let nonneg = [
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be nonnegative and finite, got {v}"),
                });
            }
        }
        Ok(())
    }

    /// `χ₁μ₁`, the attraction strength.
    pub fn attraction(&self) -> f64 {
        self.chi1 * self.mu1
    }

    /// `χ₂μ₂`, the repulsion strength.
    pub fn repulsion(&self) -> f64 {
        self.chi2 * self.mu2
    }
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// The chemical-imbalance constant `M`.
pub fn compute_m(p: &ModelParams) -> f64 {
    let (a1, a2) = (p.attraction(), p.repulsion());
    let (r12, r21) = (p.lambda1 / p.lambda2, p.lambda2 / p.lambda1);
    let dl = pos(p.lambda1 - p.lambda2);
    // divided through by λ₂ (resp. λ₁) so that equal rates give exact ratios
    let first = pos(a2 - a1 * r12) + a1 * dl / p.lambda2;
    let second = pos(a2 * r21 - a1) + a2 * dl / p.lambda1;
    first.min(second)
}

/// The chemical-difference constant `K`.
pub fn compute_k(p: &ModelParams) -> f64 {
    let (a1, a2) = (p.attraction(), p.repulsion());
    let (r12, r21) = (p.lambda1 / p.lambda2, p.lambda2 / p.lambda1);
    let dl = (p.lambda1 - p.lambda2).abs();
    let first = (a1 * r12 - a2).abs() + a1 * dl / p.lambda2;
    let second = (a1 - a2 * r21).abs() + a2 * dl / p.lambda1;
    first.min(second)
}

/// Signed slack `b_inf − rhs` of each standing assumption. The (H0) entry is
/// `min(a_inf, b_inf)`; (H2) is absent when `a_inf ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Margins {
    pub H0: f64,
    pub H1: f64,
    pub H2: Option<f64>,
    pub H3: f64,
}

/// Values of `M`, `K` and the truth of (H0)–(H3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct HypothesisReport {
    pub M: f64,
    pub K: f64,
    pub H0: bool,
    pub H1: bool,
    pub H2: bool,
    pub H3: bool,
    pub margins: Margins,
}

impl HypothesisReport {
    /// (H1) holds with at least `min_margin` of slack, together with (H0).
    pub fn h1_applies(&self, min_margin: f64) -> bool {
        self.H0 && self.margins.H1 > min_margin
    }

    pub fn h2_applies(&self, min_margin: f64) -> bool {
        self.H0 && self.margins.H2.is_some_and(|m| m > min_margin)
    }

    pub fn h3_applies(&self, min_margin: f64) -> bool {
        self.H0 && self.margins.H3 > min_margin
    }
}

/// Evaluate (H0)–(H3) with strict inequalities.
pub fn check_hypotheses(p: &ModelParams, c: &CoefficientField) -> HypothesisReport {
    let m = compute_m(p);
    let k = compute_k(p);
    let (a1, a2) = (p.attraction(), p.repulsion());
    let h1 = c.b_inf - (a1 - a2 + m);
    let h2 = (c.a_inf > 0.0).then(|| c.b_inf - ((1.0 + c.a_sup / c.a_inf) * a1 - a2 + m));
    let h3 = c.b_inf - (a1 - a2 + k);
    let h0 = c.a_inf.min(c.b_inf);
    HypothesisReport {
        M: m,
        K: k,
        H0: c.h0_holds(),
        H1: h1 > 0.0,
        H2: h2.is_some_and(|v| v > 0.0),
        H3: h3 > 0.0,
        margins: Margins {
            H0: h0,
            H1: h1,
            H2: h2,
            H3: h3,
        },
    }
}

/// Bounds derived from the constants. `None` marks a bound whose
/// governing hypothesis fails (its denominator or numerator is not positive).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct BoundSet {
    pub C_u0: Option<f64>,
    pub limsup_bound: Option<f64>,
    pub M0: Option<f64>,
    pub m0: Option<f64>,
    pub rho: Option<f64>,
}

impl BoundSet {
    pub fn c_u0(&self) -> Result<f64> {
        self.C_u0.ok_or(Error::HypothesisViolated {
            field: "C_u0",
            hypothesis: "H1",
        })
    }

    pub fn limsup(&self) -> Result<f64> {
        self.limsup_bound.ok_or(Error::HypothesisViolated {
            field: "limsup_bound",
            hypothesis: "H1",
        })
    }

    pub fn persistence_ceiling(&self) -> Result<f64> {
        self.M0.ok_or(Error::HypothesisViolated {
            field: "M0",
            hypothesis: "H1",
        })
    }

    pub fn persistence_floor(&self) -> Result<f64> {
        self.m0.ok_or(Error::HypothesisViolated {
            field: "m0",
            hypothesis: "H2",
        })
    }

    pub fn convergence_ratio(&self) -> Result<f64> {
        self.rho.ok_or(Error::HypothesisViolated {
            field: "rho",
            hypothesis: "H3",
        })
    }

    /// Ceiling used for barrier probes, one unit above the limsup bound.
    pub fn m_plus(&self) -> Option<f64> {
        self.limsup_bound.map(|b| b + 1.0)
    }
}

/// Global ceiling, limsup bound, persistence corridor and convergence ratio
/// for initial data with `sup u₀ = u0_sup`.
pub fn derive_bounds(p: &ModelParams, c: &CoefficientField, u0_sup: f64) -> BoundSet {
    let m = compute_m(p);
    let k = compute_k(p);
    let (a1, a2) = (p.attraction(), p.repulsion());
    let effective = c.b_inf + a2 - a1;
    let h1_den = effective - m;

    let limsup = (h1_den > 0.0 && c.a_sup > 0.0).then(|| c.a_sup / h1_den);
    let c_u0 = limsup.map(|l| u0_sup.max(l));

    let m0 = if c.a_inf > 0.0 && h1_den > 0.0 {
        let numer = c.b_inf - (1.0 + c.a_sup / c.a_inf) * a1 + a2 - m;
        let upper_den = c.b_sup - a1 + a2;
        (numer > 0.0 && upper_den > 0.0).then(|| c.a_inf * numer / (h1_den * upper_den))
    } else {
        None
    };

    let rho = (effective > 0.0).then(|| k / effective);

    BoundSet {
        C_u0: c_u0,
        limsup_bound: limsup,
        M0: limsup,
        m0,
        rho,
    }
}

/// Combined constants and bounds, serialized as one flat JSON object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    #[serde(flatten)]
    pub hypotheses: HypothesisReport,
    #[serde(flatten)]
    pub bounds: BoundSet,
}

pub fn constants_report(p: &ModelParams, c: &CoefficientField, u0_sup: f64) -> ConstantsReport {
    ConstantsReport {
        hypotheses: check_hypotheses(p, c),
        bounds: derive_bounds(p, c, u0_sup),
    }
}
