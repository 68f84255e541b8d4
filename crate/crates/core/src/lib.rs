//! Simulation and bound verification for the one-dimensional logistic
//! attraction–repulsion chemotaxis system
//!
//! ```text
//! u_t = u_xx − χ₁(u v₁ₓ)ₓ + χ₂(u v₂ₓ)ₓ + u(a(t,x) − b(t,x)u)
//! 0   = v₁ₓₓ − λ₁v₁ + μ₁u
//! 0   = v₂ₓₓ − λ₂v₂ + μ₂u
//! ```
//!
//! on the half line, the whole line, and on domains bounded by one or two
//! Stefan fronts `h′ = −ν uₓ(t, h)`.

// NaN must fail every range check, hence `!(x > 0.0)` rather than `x <= 0.0`
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod elliptic;
pub mod error;
pub mod free_boundary;
pub mod grid;
pub mod harness;
pub mod model_params;
pub mod series;
pub mod stepper;
pub mod tridiag;

pub use error::{Error, Result};
