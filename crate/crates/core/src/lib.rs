//! Weak-approximation pricing of SABR and Heston diffusions.
//!
//! The Stratonovich vector fields of both models lie in the span of a family
//! `{W_n}` closed under brackets, `[W_n, W_m] = alpha(n, m) W_{n+m}`, and every
//! `W_n` has a closed-form flow. The [`lie`] module factors the flow of an
//! arbitrary element `sum a_i W_i` into an ordered product of those base flows,
//! which lets the Ninomiya-Victoir and Ninomiya-Ninomiya schemes run without a
//! numerical ODE solver. A Runge-Kutta backend is kept as a baseline and oracle.

pub mod error;
pub mod lie;
pub mod models;
pub mod ode;
pub mod pricing;
pub mod sampling;
pub mod schemes;

pub use error::{Error, Result};

/// A point in the two-dimensional state space `(x_1, x_2)`.
pub type State = [f64; 2];

/// Crate version, echoed into pricing reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
