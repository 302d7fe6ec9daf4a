//! One-step operators for Euler-Maruyama, Ninomiya-Victoir and
//! Ninomiya-Ninomiya, plus the uniform-grid path engine.
//!
//! Flow compositions read right to left: the rightmost exponential acts on
//! the state first.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lie::Algebra;
use crate::models::ModelSpec;
use crate::ode::rk4_flow;
use crate::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Em,
    Nv,
    Nn,
}

impl Scheme {
    /// Uniform coordinates consumed per time step.
    pub fn coords_per_step(self) -> usize {
        match self {
            Scheme::Em => 2,
            Scheme::Nv => 3,
            Scheme::Nn => 4,
        }
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "em" => Ok(Scheme::Em),
            "nv" => Ok(Scheme::Nv),
            "nn" => Ok(Scheme::Nn),
            other => Err(format!("unknown scheme `{other}` (expected em, nv or nn)")),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Em => "em",
            Scheme::Nv => "nv",
            Scheme::Nn => "nn",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Analytic,
    #[serde(rename = "rk")]
    RungeKutta,
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(Backend::Analytic),
            "rk" | "rk4" | "runge-kutta" => Ok(Backend::RungeKutta),
            other => Err(format!(
                "unknown backend `{other}` (expected analytic or rk)"
            )),
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Analytic => "analytic",
            Backend::RungeKutta => "rk",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub backend: Backend,
    /// Free parameter of the Ninomiya-Ninomiya family.
    pub r: f64,
    /// Highest base index kept per NV flow; `None` picks the model default.
    pub nv_term_cap: Option<usize>,
    /// Highest base index kept per NN flow; `None` picks the model default.
    pub nn_term_cap: Option<usize>,
    pub rk_substeps: usize,
    /// `lambda` truncation for the series decomposition (Heston, or SABR
    /// with caps above 4).
    pub series_order: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Nv,
            backend: Backend::Analytic,
            r: 0.5,
            nv_term_cap: None,
            nn_term_cap: None,
            rk_substeps: 8,
            series_order: 5,
        }
    }
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, backend: Backend) -> Self {
        Self {
            scheme,
            backend,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.r.is_finite() {
            return Err(invalid("r", "must be finite"));
        }
        if self.rk_substeps == 0 {
            return Err(invalid("rk_substeps", "must be at least 1"));
        }
        if self.series_order == 0 {
            return Err(Error::InvalidOrder(0));
        }
        Ok(())
    }

    /// Base-index cap for the analytic backend. SABR keeps `P_0..P_3` for NV
    /// and `P_0..P_4` for NN; Heston keeps `order * M` indices.
    pub fn term_cap(&self, spec: &ModelSpec) -> usize {
        let (user, sabr_default) = match self.scheme {
            Scheme::Nn => (self.nn_term_cap, 4),
            _ => (self.nv_term_cap, 3),
        };
        user.unwrap_or(match spec.algebra() {
            Algebra::Witt => sabr_default,
            Algebra::Heston => self.series_order * spec.ratio_m(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bernoulli {
    Plus,
    Minus,
}

/// Random inputs of one time step.
///
/// EM and NV read `normals[0..2]` as `(Z^1, Z^2)`; NN reads all four as
/// `(Z_1^1, Z_1^2, Z_2^1, Z_2^2)`. Only NV reads the sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDraws {
    pub normals: [f64; 4],
    pub bernoulli: Bernoulli,
}

impl Default for StepDraws {
    fn default() -> Self {
        Self {
            normals: [0.0; 4],
            bernoulli: Bernoulli::Plus,
        }
    }
}

impl StepDraws {
    pub fn new(normals: [f64; 4], bernoulli: Bernoulli) -> Self {
        Self { normals, bernoulli }
    }
}

/// `x + drift(x) t + sum_i sigma_i(x) sqrt(t) Z^i` on the Itô form.
pub fn em_step(spec: &ModelSpec, t: f64, x: State, draws: &StepDraws) -> State {
    let sq = t.sqrt();
    let drift = spec.ito_drift(x);
    let s1 = spec.ito_diffusion(1, x);
    let s2 = spec.ito_diffusion(2, x);
    let (z1, z2) = (draws.normals[0] * sq, draws.normals[1] * sq);
    [
        x[0] + drift[0] * t + s1[0] * z1 + s2[0] * z2,
        x[1] + drift[1] * t + s1[1] * z1 + s2[1] * z2,
    ]
}

/// `exp(sum_i b_i V_i)(x)` through the configured backend.
pub fn vector_field_flow(
    spec: &ModelSpec,
    cfg: &SchemeConfig,
    b: &[f64; 3],
    cap: usize,
    x: State,
) -> Result<State> {
    let a = spec.w_coefficients(b);
    let a = &a[..spec.basis_len()];
    match cfg.backend {
        Backend::Analytic => spec.analytic_flow(a, cap, cfg.series_order, x),
        Backend::RungeKutta => rk4_flow(&|y| spec.combined_field(a, y), 1.0, cfg.rk_substeps, x),
    }
}

/// Ninomiya-Victoir: `exp(t/2 V_0)`, then the two diffusion flows in the
/// order picked by the sign, then `exp(t/2 V_0)` again. With `Plus` the
/// composition `e^{t/2 V_0} e^{Z^1 V_1} e^{Z^2 V_2} e^{t/2 V_0}` applies
/// `V_2` before `V_1`.
pub fn nv_step(
    spec: &ModelSpec,
    t: f64,
    x: State,
    draws: &StepDraws,
    cfg: &SchemeConfig,
) -> Result<State> {
    let cap = cfg.term_cap(spec);
    let sq = t.sqrt();
    let drift = [0.5 * t, 0.0, 0.0];
    let v1 = [0.0, sq * draws.normals[0], 0.0];
    let v2 = [0.0, 0.0, sq * draws.normals[1]];
    let (first, second) = match draws.bernoulli {
        Bernoulli::Plus => (&v2, &v1),
        Bernoulli::Minus => (&v1, &v2),
    };
    let mut y = vector_field_flow(spec, cfg, &drift, cap, x)?;
    y = vector_field_flow(spec, cfg, first, cap, y)?;
    y = vector_field_flow(spec, cfg, second, cap, y)?;
    vector_field_flow(spec, cfg, &drift, cap, y)
}

/// The `V`-coefficients `(b_0, b_1, b_2)` of `Y_0` and `Y_1`.
pub fn nn_generators(t: f64, r: f64, normals: &[f64; 4]) -> ([f64; 3], [f64; 3]) {
    let sq = t.sqrt();
    let [z11, z12, z21, z22] = *normals;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s11 = r * z11 + h * z12;
    let s12 = (1.0 - r) * z11 - h * z12;
    let s21 = r * z21 + h * z22;
    let s22 = (1.0 - r) * z21 - h * z22;
    (
        [r * t, s11 * sq, s21 * sq],
        [(1.0 - r) * t, s12 * sq, s22 * sq],
    )
}

/// Ninomiya-Ninomiya: `exp(Y_0) o exp(Y_1)(x)`, so `Y_1` acts first.
pub fn nn_step(
    spec: &ModelSpec,
    t: f64,
    x: State,
    draws: &StepDraws,
    cfg: &SchemeConfig,
) -> Result<State> {
    let cap = cfg.term_cap(spec);
    let (y0, y1) = nn_generators(t, cfg.r, &draws.normals);
    let y = vector_field_flow(spec, cfg, &y1, cap, x)?;
    vector_field_flow(spec, cfg, &y0, cap, y)
}

pub fn step(
    spec: &ModelSpec,
    cfg: &SchemeConfig,
    t: f64,
    x: State,
    draws: &StepDraws,
) -> Result<State> {
    match cfg.scheme {
        Scheme::Em => Ok(em_step(spec, t, x, draws)),
        Scheme::Nv => nv_step(spec, t, x, draws, cfg),
        Scheme::Nn => nn_step(spec, t, x, draws, cfg),
    }
}

/// Folds the one-step operator over `n_steps` equal steps of `maturity / n_steps`.
pub fn simulate_path(
    spec: &ModelSpec,
    cfg: &SchemeConfig,
    n_steps: usize,
    maturity: f64,
    x0: State,
    draws: &[StepDraws],
) -> Result<State> {
    if n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    if draws.len() != n_steps {
        return Err(Error::DrawCount {
            expected: n_steps,
            got: draws.len(),
        });
    }
    let dt = maturity / n_steps as f64;
    draws.iter().try_fold(x0, |x, d| step(spec, cfg, dt, x, d))
}
