//! Truncated `lambda`-series arithmetic and the ordered base-flow
//! decomposition of `exp(sum a_i W_i)` for algebras with
//! `[W_n, W_m] = alpha(n, m) W_{n+m}`.

mod closed_form;
mod decompose;
mod series;
mod structure;

pub use closed_form::{expm1_ratio, sabr_closed_form_p, sabr_closed_form_values, A0_LIMIT};
pub use decompose::{
    apply_decomposition, initial_f0, zassenhaus_decompose, FlowDecomposition, LieSeries,
};
pub use series::LambdaSeries;
pub use structure::{Algebra, HestonTable, StructureTable, WittTable};

/// `Psi_t`: evaluates a bookkeeping series at `lambda = sqrt(t)`.
pub fn series_eval(p: &LambdaSeries, sqrt_t: f64) -> f64 {
    p.eval(sqrt_t)
}
