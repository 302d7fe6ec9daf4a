//! SABR and Heston diffusions in Stratonovich form, expressed in a basis of
//! vector fields with closed-form flows.

mod heston;
mod sabr;

pub use heston::HestonParams;
pub use sabr::SabrParams;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lie::{sabr_closed_form_values, zassenhaus_decompose, Algebra, FlowDecomposition};
use crate::State;

/// Widest basis row used by any model (`W_0 ..= W_5` for Heston).
pub const MAX_BASIS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelKind {
    Sabr(SabrParams),
    Heston(HestonParams),
}

/// A two-factor diffusion driven by two Brownian motions, together with the
/// coefficient matrix `C` expressing `V_0, V_1, V_2` in its base fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    kind: ModelKind,
    basis: [[f64; MAX_BASIS]; 3],
    basis_len: usize,
}

pub fn sabr_spec(p: SabrParams) -> ModelSpec {
    ModelSpec::sabr(p)
}

pub fn heston_spec(p: HestonParams) -> ModelSpec {
    ModelSpec::heston(p)
}

impl ModelSpec {
    pub const DIMENSION: usize = 2;
    pub const BROWNIAN_COUNT: usize = 2;

    pub fn sabr(p: SabrParams) -> Self {
        let mut basis = [[0.0; MAX_BASIS]; 3];
        for (dst, src) in basis.iter_mut().zip(p.basis()) {
            dst[..3].copy_from_slice(&src);
        }
        Self {
            kind: ModelKind::Sabr(p),
            basis,
            basis_len: 3,
        }
    }

    pub fn heston(p: HestonParams) -> Self {
        Self {
            kind: ModelKind::Heston(p),
            basis: p.basis(),
            basis_len: MAX_BASIS,
        }
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ModelKind::Sabr(_) => "sabr",
            ModelKind::Heston(_) => "heston",
        }
    }

    pub fn algebra(&self) -> Algebra {
        match self.kind {
            ModelKind::Sabr(_) => Algebra::Witt,
            ModelKind::Heston(_) => Algebra::Heston,
        }
    }

    /// Largest ratio between `sqrt(t)`-order and base index in the scheme
    /// fields; sets the default decomposition cap `order * M`.
    pub fn ratio_m(&self) -> usize {
        match self.kind {
            ModelKind::Sabr(_) => 1,
            ModelKind::Heston(_) => 3,
        }
    }

    /// Row `i` of `C`, so that `V_i = sum_j row[j] W_j`.
    pub fn basis_row(&self, i: usize) -> &[f64] {
        &self.basis[i][..self.basis_len]
    }

    pub fn basis_len(&self) -> usize {
        self.basis_len
    }

    /// `W_index(x)`.
    pub fn base_field(&self, index: usize, x: State) -> [f64; 2] {
        match &self.kind {
            ModelKind::Sabr(p) => p.base_field(index, x),
            ModelKind::Heston(p) => p.base_field(index, x),
        }
    }

    /// `exp(t W_index)(x)`; negative `t` is allowed.
    pub fn base_flow(&self, index: usize, t: f64, x: State) -> State {
        match &self.kind {
            ModelKind::Sabr(p) => p.base_flow(index, t, x),
            ModelKind::Heston(p) => p.base_flow(index, t, x),
        }
    }

    /// `sum_j a[j] W_j(x)`.
    pub fn combined_field(&self, a: &[f64], x: State) -> [f64; 2] {
        let mut out = [0.0; 2];
        for (j, &aj) in a.iter().enumerate() {
            if aj != 0.0 {
                let w = self.base_field(j, x);
                out[0] += aj * w[0];
                out[1] += aj * w[1];
            }
        }
        out
    }

    /// Stratonovich field `V_i(x)` for `i` in `{0, 1, 2}`.
    pub fn raw_field(&self, i: usize, x: State) -> [f64; 2] {
        self.combined_field(self.basis_row(i), x)
    }

    /// Drift of the original Itô SDE (equal to the corrected `V_0`).
    pub fn ito_drift(&self, x: State) -> [f64; 2] {
        match &self.kind {
            ModelKind::Sabr(_) => [0.0, 0.0],
            ModelKind::Heston(p) => p.ito_drift(x),
        }
    }

    /// Itô diffusion column `i` in `{1, 2}`.
    pub fn ito_diffusion(&self, column: usize, x: State) -> [f64; 2] {
        match &self.kind {
            ModelKind::Sabr(p) => p.ito_diffusion(column, x),
            ModelKind::Heston(p) => p.ito_diffusion(column, x),
        }
    }

    /// W-coefficients of `sum_i b[i] V_i`, i.e. the row vector `b C`.
    pub fn w_coefficients(&self, b: &[f64; 3]) -> [f64; MAX_BASIS] {
        let mut a = [0.0; MAX_BASIS];
        for (row, &bi) in self.basis.iter().zip(b) {
            if bi != 0.0 {
                for (aj, &c) in a.iter_mut().zip(row) {
                    *aj += bi * c;
                }
            }
        }
        a
    }

    /// Decomposition of `exp(sum_j a_j W_j)` keeping base indices up to `cap`.
    ///
    /// SABR with `cap <= 4` uses the closed forms; everything else runs the
    /// series recursion at truncation `order` and evaluates at `lambda = 1`.
    pub fn decompose(&self, a: &[f64], cap: usize, order: usize) -> Result<FlowDecomposition> {
        if self.algebra() == Algebra::Witt && cap <= 4 {
            let p = sabr_closed_form_values(a);
            return Ok(FlowDecomposition::from_values(&p[..=cap]));
        }
        let used = a.iter().rposition(|&v| v != 0.0).map_or(0, |l| l + 1);
        let a = &a[..used];
        let max_index = cap.max(used.saturating_sub(1));
        let series = zassenhaus_decompose(a, &self.algebra(), order, max_index)?;
        Ok(FlowDecomposition::from_series(&series, 1.0).truncated(cap))
    }

    /// `exp(sum_j a_j W_j)(x)` through the base-flow decomposition.
    pub fn analytic_flow(&self, a: &[f64], cap: usize, order: usize, x: State) -> Result<State> {
        if let ModelKind::Sabr(p) = &self.kind {
            if cap <= 4 {
                let values = sabr_closed_form_values(a);
                return Ok(p.apply_chain(&values[..=cap], x));
            }
        }
        self.decompose(a, cap, order)?
            .apply(|i, t, s| Ok(self.base_flow(i, t, s)), x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::apply_decomposition;

    fn sabr() -> ModelSpec {
        ModelSpec::sabr(SabrParams::new(0.9, 1.0, -0.7).unwrap())
    }

    fn heston(xi: f64, rho: f64) -> ModelSpec {
        ModelSpec::heston(HestonParams::new(0.02, 1.5, 0.04, xi, rho).unwrap())
    }

    #[test]
    fn parameter_validation() {
        assert!(SabrParams::new(0.5, 1.0, 0.0).is_err());
        assert!(SabrParams::new(1.0, 1.0, 0.0).is_err());
        assert!(SabrParams::new(0.7, -0.1, 0.0).is_err());
        assert!(SabrParams::new(0.7, 0.3, 1.0).is_err());
        assert!(SabrParams::new(0.7, 0.3, f64::NAN).is_err());
        assert!(HestonParams::new(0.0, -1.0, 0.04, 0.3, 0.0).is_err());
        assert!(HestonParams::new(0.0, 1.0, 0.04, 0.3, -1.0).is_err());
        assert!(HestonParams::new(f64::INFINITY, 1.0, 0.04, 0.3, 0.0).is_err());
        assert!(HestonParams::new(0.0, 0.0, 0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn sabr_basis_rows() {
        let m = sabr();
        let c2 = m.basis_row(2);
        assert!((c2[0] + 0.51f64.sqrt()).abs() < 1e-15);
        assert_eq!(&c2[1..], &[0.0, 0.0]);
        assert!((m.basis_row(1)[1] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sabr_v0_matches_stratonovich_correction() {
        // V_0 = -(1/2) sum_i (V_i . grad) V_i for the driftless SABR SDE.
        let (beta, nu, rho) = (0.9f64, 1.0f64, -0.7f64);
        let [x1, x2] = [1.0f64, 0.3f64];
        let want = [
            -0.5 * (beta * x2 * x2 * x1.powf(2.0 * beta - 1.0) + nu * rho * x2 * x1.powf(beta)),
            -0.5 * nu * nu * x2,
        ];
        let got = sabr().raw_field(0, [x1, x2]);
        assert!((got[0] - want[0]).abs() < 1e-12);
        assert!((got[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn raw_field_examples() {
        let m = sabr();
        let v2 = m.raw_field(2, [1.0, 0.3]);
        assert_eq!(v2[0], 0.0);
        assert!((v2[1] - 0.51f64.sqrt() * 0.3).abs() < 1e-15);
        assert!((m.raw_field(1, [1.0, 0.3])[0] - 0.3).abs() < 1e-15);

        let h = heston(0.5, -0.6);
        let v2 = h.raw_field(2, [1.0, 0.04]);
        assert_eq!(v2[0], 0.0);
        assert!((v2[1] - 0.5 * 0.8 * 0.2).abs() < 1e-15);
        // V_1 = (sqrt(x_2) x_1, xi rho sqrt(x_2))
        let v1 = h.raw_field(1, [1.0, 0.09]);
        assert!((v1[0] - 0.3).abs() < 1e-15);
        assert!((v1[1] - 0.3 * 0.5 * -0.6).abs() < 1e-15);
    }

    #[test]
    fn heston_v0_matches_stratonovich_correction() {
        let (mu, kappa, theta, xi, rho) = (0.02, 1.5, 0.04, 0.5, -0.6);
        let h = ModelSpec::heston(HestonParams::new(mu, kappa, theta, xi, rho).unwrap());
        let [x1, x2] = [1.3, 0.07];
        // Ito drift minus half the Stratonovich correction.
        let want = [
            mu * x1 - 0.5 * x1 * x2 - 0.25 * xi * rho * x1,
            kappa * (theta - x2) - 0.25 * xi * xi,
        ];
        let got = h.raw_field(0, [x1, x2]);
        assert!((got[0] - want[0]).abs() < 1e-14);
        assert!((got[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn sabr_flow_examples() {
        let m = sabr();
        let x = m.base_flow(0, 0.2, [1.0, 0.3]);
        assert_eq!(x, [1.0, 0.3 * (-0.2f64).exp()]);
        let x = m.base_flow(1, 0.1, [1.0, 0.3]);
        assert!((x[0] - 1.03f64.powi(10)).abs() < 1e-13);
        assert!((x[0] - 1.343916379).abs() < 1e-9);
        for n in 0..6 {
            let x = m.base_flow(n, 0.0, [0.8, 0.4]);
            assert!((x[0] - 0.8).abs() < 1e-15 && x[1] == 0.4, "n={n}");
        }
    }

    #[test]
    fn heston_flow_examples() {
        let h = heston(0.3, 0.0);
        for t in [-0.02, 0.0, 0.3] {
            let x = h.base_flow(4, t, [1.0, 0.09]);
            assert_eq!(x[0], 1.0);
            assert!((x[1] - (2.0 * t + 0.09)).abs() < 1e-15);
        }
        let x = h.base_flow(3, 0.1, [2.0, 0.25]);
        assert!((x[0] - 2.0 * 0.1f64.exp()).abs() < 1e-15);
        assert_eq!(x[1], 0.25);
        for idx in 0..9 {
            let x = h.base_flow(idx, 0.0, [0.7, 0.2]);
            assert!((x[0] - 0.7).abs() < 1e-15 && (x[1] - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn sabr_chain_matches_generic_composition() {
        let m = sabr();
        let ModelKind::Sabr(p) = m.kind() else {
            unreachable!()
        };
        let cases = [
            [0.1, 0.2, -0.05, 0.01, 0.003],
            [-0.3, -0.1, 0.2, 0.0, -0.01],
            [0.0, 0.0, 0.0, 0.0, 0.0],
            [0.2, 0.0, 0.0, 0.0, 0.0],
        ];
        for values in cases {
            for x in [[1.0, 0.3], [0.05, 1.2], [2.5, 0.6]] {
                let fast = p.apply_chain(&values, x);
                let slow = apply_decomposition(
                    &FlowDecomposition::from_values(&values),
                    |i, t, s| Ok(m.base_flow(i, t, s)),
                    x,
                )
                .unwrap();
                for k in 0..2 {
                    assert!(
                        (fast[k] - slow[k]).abs() <= 1e-13 * slow[k].abs().max(1.0),
                        "{values:?} {x:?}: {fast:?} vs {slow:?}"
                    );
                }
            }
        }
        // Identity away from the positive half plane when only W_0 acts.
        assert_eq!(p.apply_chain(&[0.0, 0.0, 0.0], [-0.2, 0.3]), [-0.2, 0.3]);
    }

    #[test]
    fn decompose_series_route_matches_closed_form_for_sabr() {
        let m = sabr();
        let a = [0.05, -0.03, 0.02];
        let closed = m.decompose(&a, 4, 8).unwrap();
        let series = m.decompose(&a, 5, 12).unwrap();
        for i in 0..=4 {
            assert!((closed.value(i) - series.value(i)).abs() < 1e-14, "P_{i}");
        }
        assert_eq!(series.len(), 6);
    }

    #[test]
    fn w_coefficients_is_row_times_matrix() {
        let m = sabr();
        let a = m.w_coefficients(&[0.5, 2.0, -1.0]);
        for (j, &got) in a.iter().take(3).enumerate() {
            let want: f64 = (0..3)
                .map(|i| [0.5, 2.0, -1.0][i] * m.basis_row(i)[j])
                .sum();
            assert!((got - want).abs() < 1e-15);
        }
        assert!(a[3..].iter().all(|&v| v == 0.0));
    }
}
