use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::State;

/// SABR parameters for `dX_1 = X_2 X_{1+}^beta dB^1`,
/// `dX_2 = nu X_2 (rho dB^1 + sqrt(1 - rho^2) dB^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SabrParams {
    beta: f64,
    nu: f64,
    rho: f64,
}

impl SabrParams {
    pub fn new(beta: f64, nu: f64, rho: f64) -> Result<Self> {
        if !(beta > 0.5 && beta < 1.0) {
            return Err(invalid("beta", format!("must lie in (1/2, 1), got {beta}")));
        }
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(invalid(
                "nu",
                format!("must be finite and non-negative, got {nu}"),
            ));
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(invalid("rho", format!("must lie in (-1, 1), got {rho}")));
        }
        Ok(Self { beta, nu, rho })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn rho_bar(&self) -> f64 {
        (1.0 - self.rho * self.rho).sqrt()
    }

    /// Rows of `C`: `V_i = sum_j C[i][j] W_j`.
    pub(super) fn basis(&self) -> [[f64; 3]; 3] {
        let (b, nu, rho) = (self.beta, self.nu, self.rho);
        [
            [
                0.5 * nu * nu,
                0.5 * (b - 1.0) * nu * rho,
                0.5 * b * (b - 1.0),
            ],
            [-nu * rho, 1.0 - b, 0.0],
            [-nu * self.rho_bar(), 0.0, 0.0],
        ]
    }

    /// `W_0 = -x_2 d/dx_2`,
    /// `W_n = x_{1+}^{1 - n(1-beta)} x_2^n / (1 - beta) d/dx_1`.
    pub fn base_field(&self, n: usize, x: State) -> [f64; 2] {
        if n == 0 {
            return [0.0, -x[1]];
        }
        let k = 1.0 - self.beta;
        let nf = n as f64;
        [
            x[0].max(0.0).powf(1.0 - nf * k) * x[1].powi(n as i32) / k,
            0.0,
        ]
    }

    /// `exp(t W_n)(x)`.
    pub fn base_flow(&self, n: usize, t: f64, x: State) -> State {
        if n == 0 {
            return [x[0], x[1] * (-t).exp()];
        }
        let nk = n as f64 * (1.0 - self.beta);
        let y = n as f64 * x[1].powi(n as i32) * t + x[0].max(0.0).powf(nk);
        [y.max(0.0).powf(1.0 / nk), x[1]]
    }

    /// Composes `exp(p_0 W_0)` then `exp(p_n W_n)` for `n = 1, 2, ...` in the
    /// coordinate `z = x_{1+}^{1-beta}`, where the `W_n` flow becomes
    /// `z -> (n x_2^n t + z^n)_+^{1/n}`. Equivalent to folding
    /// [`Self::base_flow`] over the entries, with two `powf` calls in total.
    pub fn apply_chain(&self, p: &[f64], x: State) -> State {
        let Some((&p0, rest)) = p.split_first() else {
            return x;
        };
        let x2 = if p0 != 0.0 { x[1] * (-p0).exp() } else { x[1] };
        if rest.iter().all(|&v| v == 0.0) {
            return [x[0], x2];
        }
        let k = 1.0 - self.beta;
        let mut z = x[0].max(0.0).powf(k);
        let mut x2n = 1.0;
        for (i, &t) in rest.iter().enumerate() {
            let n = i + 1;
            x2n *= x2;
            if t == 0.0 {
                continue;
            }
            let y = (n as f64 * x2n * t + z.powi(n as i32)).max(0.0);
            z = match n {
                1 => y,
                2 => y.sqrt(),
                3 => y.cbrt(),
                4 => y.sqrt().sqrt(),
                _ => y.powf(1.0 / n as f64),
            };
        }
        [z.powf(1.0 / k), x2]
    }

    /// Itô diffusion column `i` in `{1, 2}`.
    pub fn ito_diffusion(&self, column: usize, x: State) -> [f64; 2] {
        match column {
            1 => [
                x[1] * x[0].max(0.0).powf(self.beta),
                self.nu * self.rho * x[1],
            ],
            2 => [0.0, self.nu * self.rho_bar() * x[1]],
            _ => [0.0, 0.0],
        }
    }
}
