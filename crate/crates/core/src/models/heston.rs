use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::State;

/// Heston parameters for `dX_1 = mu X_1 dt + sqrt(X_{2+}) X_1 dB^1`,
/// `dX_2 = kappa (theta - X_{2+}) dt + xi sqrt(X_{2+}) (rho dB^1 + sqrt(1 - rho^2) dB^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HestonParams {
    mu: f64,
    kappa: f64,
    theta: f64,
    xi: f64,
    rho: f64,
}

impl HestonParams {
    pub fn new(mu: f64, kappa: f64, theta: f64, xi: f64, rho: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(invalid("mu", format!("must be finite, got {mu}")));
        }
        for (name, v) in [("kappa", kappa), ("theta", theta), ("xi", xi)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(
                    name,
                    format!("must be finite and non-negative, got {v}"),
                ));
            }
        }
        if !(rho > -1.0 && rho < 1.0) {
            return Err(invalid("rho", format!("must lie in (-1, 1), got {rho}")));
        }
        Ok(Self {
            mu,
            kappa,
            theta,
            xi,
            rho,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn rho_bar(&self) -> f64 {
        (1.0 - self.rho * self.rho).sqrt()
    }

    /// Rows of `C` over `W_0 ..= W_5` with `W_{2n} = L_n`, `W_{2n+1} = M_n`.
    pub(super) fn basis(&self) -> [[f64; 6]; 3] {
        let (mu, kappa, theta, xi, rho) = (self.mu, self.kappa, self.theta, self.xi, self.rho);
        [
            [
                -0.5 * kappa,
                -0.25,
                0.0,
                0.0,
                0.5 * (kappa * theta - 0.25 * xi * xi),
                0.5 * (mu - 0.25 * xi * rho),
            ],
            [0.0, 0.0, 0.5 * xi * rho, 0.5, 0.0, 0.0],
            [0.0, 0.0, 0.5 * xi * self.rho_bar(), 0.0, 0.0, 0.0],
        ]
    }

    /// `L_n = 2 x_{2+}^{1-n/2} d/dx_2` at even indices,
    /// `M_n = 2 x_1 x_{2+}^{1-n/2} d/dx_1` at odd ones.
    pub fn base_field(&self, index: usize, x: State) -> [f64; 2] {
        let n = (index / 2) as f64;
        let s = 2.0 * x[1].max(0.0).powf(1.0 - 0.5 * n);
        if index.is_multiple_of(2) {
            [0.0, s]
        } else {
            [x[0] * s, 0.0]
        }
    }

    /// `exp(t W^H_index)(x)`.
    pub fn base_flow(&self, index: usize, t: f64, x: State) -> State {
        let n = index / 2;
        if !index.is_multiple_of(2) {
            // x_2 is constant along M_n, so the x_1 equation is linear.
            let rate = 2.0 * x[1].max(0.0).powf(1.0 - 0.5 * n as f64);
            return [x[0] * (rate * t).exp(), x[1]];
        }
        if n == 0 {
            return [x[0], x[1] * (2.0 * t).exp()];
        }
        let nf = n as f64;
        let y = nf * t + x[1].max(0.0).powf(0.5 * nf);
        [x[0], y.max(0.0).powf(2.0 / nf)]
    }

    pub fn ito_drift(&self, x: State) -> [f64; 2] {
        [self.mu * x[0], self.kappa * (self.theta - x[1].max(0.0))]
    }

    pub fn ito_diffusion(&self, column: usize, x: State) -> [f64; 2] {
        let vol = x[1].max(0.0).sqrt();
        match column {
            1 => [vol * x[0], self.xi * self.rho * vol],
            2 => [0.0, self.xi * self.rho_bar() * vol],
            _ => [0.0, 0.0],
        }
    }
}
