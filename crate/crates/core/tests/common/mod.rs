#![allow(dead_code)]

use wittflow::models::{HestonParams, ModelSpec, SabrParams};
use wittflow::State;

pub fn benchmark_sabr() -> ModelSpec {
    ModelSpec::sabr(SabrParams::new(0.9, 1.0, -0.7).unwrap())
}

pub fn sample_heston() -> ModelSpec {
    ModelSpec::heston(HestonParams::new(0.03, 1.5, 0.04, 0.3, -0.7).unwrap())
}

/// Small deterministic generator for oracle sampling (xorshift64*).
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed.max(1))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        (self.0.wrapping_mul(0x2545_f491_4f6c_dd1d) >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Box-Muller; only used to make test draws.
    pub fn normal(&mut self) -> f64 {
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }
}

/// Box `[x1_lo, x1_hi] x [x2_lo, x2_hi]`.
pub type Domain = (f64, f64, f64, f64);

/// States on which the base flow of `index` stays off the clamp at `x = 0`
/// for `|t| <= 0.5` and the 64-step RK4 reference is accurate below 1e-9.
pub fn sabr_flow_domain(index: usize) -> Domain {
    match index {
        0 => (0.1, 2.0, 0.05, 1.0),
        1 => (0.5, 1.2, 0.05, 0.15),
        _ => (0.5, 1.5, 0.05, 0.3),
    }
}

/// Same for the Heston basis `W_{2n} = L_n`, `W_{2n+1} = M_n`. `L_n` with
/// `n >= 1` moves `x_2` by O(1) at `|t| = 0.5`, hence the large `x_2`.
pub fn heston_flow_domain(index: usize) -> Domain {
    match index {
        0 => (0.1, 1.0, 0.05, 0.3),
        2 => (0.1, 1.0, 1.5, 2.5),
        7 => (0.1, 0.4, 2.0, 3.0),
        i if i % 2 == 0 => (0.1, 1.0, 2.0, 3.0),
        _ => (0.1, 0.4, 0.05, 0.6),
    }
}

pub fn draw_state(rng: &mut Rng, d: Domain) -> State {
    [rng.range(d.0, d.1), rng.range(d.2, d.3)]
}

pub fn max_abs_diff(a: State, b: State) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Jacobian of `f` at `x` by fourth-order central differences.
fn jacobian(f: &dyn Fn(State) -> [f64; 2], x: State) -> [[f64; 2]; 2] {
    let mut j = [[0.0; 2]; 2];
    for k in 0..2 {
        let h = 1e-3 * x[k].abs().max(1e-3);
        let at = |s: f64| {
            let mut y = x;
            y[k] += s * h;
            f(y)
        };
        let (p1, m1, p2, m2) = (at(1.0), at(-1.0), at(2.0), at(-2.0));
        for r in 0..2 {
            j[r][k] = (8.0 * (p1[r] - m1[r]) - (p2[r] - m2[r])) / (12.0 * h);
        }
    }
    j
}

/// `[X, Y](x) = DY(x) X(x) - DX(x) Y(x)`, the commutator of the vector fields
/// as first-order differential operators.
pub fn fd_bracket(
    fx: &dyn Fn(State) -> [f64; 2],
    fy: &dyn Fn(State) -> [f64; 2],
    x: State,
) -> [f64; 2] {
    let (jx, jy) = (jacobian(fx, x), jacobian(fy, x));
    let (vx, vy) = (fx(x), fy(x));
    let mut out = [0.0; 2];
    for r in 0..2 {
        out[r] = jy[r][0] * vx[0] + jy[r][1] * vx[1] - jx[r][0] * vy[0] - jx[r][1] * vy[1];
    }
    out
}

/// Taylor coefficients (degree `deg`) of `exp(c lambda)`.
pub fn exp_series(c: f64, deg: usize) -> Vec<f64> {
    let mut out = vec![1.0; deg + 1];
    for k in 1..=deg {
        out[k] = out[k - 1] * c / k as f64;
    }
    out
}

pub fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let deg = a.len().min(b.len()) - 1;
    let mut out = vec![0.0; deg + 1];
    for (i, &ai) in a.iter().enumerate().take(deg + 1) {
        for (j, &bj) in b.iter().enumerate().take(deg + 1 - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// Taylor coefficients in `lambda` of the closed forms `P_1..P_4` with
/// `a -> lambda a` and `a_3 = a_4 = 0`, from the factored expressions
/// `P_1 = a_1 g`, `P_2 = a_2 (e^{2 a_0 l} - 1) / (2 a_0)`,
/// `P_3 = a_1 a_2 g^2 (2e + 1) / 6`, `P_4 = a_1^2 a_2 g^3 (3e + 1) / 12`,
/// where `e = e^{a_0 l}` and `g = (e - 1) / a_0`. Every coefficient is a
/// product of `a_0` powers and positive rationals, so nothing cancels.
pub fn closed_form_taylor(a: [f64; 3], deg: usize) -> [Vec<f64>; 4] {
    let [a0, a1, a2] = a;
    let e = exp_series(a0, deg);
    // g_k = a_0^{k-1} / k!
    let g: Vec<f64> = (0..=deg)
        .map(|k| if k == 0 { 0.0 } else { e[k] / a0 })
        .collect();
    let e2 = exp_series(2.0 * a0, deg);
    let g2lin: Vec<f64> = (0..=deg)
        .map(|k| if k == 0 { 0.0 } else { e2[k] / (2.0 * a0) })
        .collect();
    let lin = |c: f64, s: &[f64]| -> Vec<f64> {
        s.iter()
            .enumerate()
            .map(|(k, v)| c * v + if k == 0 { 1.0 } else { 0.0 })
            .collect()
    };
    let gg = series_mul(&g, &g);
    let ggg = series_mul(&gg, &g);
    let p1 = g.iter().map(|v| a1 * v).collect();
    let p2 = g2lin.iter().map(|v| a2 * v).collect();
    let p3 = series_mul(&gg, &lin(2.0, &e))
        .iter()
        .map(|v| a1 * a2 * v / 6.0)
        .collect();
    let p4 = series_mul(&ggg, &lin(3.0, &e))
        .iter()
        .map(|v| a1 * a1 * a2 * v / 12.0)
        .collect();
    [p1, p2, p3, p4]
}
