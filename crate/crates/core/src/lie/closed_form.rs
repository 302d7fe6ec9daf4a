//! Closed-form decomposition coefficients `P_0 ..= P_4` at `lambda = 1` for the
//! Witt table `alpha(n, m) = n - m`.
//!
//! Every formula is rewritten in terms of `u = expm1(a_0)` and
//! `q = expm1(a_0) / a_0`, which removes the removable singularity at
//! `a_0 = 0` except inside `q` itself. `q` switches to its Taylor polynomial
//! below [`A0_LIMIT`].

use super::decompose::FlowDecomposition;

/// Below this `|a_0|` the ratio `expm1(a_0) / a_0` is taken from its series.
pub const A0_LIMIT: f64 = 1e-4;

/// `expm1(x) / x`, continuous through `x = 0`.
pub fn expm1_ratio(x: f64) -> f64 {
    if x.abs() < A0_LIMIT {
        // sum_{k=0}^{6} x^k / (k + 1)!
        1.0 + x
            * (1.0 / 2.0
                + x * (1.0 / 6.0
                    + x * (1.0 / 24.0
                        + x * (1.0 / 120.0 + x * (1.0 / 720.0 + x * (1.0 / 5040.0))))))
    } else {
        x.exp_m1() / x
    }
}

/// `[P_0, P_1, P_2, P_3, P_4]` for `a = (a_0, a_1, a_2, a_3, a_4)`; missing
/// trailing entries count as zero and entries past `a_4` cannot influence
/// these five values.
pub fn sabr_closed_form_values(a: &[f64]) -> [f64; 5] {
    let get = |i: usize| a.get(i).copied().unwrap_or(0.0);
    let (a0, a1, a2, a3, a4) = (get(0), get(1), get(2), get(3), get(4));

    let u = a0.exp_m1();
    let e = 1.0 + u;
    let q = expm1_ratio(a0);
    let q2 = q * q;

    let p1 = a1 * q;
    let p2 = a2 * q * (2.0 + u) / 2.0;
    let p3 = a1 * a2 * q2 * (3.0 + 2.0 * u) / 6.0 + a3 * q * (1.0 + e + e * e) / 3.0;
    let p4 = a1 * a1 * a2 * q2 * q * (4.0 + 3.0 * u) / 12.0
        + a1 * a3 * q2 * (12.0 + u * (16.0 + 6.0 * u)) / 12.0
        + a4 * q * (1.0 + e * (1.0 + e * (1.0 + e))) / 4.0;

    [a0, p1, p2, p3, p4]
}

pub fn sabr_closed_form_p(a: &[f64]) -> FlowDecomposition {
    FlowDecomposition::from_values(&sabr_closed_form_values(a))
}
