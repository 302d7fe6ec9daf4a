use std::collections::BTreeMap;

use super::series::LambdaSeries;
use super::structure::StructureTable;
use crate::error::{invalid, Error, Result};
use crate::State;

/// Element `sum_n Q_n W_n` of the span, with `lambda`-series coefficients.
///
/// Absent indices are zero. All members share one truncation degree.
#[derive(Clone, Debug, PartialEq)]
pub struct LieSeries {
    degree: usize,
    terms: BTreeMap<usize, LambdaSeries>,
}

impl LieSeries {
    pub fn new(degree: usize) -> Self {
        Self {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, index: usize) -> Option<&LambdaSeries> {
        self.terms.get(&index)
    }

    /// The `W_index` coefficient, zero when absent.
    pub fn component(&self, index: usize) -> LambdaSeries {
        self.terms
            .get(&index)
            .cloned()
            .unwrap_or_else(|| LambdaSeries::zero(self.degree))
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &LambdaSeries)> {
        self.terms.iter().map(|(&n, s)| (n, s))
    }

    /// Adds `series` to the `W_index` coefficient. Zero results are pruned.
    pub fn add_term(&mut self, index: usize, series: &LambdaSeries) {
        assert_eq!(
            series.degree(),
            self.degree,
            "series truncation degrees differ"
        );
        if series.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(index)
            .or_insert_with(|| LambdaSeries::zero(series.degree()));
        *slot += series;
        if slot.is_zero() {
            self.terms.remove(&index);
        }
    }

    fn take(&mut self, index: usize) -> LambdaSeries {
        self.terms
            .remove(&index)
            .unwrap_or_else(|| LambdaSeries::zero(self.degree))
    }

    /// `[c W_k, self]`, dropping indices above `max_index`.
    fn bracket_from_left<T>(&self, k: usize, c: &LambdaSeries, table: &T, max_index: usize) -> Self
    where
        T: StructureTable + ?Sized,
    {
        let mut out = Self::new(self.degree);
        for (i, g) in self.iter() {
            let target = k + i;
            if target > max_index {
                continue;
            }
            let alpha = table.alpha(k, i);
            if alpha == 0.0 {
                continue;
            }
            let mut s = LambdaSeries::zero(self.degree);
            s.add_scaled_product(alpha, c, g);
            out.add_term(target, &s);
        }
        out
    }

    /// `exp(ad_{-p W_k})` applied to `self`. The sum is finite because `p`
    /// has no constant term, so each bracket raises the `lambda`-valuation.
    fn conjugate<T>(&self, k: usize, p: &LambdaSeries, table: &T, max_index: usize) -> Self
    where
        T: StructureTable + ?Sized,
    {
        debug_assert_eq!(p.coeff(0), 0.0);
        let neg_p = -p;
        let mut result = self.clone();
        let mut term = self.clone();
        for j in 1..=self.degree {
            term = term.bracket_from_left(k, &neg_p.scale(1.0 / j as f64), table, max_index);
            if term.is_empty() {
                break;
            }
            for (i, s) in term.iter() {
                result.add_term(i, s);
            }
        }
        result
    }
}

/// `F_0 = sum_{i >= 1} a_i exp(-alpha(0, i) a_0 lambda) W_i`, expanded to
/// `degree`.
pub fn initial_f0<T>(a: &[f64], table: &T, degree: usize) -> LieSeries
where
    T: StructureTable + ?Sized,
{
    let a0 = a.first().copied().unwrap_or(0.0);
    let mut f = LieSeries::new(degree);
    for (i, &ai) in a.iter().enumerate().skip(1) {
        if ai != 0.0 {
            let rate = -table.alpha(0, i) * a0;
            f.add_term(i, &LambdaSeries::exp_linear(ai, rate, degree));
        }
    }
    f
}

/// Factors `exp(lambda sum_i a_i W_i)` into `exp(P_0 W_0) exp(P_1 W_1) ...`
/// and returns `P_0 ..= P_max_index` as series truncated at degree `order`.
///
/// Each `P_n` vanishes at `lambda = 0` and `P_0 = a_0 lambda`. The recursion
/// reads off `P_{n+1}' = pi_{n+1} F_n`, removes that component to get `G_n`,
/// and conjugates: `F_{n+1} = exp(ad_{-P_{n+1} W_{n+1}}) G_n`.
pub fn zassenhaus_decompose<T>(
    a: &[f64],
    table: &T,
    order: usize,
    max_index: usize,
) -> Result<Vec<LambdaSeries>>
where
    T: StructureTable + ?Sized,
{
    if order < 1 {
        return Err(Error::InvalidOrder(order));
    }
    if !a.is_empty() && max_index + 1 < a.len() {
        return Err(invalid(
            "max_index",
            format!(
                "{max_index} is below the highest input index {}",
                a.len() - 1
            ),
        ));
    }
    let degree = order;
    let a0 = a.first().copied().unwrap_or(0.0);

    let mut out = Vec::with_capacity(max_index + 1);
    out.push(LambdaSeries::monomial(a0, 1, degree));

    let mut f = initial_f0(a, table, degree);
    for k in 1..=max_index {
        let p = f.take(k).integrate();
        if !p.is_zero() && !f.is_empty() {
            f = f.conjugate(k, &p, table, max_index);
        }
        out.push(p);
    }
    Ok(out)
}

/// Ordered product `exp(p_0 W_{i_0}) exp(p_1 W_{i_1}) ...` with strictly
/// increasing indices. As a map on states the first entry acts first.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FlowDecomposition {
    entries: Vec<(usize, f64)>,
}

impl FlowDecomposition {
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(invalid(
                "entries",
                "decomposition indices must be strictly increasing",
            ));
        }
        Ok(Self { entries })
    }

    /// `values[i]` becomes the time attached to `W_i`.
    pub fn from_values(values: &[f64]) -> Self {
        Self {
            entries: values.iter().copied().enumerate().collect(),
        }
    }

    /// Evaluates each `P_i` at `lambda` (use `sqrt(t)` for `Psi_t`, or 1 when
    /// the scale is already folded into the coefficients).
    pub fn from_series(series: &[LambdaSeries], lambda: f64) -> Self {
        Self {
            entries: series.iter().map(|p| p.eval(lambda)).enumerate().collect(),
        }
    }

    /// Drops every entry with index above `cap`.
    pub fn truncated(mut self, cap: usize) -> Self {
        self.entries.retain(|&(i, _)| i <= cap);
        self
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value(&self, index: usize) -> f64 {
        self.entries
            .iter()
            .find(|&&(i, _)| i == index)
            .map_or(0.0, |&(_, v)| v)
    }

    pub fn apply<F>(&self, flows: F, x: State) -> Result<State>
    where
        F: FnMut(usize, f64, State) -> Result<State>,
    {
        apply_decomposition(self, flows, x)
    }
}

/// Composes the base flows of `dec` onto `x`, lowest index first.
///
/// Zero-time factors are the identity and are skipped, so a field that is
/// singular at the current state is never evaluated unless it actually acts.
pub fn apply_decomposition<F>(dec: &FlowDecomposition, mut flows: F, x: State) -> Result<State>
where
    F: FnMut(usize, f64, State) -> Result<State>,
{
    dec.entries
        .iter()
        .filter(|&&(_, time)| time != 0.0)
        .try_fold(x, |state, &(index, time)| flows(index, time, state))
}
