use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Polynomial in the bookkeeping variable `lambda`, truncated at a fixed degree.
///
/// Every arithmetic result keeps exactly `degree + 1` coefficients; products
/// discard everything above the truncation degree.
#[derive(Clone, PartialEq)]
pub struct LambdaSeries {
    coeffs: Vec<f64>,
}

impl LambdaSeries {
    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![0.0; degree + 1],
        }
    }

    /// Builds a series from its coefficients, lowest degree first. The
    /// truncation degree is `coeffs.len() - 1`.
    ///
    /// # Panics
    /// Panics if `coeffs` is empty.
    pub fn from_coeffs(coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least a constant term"
        );
        Self { coeffs }
    }

    pub fn constant(value: f64, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        s.coeffs[0] = value;
        s
    }

    /// `c * lambda`, truncated at `degree`.
    pub fn monomial(c: f64, power: usize, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if power <= degree {
            s.coeffs[power] = c;
        }
        s
    }

    /// Taylor expansion of `scale * exp(rate * lambda)` up to `degree`.
    pub fn exp_linear(scale: f64, rate: f64, degree: usize) -> Self {
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut term = scale;
        for k in 0..=degree {
            coeffs.push(term);
            term *= rate / (k + 1) as f64;
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Lowest degree with a non-zero coefficient, `None` for the zero series.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0.0)
    }

    /// Horner evaluation of `sum_k coeffs[k] * x^k`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Antiderivative vanishing at `lambda = 0`; the top coefficient of
    /// `self` falls off the truncation.
    pub fn integrate(&self) -> Self {
        let d = self.degree();
        let mut out = Self::zero(d);
        for k in 1..=d {
            out.coeffs[k] = self.coeffs[k - 1] / k as f64;
        }
        out
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    /// `self += c * (a * b)`, truncated.
    pub fn add_scaled_product(&mut self, c: f64, a: &Self, b: &Self) {
        let d = self.degree();
        debug_assert_eq!(a.degree(), d);
        debug_assert_eq!(b.degree(), d);
        for (i, &x) in a.coeffs.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let cx = c * x;
            for (j, &y) in b.coeffs[..=d - i].iter().enumerate() {
                self.coeffs[i + j] += cx * y;
            }
        }
    }

    fn check_degree(&self, other: &Self) {
        assert_eq!(
            self.degree(),
            other.degree(),
            "series truncation degrees differ"
        );
    }
}

impl fmt::Debug for LambdaSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl Add for &LambdaSeries {
    type Output = LambdaSeries;

    fn add(self, rhs: Self) -> LambdaSeries {
        self.check_degree(rhs);
        LambdaSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &LambdaSeries {
    type Output = LambdaSeries;

    fn sub(self, rhs: Self) -> LambdaSeries {
        self.check_degree(rhs);
        LambdaSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&rhs.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &LambdaSeries {
    type Output = LambdaSeries;

    fn mul(self, rhs: Self) -> LambdaSeries {
        self.check_degree(rhs);
        let mut out = LambdaSeries::zero(self.degree());
        out.add_scaled_product(1.0, self, rhs);
        out
    }
}

impl Neg for &LambdaSeries {
    type Output = LambdaSeries;

    fn neg(self) -> LambdaSeries {
        self.scale(-1.0)
    }
}

impl AddAssign<&LambdaSeries> for LambdaSeries {
    fn add_assign(&mut self, rhs: &LambdaSeries) {
        self.check_degree(rhs);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}
