use std::fmt;
use std::str::FromStr;

/// Structure constants of a graded family of vector fields:
/// `[W_n, W_m] = alpha(n, m) W_{n+m}`.
///
/// Implementations must be antisymmetric, `alpha(n, m) == -alpha(m, n)`.
pub trait StructureTable {
    fn alpha(&self, n: usize, m: usize) -> f64;
}

impl<F> StructureTable for F
where
    F: Fn(usize, usize) -> f64,
{
    fn alpha(&self, n: usize, m: usize) -> f64 {
        self(n, m)
    }
}

/// Witt-type constants `alpha(n, m) = n - m` (the SABR family).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WittTable;

impl StructureTable for WittTable {
    fn alpha(&self, n: usize, m: usize) -> f64 {
        n as f64 - m as f64
    }
}

/// Constants of the interleaved Heston basis, `W_{2n} = L_n`, `W_{2n+1} = M_n`.
///
/// The odd/even case is `(n - 5) / 2`; the even/odd case follows from
/// antisymmetry.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HestonTable;

impl StructureTable for HestonTable {
    fn alpha(&self, n: usize, m: usize) -> f64 {
        let (n_f, m_f) = (n as f64, m as f64);
        match (n % 2, m % 2) {
            (1, 1) => 0.0,
            (1, 0) => (n_f - 5.0) / 2.0,
            (0, 1) => -(m_f - 5.0) / 2.0,
            _ => (n_f - m_f) / 2.0,
        }
    }
}

/// The two algebras shipped with the crate, selectable at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algebra {
    Witt,
    Heston,
}

impl StructureTable for Algebra {
    fn alpha(&self, n: usize, m: usize) -> f64 {
        match self {
            Algebra::Witt => WittTable.alpha(n, m),
            Algebra::Heston => HestonTable.alpha(n, m),
        }
    }
}

impl FromStr for Algebra {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "witt" | "sabr" => Ok(Algebra::Witt),
            "heston" => Ok(Algebra::Heston),
            other => Err(format!(
                "unknown algebra `{other}` (expected witt or heston)"
            )),
        }
    }
}

impl fmt::Display for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algebra::Witt => "witt",
            Algebra::Heston => "heston",
        })
    }
}
