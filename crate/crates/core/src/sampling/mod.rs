//! Uniform sources (Sobol or pseudo-random), the inverse normal transform,
//! and the map from sample index to per-step draws.
//!
//! Sample indices start at 1. Coordinates are laid out step-major, so earlier
//! steps get the lower (better distributed) Sobol dimensions.

mod normal;
mod prng;
mod sobol;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::schemes::{Bernoulli, Scheme, StepDraws};

pub use normal::inv_normal_cdf;
pub use prng::{fill_uniforms, to_open_unit};
pub use sobol::{sobol_point, SobolStream, SobolTable};

/// Which uniform generator feeds the draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceKind {
    /// ChaCha8, keyed by `seed`, one stream per sample.
    Prng { seed: u64 },
    /// Unscrambled Sobol; sample `m` is sequence point `skip + m`.
    Sobol { skip: u64 },
}

impl SourceKind {
    pub fn name(&self) -> &'static str {
        match self {
            SourceKind::Prng { .. } => "prng",
            SourceKind::Sobol { .. } => "sobol",
        }
    }
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `sobol` or `prng`, as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    Sobol,
    Prng,
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sobol" => Ok(Sampling::Sobol),
            "prng" => Ok(Sampling::Prng),
            other => Err(format!(
                "unknown sampling `{other}` (expected sobol or prng)"
            )),
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sampling::Sobol => "sobol",
            Sampling::Prng => "prng",
        })
    }
}

/// What a single uniform coordinate becomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Slot of `StepDraws::normals`.
    Normal(usize),
    Bernoulli,
}

/// Coordinate layout for one scheme and grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DrawPlan {
    scheme: Scheme,
    n_steps: usize,
}

impl DrawPlan {
    pub fn new(scheme: Scheme, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        Ok(Self { scheme, n_steps })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dimension(&self) -> usize {
        self.n_steps * self.scheme.coords_per_step()
    }

    /// `(step, role)` of coordinate `coord`.
    pub fn role(&self, coord: usize) -> (usize, Role) {
        let per = self.scheme.coords_per_step();
        let (step, slot) = (coord / per, coord % per);
        let role = match (self.scheme, slot) {
            (Scheme::Nv, 2) => Role::Bernoulli,
            (_, k) => Role::Normal(k),
        };
        (step, role)
    }

    /// Converts one sample's uniforms into per-step draws.
    pub fn fill(&self, uniforms: &[f64], out: &mut Vec<StepDraws>) {
        debug_assert_eq!(uniforms.len(), self.dimension());
        let per = self.scheme.coords_per_step();
        out.clear();
        out.extend(uniforms.chunks_exact(per).map(|u| {
            let mut d = StepDraws::default();
            for (coord, &v) in u.iter().enumerate() {
                match self.role(coord).1 {
                    Role::Normal(k) => d.normals[k] = normal::quantile(v),
                    Role::Bernoulli => {
                        d.bernoulli = if v < 0.5 {
                            Bernoulli::Plus
                        } else {
                            Bernoulli::Minus
                        }
                    }
                }
            }
            d
        }));
    }
}

/// A uniform generator of fixed dimension, addressable by sample index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleSource {
    kind: SourceKind,
    dimension: usize,
}

impl SampleSource {
    pub fn new(kind: SourceKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid("dimension", "must be at least 1"));
        }
        if let SourceKind::Sobol { .. } = kind {
            let available = SobolTable::bundled().max_dimension();
            if dimension > available {
                return Err(Error::SobolDimension {
                    requested: dimension,
                    available,
                });
            }
        }
        Ok(Self { kind, dimension })
    }

    pub fn for_plan(kind: SourceKind, plan: &DrawPlan) -> Result<Self> {
        Self::new(kind, plan.dimension())
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    fn sobol_index(skip: u64, sample: u64) -> Result<u64> {
        skip.checked_add(sample).ok_or(Error::SampleIndex(sample))
    }

    /// Uniforms of sample `sample >= 1`, by random access.
    pub fn uniforms(&self, sample: u64, out: &mut [f64]) -> Result<()> {
        if sample == 0 {
            return Err(Error::SampleIndex(0));
        }
        assert_eq!(
            out.len(),
            self.dimension,
            "buffer length must equal the source dimension"
        );
        match self.kind {
            SourceKind::Prng { seed } => {
                fill_uniforms(seed, sample, out);
                Ok(())
            }
            SourceKind::Sobol { skip } => {
                SobolTable::bundled().point_into(Self::sobol_index(skip, sample)?, out)
            }
        }
    }

    /// Sequential generator over samples `first, first + 1, ...`.
    pub fn stream(&self, first: u64) -> Result<UniformStream> {
        if first == 0 {
            return Err(Error::SampleIndex(0));
        }
        let inner = match self.kind {
            SourceKind::Prng { seed } => StreamInner::Prng { seed },
            SourceKind::Sobol { skip } => StreamInner::Sobol(
                SobolTable::bundled().stream(Self::sobol_index(skip, first)?, self.dimension)?,
            ),
        };
        Ok(UniformStream {
            inner,
            next: first,
            dimension: self.dimension,
        })
    }
}

#[derive(Debug, Clone)]
enum StreamInner {
    Prng { seed: u64 },
    Sobol(SobolStream<'static>),
}

/// Successive samples from a [`SampleSource`]; Sobol advances by one XOR per
/// coordinate instead of a full gray-code evaluation.
#[derive(Debug, Clone)]
pub struct UniformStream {
    inner: StreamInner,
    next: u64,
    dimension: usize,
}

impl UniformStream {
    /// Fills `out` with the next sample's uniforms and returns its index.
    pub fn next_into(&mut self, out: &mut [f64]) -> Result<u64> {
        assert_eq!(
            out.len(),
            self.dimension,
            "buffer length must equal the source dimension"
        );
        let sample = self.next;
        match &mut self.inner {
            StreamInner::Prng { seed } => fill_uniforms(*seed, sample, out),
            StreamInner::Sobol(s) => {
                s.next_into(out)?;
            }
        }
        self.next += 1;
        Ok(sample)
    }
}

/// All step draws of sample `sample`.
pub fn draws_for_sample(
    src: &SampleSource,
    plan: &DrawPlan,
    sample: u64,
) -> Result<Vec<StepDraws>> {
    if src.dimension() != plan.dimension() {
        return Err(invalid("dimension", "source and plan disagree"));
    }
    let mut u = vec![0.0; plan.dimension()];
    src.uniforms(sample, &mut u)?;
    let mut out = Vec::with_capacity(plan.n_steps());
    plan.fill(&u, &mut out);
    Ok(out)
}
