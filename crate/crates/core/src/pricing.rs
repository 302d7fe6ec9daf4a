//! Monte Carlo / quasi-Monte Carlo pricing of a European call on `X_1`.
//!
//! Samples are processed in fixed chunks of [`CHUNK`]. Each chunk sums its
//! payoffs pairwise, and chunk sums are reduced pairwise in chunk order, so the
//! estimate does not depend on how many worker threads ran the chunks.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::models::{HestonParams, ModelKind, ModelSpec, SabrParams};
use crate::sampling::{DrawPlan, SampleSource, SourceKind};
use crate::schemes::{simulate_path, SchemeConfig, StepDraws};
use crate::State;

/// Samples per work unit.
pub const CHUNK: u64 = 4096;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "WITTFLOW_THREADS";

/// Benchmark price of the SABR call used as the default reference.
pub const SABR_REFERENCE: f64 = 0.09400046;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelKind,
    pub x0: State,
    pub scheme: SchemeConfig,
    pub n_steps: usize,
    pub samples: u64,
    pub source: SourceKind,
    pub strike: f64,
    pub maturity: f64,
    /// Worker count; `None` defers to `WITTFLOW_THREADS`, then to rayon.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    /// SABR with `beta = 0.9, nu = 1, rho = -0.7`, `x0 = (1, 0.3)`, `T = 1`,
    /// `K = 1.05`, NV on the analytic backend, Sobol, 16 steps, 1e5 samples.
    fn default() -> Self {
        Self {
            model: ModelKind::Sabr(SabrParams::new(0.9, 1.0, -0.7).expect("valid defaults")),
            x0: [1.0, 0.3],
            scheme: SchemeConfig::default(),
            n_steps: 16,
            samples: 100_000,
            source: SourceKind::Sobol { skip: 0 },
            strike: 1.05,
            maturity: 1.0,
            threads: None,
        }
    }
}

impl RunConfig {
    /// Re-validates the model parameters (deserialization bypasses the
    /// constructors) and builds the model.
    pub fn spec(&self) -> Result<ModelSpec> {
        Ok(match self.model {
            ModelKind::Sabr(p) => ModelSpec::sabr(SabrParams::new(p.beta(), p.nu(), p.rho())?),
            ModelKind::Heston(p) => ModelSpec::heston(HestonParams::new(
                p.mu(),
                p.kappa(),
                p.theta(),
                p.xi(),
                p.rho(),
            )?),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(invalid("samples", "must be at least 1"));
        }
        if self.n_steps == 0 {
            return Err(invalid("n_steps", "must be at least 1"));
        }
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            return Err(invalid(
                "maturity",
                format!("must be positive, got {}", self.maturity),
            ));
        }
        if !self.strike.is_finite() {
            return Err(invalid("strike", "must be finite"));
        }
        if !self.x0.iter().all(|v| v.is_finite()) {
            return Err(invalid("x0", "must be finite"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        self.scheme.validate()?;
        self.spec().map(|_| ())
    }

    fn worker_count(&self) -> Option<usize> {
        self.threads.or_else(|| {
            std::env::var(THREADS_ENV)
                .ok()
                .and_then(|v| v.trim().parse::<usize>().ok())
                .filter(|&n| n > 0)
        })
    }
}

/// How the draws were produced, echoed for provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingInfo {
    pub source: SourceKind,
    pub generator: String,
    pub normal_transform: String,
    pub dimension: usize,
    pub first_sample: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingReport {
    pub estimate: f64,
    /// Sample standard error; only meaningful for pseudo-random draws.
    pub standard_error: Option<f64>,
    pub samples: u64,
    pub n_steps: usize,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub config: RunConfig,
    pub version: String,
    pub sampling: SamplingInfo,
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    sum: f64,
    sum_sq: f64,
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn run_chunk(
    cfg: &RunConfig,
    spec: &ModelSpec,
    plan: &DrawPlan,
    src: &SampleSource,
    chunk: u64,
) -> Result<Moments> {
    let first = chunk * CHUNK + 1;
    let last = (first + CHUNK - 1).min(cfg.samples);
    let mut stream = src.stream(first)?;
    let mut uniforms = vec![0.0; plan.dimension()];
    let mut draws: Vec<StepDraws> = Vec::with_capacity(plan.n_steps());
    let mut payoffs = Vec::with_capacity((last + 1 - first) as usize);
    for _ in first..=last {
        let m = stream.next_into(&mut uniforms)?;
        plan.fill(&uniforms, &mut draws);
        let x = simulate_path(
            spec,
            &cfg.scheme,
            plan.n_steps(),
            cfg.maturity,
            cfg.x0,
            &draws,
        )?;
        let f = (x[0] - cfg.strike).max(0.0);
        if !f.is_finite() || !x[0].is_finite() {
            return Err(Error::NonFinitePayoff(m));
        }
        payoffs.push(f);
    }
    let sum = pairwise_sum(&payoffs);
    payoffs.iter_mut().for_each(|f| *f *= *f);
    Ok(Moments {
        sum,
        sum_sq: pairwise_sum(&payoffs),
    })
}

/// Discount-free call price `E[(X_1(T) - K)^+]` by simulation.
pub fn price(cfg: &RunConfig) -> Result<PricingReport> {
    cfg.validate()?;
    let start = Instant::now();
    let spec = cfg.spec()?;
    let plan = DrawPlan::new(cfg.scheme.scheme, cfg.n_steps)?;
    let src = SampleSource::for_plan(cfg.source, &plan)?;
    let chunks = cfg.samples.div_ceil(CHUNK);

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.worker_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid("threads", e.to_string()))?;
    let threads = pool.current_num_threads();

    let parts = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(cfg, &spec, &plan, &src, c))
            .collect::<Result<Vec<_>>>()
    })?;
    let sums: Vec<f64> = parts.iter().map(|m| m.sum).collect();
    let squares: Vec<f64> = parts.iter().map(|m| m.sum_sq).collect();
    let n = cfg.samples as f64;
    let estimate = pairwise_sum(&sums) / n;

    let standard_error = match cfg.source {
        SourceKind::Prng { .. } if cfg.samples > 1 => {
            let var = ((pairwise_sum(&squares) - n * estimate * estimate) / (n - 1.0)).max(0.0);
            Some((var / n).sqrt())
        }
        _ => None,
    };

    let (generator, first_sample) = match cfg.source {
        SourceKind::Sobol { skip } => (
            "sobol (Joe-Kuo new-joe-kuo-6.8192, gray code, unscrambled)",
            skip + 1,
        ),
        SourceKind::Prng { .. } => ("chacha8 (stream = sample index)", 1),
    };
    Ok(PricingReport {
        estimate,
        standard_error,
        samples: cfg.samples,
        n_steps: cfg.n_steps,
        wall_clock_seconds: start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
        threads,
        config: cfg.clone(),
        version: crate::VERSION.to_string(),
        sampling: SamplingInfo {
            source: cfg.source,
            generator: generator.to_string(),
            normal_transform: "inverse CDF (Wichura AS 241)".to_string(),
            dimension: plan.dimension(),
            first_sample,
        },
    })
}

/// One line of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n_steps: usize,
    pub estimate: f64,
    pub abs_error: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub config: RunConfig,
    pub reference: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln |error|` against `ln n_steps`.
    pub slope: Option<f64>,
}

/// Least-squares slope of `y` on `x`; `None` with fewer than two points or no
/// spread in `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let sxy: f64 = x[..n]
        .iter()
        .zip(&y[..n])
        .map(|(a, b)| (a - mx) * (b - my))
        .sum();
    let sxx: f64 = x[..n].iter().map(|a| (a - mx) * (a - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// One pricing run per step count with the same sampling configuration.
pub fn converge(cfg: &RunConfig, steps: &[usize], reference: f64) -> Result<ConvergenceStudy> {
    if steps.is_empty() {
        return Err(invalid("steps", "need at least one step count"));
    }
    if !reference.is_finite() {
        return Err(invalid("reference", "must be finite"));
    }
    let mut rows = Vec::with_capacity(steps.len());
    for &n in steps {
        let run = RunConfig {
            n_steps: n,
            ..cfg.clone()
        };
        let report = price(&run)?;
        rows.push(ConvergenceRow {
            n_steps: n,
            estimate: report.estimate,
            abs_error: (report.estimate - reference).abs(),
            seconds: report.wall_clock_seconds,
        });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.abs_error > 0.0)
        .map(|r| ((r.n_steps as f64).ln(), r.abs_error.ln()))
        .unzip();
    Ok(ConvergenceStudy {
        config: cfg.clone(),
        reference,
        rows,
        slope: fit_slope(&lx, &ly),
    })
}

pub const CSV_HEADER: &str =
    "scheme,backend,sampling,n_steps,samples,estimate,abs_error,seconds,slope";

/// 17 significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_row(out: &mut String, cfg: &RunConfig, row: &ConvergenceRow, slope: Option<f64>) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        cfg.scheme.scheme,
        cfg.scheme.backend,
        cfg.source.name(),
        row.n_steps,
        cfg.samples,
        format_float(row.estimate),
        format_float(row.abs_error),
        format_float(row.seconds),
        slope.map(format_float).unwrap_or_default(),
    );
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for row in &self.rows {
            csv_row(&mut out, &self.config, row, self.slope);
        }
        out
    }
}

impl PricingReport {
    /// Header plus one row; `abs_error` is measured against `reference`.
    pub fn to_csv(&self, reference: f64) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        let row = ConvergenceRow {
            n_steps: self.n_steps,
            estimate: self.estimate,
            abs_error: (self.estimate - reference).abs(),
            seconds: self.wall_clock_seconds,
        };
        csv_row(&mut out, &self.config, &row, None);
        out
    }
}
