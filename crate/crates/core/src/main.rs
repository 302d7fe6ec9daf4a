use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use wittflow::lie::{sabr_closed_form_values, zassenhaus_decompose, Algebra, FlowDecomposition};
use wittflow::models::{HestonParams, ModelKind, ModelSpec, SabrParams};
use wittflow::ode::rk4_flow;
use wittflow::pricing::{converge, format_float, price, RunConfig, SABR_REFERENCE};
use wittflow::sampling::{Sampling, SourceKind};
use wittflow::schemes::{Backend, Scheme, SchemeConfig};

#[derive(Parser)]
#[command(
    name = "wittflow",
    version,
    about = "Weak-approximation pricing for SABR and Heston"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a European call and print one CSV row.
    Price(RunArgs),
    /// Price at several step counts and fit the log-log error slope.
    Converge(RunArgs),
    /// Print the base-flow decomposition of exp(sum a_i W_i).
    Decompose(DecomposeArgs),
    /// Evaluate one base flow analytically and by RK4.
    Flow(FlowArgs),
}

#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ModelArgs {
    /// sabr or heston
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
}

/// Every field is optional so command-line flags can be layered over a TOML
/// file with the same keys.
#[derive(Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunArgs {
    /// TOML file with any of the options below; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    /// em, nv or nn
    #[arg(long)]
    scheme: Option<String>,
    /// analytic or rk
    #[arg(long)]
    backend: Option<String>,
    /// Step count; comma-separated list for `converge`
    #[arg(long, value_delimiter = ',')]
    steps: Option<Vec<usize>>,
    #[arg(long)]
    samples: Option<u64>,
    /// sobol or prng
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    skip: Option<u64>,
    /// Ninomiya-Ninomiya free parameter
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    strike: Option<f64>,
    #[arg(long)]
    maturity: Option<f64>,
    /// Initial state `x1,x2`
    #[arg(long, value_delimiter = ',', num_args = 1)]
    x0: Option<Vec<f64>>,
    /// Benchmark price for the abs_error column
    #[arg(long)]
    reference: Option<f64>,
    #[arg(long)]
    nv_cap: Option<usize>,
    #[arg(long)]
    nn_cap: Option<usize>,
    #[arg(long)]
    rk_substeps: Option<usize>,
    #[arg(long)]
    series_order: Option<usize>,
    /// Worker threads (overrides WITTFLOW_THREADS)
    #[arg(long)]
    threads: Option<usize>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the full JSON report here
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Coefficients `a_0,a_1,...`
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    a: Vec<f64>,
    /// witt or heston
    #[arg(long, default_value = "witt")]
    algebra: String,
    /// Series truncation degree
    #[arg(long, default_value_t = 5)]
    m: usize,
    /// Highest base index to report
    #[arg(long)]
    max_index: Option<usize>,
}

#[derive(Args)]
struct FlowArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    index: usize,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// State `x1,x2`
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, default_value_t = 4096)]
    rk_substeps: usize,
}

type CliResult<T> = std::result::Result<T, String>;

fn parse<T: std::str::FromStr<Err = String>>(v: Option<&str>, default: &str) -> CliResult<T> {
    v.unwrap_or(default).parse()
}

fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

impl ModelArgs {
    fn layered(&self, file: &ModelArgs) -> ModelArgs {
        ModelArgs {
            model: pick(&self.model, &file.model),
            beta: pick(&self.beta, &file.beta),
            nu: pick(&self.nu, &file.nu),
            rho: pick(&self.rho, &file.rho),
            mu: pick(&self.mu, &file.mu),
            kappa: pick(&self.kappa, &file.kappa),
            theta: pick(&self.theta, &file.theta),
            xi: pick(&self.xi, &file.xi),
        }
    }

    fn kind(&self) -> CliResult<ModelKind> {
        let built = match self.model.as_deref().unwrap_or("sabr") {
            "sabr" => SabrParams::new(
                self.beta.unwrap_or(0.9),
                self.nu.unwrap_or(1.0),
                self.rho.unwrap_or(-0.7),
            )
            .map(ModelKind::Sabr),
            "heston" => HestonParams::new(
                self.mu.unwrap_or(0.0),
                self.kappa.unwrap_or(2.0),
                self.theta.unwrap_or(0.09),
                self.xi.unwrap_or(0.2),
                self.rho.unwrap_or(-0.7),
            )
            .map(ModelKind::Heston),
            other => return Err(format!("unknown model `{other}` (expected sabr or heston)")),
        };
        built.map_err(|e| e.to_string())
    }
}

fn default_x0(kind: &ModelKind) -> [f64; 2] {
    match kind {
        ModelKind::Sabr(_) => [1.0, 0.3],
        ModelKind::Heston(_) => [1.0, 0.09],
    }
}

fn state(v: &[f64], name: &str) -> CliResult<[f64; 2]> {
    match *v {
        [a, b] => Ok([a, b]),
        _ => Err(format!("--{name} expects two comma-separated numbers")),
    }
}

impl RunArgs {
    /// Flags over config file over defaults.
    fn layered(&self) -> CliResult<RunArgs> {
        let file: RunArgs = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
                toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => RunArgs::default(),
        };
        Ok(RunArgs {
            config: self.config.clone(),
            model: self.model.layered(&file.model),
            scheme: pick(&self.scheme, &file.scheme),
            backend: pick(&self.backend, &file.backend),
            steps: pick(&self.steps, &file.steps),
            samples: pick(&self.samples, &file.samples),
            sampling: pick(&self.sampling, &file.sampling),
            seed: pick(&self.seed, &file.seed),
            skip: pick(&self.skip, &file.skip),
            r: pick(&self.r, &file.r),
            strike: pick(&self.strike, &file.strike),
            maturity: pick(&self.maturity, &file.maturity),
            x0: pick(&self.x0, &file.x0),
            reference: pick(&self.reference, &file.reference),
            nv_cap: pick(&self.nv_cap, &file.nv_cap),
            nn_cap: pick(&self.nn_cap, &file.nn_cap),
            rk_substeps: pick(&self.rk_substeps, &file.rk_substeps),
            series_order: pick(&self.series_order, &file.series_order),
            threads: pick(&self.threads, &file.threads),
            out: pick(&self.out, &file.out),
            report: pick(&self.report, &file.report),
        })
    }

    fn run_config(&self, n_steps: usize) -> CliResult<RunConfig> {
        let model = self.model.kind()?;
        let defaults = SchemeConfig::default();
        let scheme = SchemeConfig {
            scheme: parse::<Scheme>(self.scheme.as_deref(), "nv")?,
            backend: parse::<Backend>(self.backend.as_deref(), "analytic")?,
            r: self.r.unwrap_or(defaults.r),
            nv_term_cap: self.nv_cap,
            nn_term_cap: self.nn_cap,
            rk_substeps: self.rk_substeps.unwrap_or(defaults.rk_substeps),
            series_order: self.series_order.unwrap_or(defaults.series_order),
        };
        let source = match parse::<Sampling>(self.sampling.as_deref(), "sobol")? {
            Sampling::Sobol => SourceKind::Sobol {
                skip: self.skip.unwrap_or(0),
            },
            Sampling::Prng => SourceKind::Prng {
                seed: self.seed.unwrap_or(0),
            },
        };
        let x0 = match &self.x0 {
            Some(v) => state(v, "x0")?,
            None => default_x0(&model),
        };
        Ok(RunConfig {
            model,
            x0,
            scheme,
            n_steps,
            samples: self.samples.unwrap_or(100_000),
            source,
            strike: self.strike.unwrap_or(1.05),
            maturity: self.maturity.unwrap_or(1.0),
            threads: self.threads,
        })
    }

    fn reference(&self) -> f64 {
        self.reference.unwrap_or(SABR_REFERENCE)
    }
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            // A closed pipe (`wittflow ... | head`) is not an error.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
            _ => Ok(()),
        },
    }
}

fn write_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> CliResult<()> {
    if let Some(path) = path {
        let json = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        fs::write(path, json + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

fn cmd_price(args: RunArgs) -> CliResult<()> {
    let args = args.layered()?;
    let steps = match args.steps.as_deref() {
        None => 16,
        Some([n]) => *n,
        Some(_) => return Err("price takes a single --steps value".into()),
    };
    let report = price(&args.run_config(steps)?).map_err(|e| e.to_string())?;
    write_json(args.report.as_deref(), &report)?;
    emit(args.out.as_deref(), &report.to_csv(args.reference()))
}

fn cmd_converge(args: RunArgs) -> CliResult<()> {
    let args = args.layered()?;
    let steps = args.steps.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
    let cfg = args.run_config(steps[0])?;
    let study = converge(&cfg, &steps, args.reference()).map_err(|e| e.to_string())?;
    write_json(args.report.as_deref(), &study)?;
    emit(args.out.as_deref(), &study.to_csv())
}

fn cmd_decompose(args: DecomposeArgs) -> CliResult<()> {
    let algebra: Algebra = args.algebra.parse()?;
    if args.a.is_empty() {
        return Err("--a needs at least one coefficient".into());
    }
    let max_index = args
        .max_index
        .unwrap_or(match algebra {
            Algebra::Witt => 4,
            Algebra::Heston => 3 * args.m,
        })
        .max(args.a.len() - 1);
    let series =
        zassenhaus_decompose(&args.a, &algebra, args.m, max_index).map_err(|e| e.to_string())?;
    let at_one = FlowDecomposition::from_series(&series, 1.0);
    let closed = (algebra == Algebra::Witt).then(|| sabr_closed_form_values(&args.a));

    let mut text = format!(
        "{:>5}  {:>24}  {:>24}  series coefficients (lambda^0, lambda^1, ...)\n",
        "i", "closed form", "series at lambda=1"
    );
    for (i, p) in series.iter().enumerate() {
        let cf = match closed {
            Some(v) if i < v.len() => format_float(v[i]),
            _ => "-".to_string(),
        };
        let coeffs: Vec<String> = p.coeffs().iter().map(|c| format!("{c:.6e}")).collect();
        text += &format!(
            "{i:>5}  {cf:>24}  {:>24}  [{}]\n",
            format_float(at_one.value(i)),
            coeffs.join(", ")
        );
    }
    emit(None, &text)
}

fn cmd_flow(args: FlowArgs) -> CliResult<()> {
    let spec = match args.model.kind()? {
        ModelKind::Sabr(p) => ModelSpec::sabr(p),
        ModelKind::Heston(p) => ModelSpec::heston(p),
    };
    let x = state(&args.x, "x")?;
    if args.rk_substeps == 0 {
        return Err("--rk-substeps must be at least 1".into());
    }
    let analytic = spec.base_flow(args.index, args.t, x);
    let rk = rk4_flow(
        &|y| spec.base_field(args.index, y),
        args.t,
        args.rk_substeps,
        x,
    )
    .map_err(|e| e.to_string())?;
    let gap = (analytic[0] - rk[0]).abs().max((analytic[1] - rk[1]).abs());
    let mut text = format!("{:<10}  {:>24}  {:>24}\n", "method", "x1", "x2");
    for (name, y) in [("analytic", analytic), ("rk4", rk)] {
        text += &format!(
            "{name:<10}  {:>24}  {:>24}\n",
            format_float(y[0]),
            format_float(y[1])
        );
    }
    text += &format!("{:<10}  {:>24}\n", "max |diff|", format_float(gap));
    emit(None, &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Price(a) => cmd_price(a),
        Command::Converge(a) => cmd_converge(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Flow(a) => cmd_flow(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
