//! `bf`: coefficient tables, spectra, figure-eight traces and the
//! self-validation suite for Benjamin-Feir spectra of Stokes waves.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use bf_core::validation::ValidationConfig;
use clap::{Args, Parser, Subcommand};

use commands::{CliError, Report};
use config::{FileConfig, Format, RunConfig};
use output::{Envelope, ErrorInfo};

#[derive(Parser, Debug)]
#[command(name = "bf", version, about = "Benjamin-Feir spectra of gravity-capillary Stokes waves")]
#[command(after_help = "Environment:\n  BF_THREADS  worker threads for parallel sweeps\n  BF_SEED     seed for randomized validation checks")]
struct Cli {
    /// JSON config file; command-line flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output format [default: json for spectrum, csv otherwise]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output file [default: stdout]
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Fourier truncation K, in [8, 512] [default: 32]
    #[arg(long = "K", alias = "k-max", global = true, value_name = "K")]
    k_max: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form coefficients and region labels over a kappa grid.
    Coeffs(CoeffsArgs),
    /// Trace the unstable eigenvalue pair as mu sweeps the band.
    Figure8(TraceArgs),
    /// Full spectrum and near-zero quadruple at one (kappa, eps, mu).
    Spectrum(SpectrumArgs),
    /// Upper edge of the unstable band, numeric and leading order.
    MuBar(TraceArgs),
    /// Residuals of the truncated Stokes expansion.
    StokesResidual(ResidualArgs),
    /// Run the acceptance checks; exit status 1 if any fails.
    Validate(ValidateArgs),
}

#[derive(Args, Debug)]
struct CoeffsArgs {
    /// Single kappa; overrides the grid.
    #[arg(long)]
    kappa: Option<f64>,
    /// Grid as a:b:n or a comma list [default: 0:2:201]
    #[arg(long, value_name = "GRID")]
    kappa_grid: Option<String>,
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Stokes amplitude, in (0, 0.02]
    #[arg(long)]
    eps: Option<f64>,
    /// Largest mu sampled [default: a multiple of the leading-order band edge]
    #[arg(long)]
    mu_max: Option<f64>,
    /// Uniform samples before refinement [default: 40]
    #[arg(long)]
    samples: Option<usize>,
    /// Modulus ratio separating the quadruple from the rest [default: 2]
    #[arg(long)]
    gap_factor: Option<f64>,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Stokes amplitude, in [0, 0.05]
    #[arg(long)]
    eps: Option<f64>,
    /// Floquet exponent, in (-1/2, 1/2)
    #[arg(long)]
    mu: Option<f64>,
    /// Modulus ratio separating the quadruple from the rest [default: 2]
    #[arg(long)]
    gap_factor: Option<f64>,
}

#[derive(Args, Debug)]
struct ResidualArgs {
    #[arg(long)]
    kappa: Option<f64>,
    /// Amplitudes as a:b:n or a comma list [default: 0.005,0.01,0.02]
    #[arg(long, value_name = "GRID")]
    eps_grid: Option<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Comma-separated subset of criterion ids [default: all]
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<usize>,
    /// Evaluate e22 with the wrong sign (mutation check).
    #[arg(long, hide = true)]
    inject_e22_sign_error: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Coeffs(_) => "coeffs",
            Command::Figure8(_) => "figure8",
            Command::Spectrum(_) => "spectrum",
            Command::MuBar(_) => "mu-bar",
            Command::StokesResidual(_) => "stokes-residual",
            Command::Validate(_) => "validate",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Spectrum(_) => Format::Json,
            _ => Format::Csv,
        }
    }

    fn flags(&self) -> FileConfig {
        let mut f = FileConfig::default();
        match self {
            Command::Coeffs(a) => {
                f.kappa = a.kappa;
                f.kappa_grid = a.kappa_grid.clone();
            }
            Command::Figure8(a) | Command::MuBar(a) => {
                f.kappa = a.kappa;
                f.eps = a.eps;
                f.mu_max = a.mu_max;
                f.samples = a.samples;
                f.gap_factor = a.gap_factor;
            }
            Command::Spectrum(a) => {
                f.kappa = a.kappa;
                f.eps = a.eps;
                f.mu = a.mu;
                f.gap_factor = a.gap_factor;
            }
            Command::StokesResidual(a) => {
                f.kappa = a.kappa;
                f.eps_grid = a.eps_grid.clone();
            }
            Command::Validate(_) => {}
        }
        f
    }
}

fn env_parse<T: std::str::FromStr>(name: &str) -> Result<Option<T>, CliError> {
    match std::env::var(name) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            CliError::Domain(ErrorInfo {
                kind: "InvalidInput".into(),
                message: format!("cannot parse {name}={s:?}"),
            })
        }),
        Err(_) => Ok(None),
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Some(n) = env_parse::<usize>("BF_THREADS")? {
        // Fails only if a pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut flags = cli.command.flags();
    flags.k_max = cli.k_max;
    flags.out = cli.out.clone();
    flags.format = cli.format;
    let cfg = RunConfig::merge(&flags, &file, cli.command.default_format());
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Report, CliError> {
    init_threads()?;
    output::check_writable(cfg.out.as_deref()).map_err(CliError::io)?;
    match &cli.command {
        Command::Coeffs(_) => commands::coeffs(cfg),
        Command::Figure8(_) => commands::figure8(cfg),
        Command::Spectrum(_) => commands::spectrum(cfg),
        Command::MuBar(_) => commands::mu_bar(cfg),
        Command::StokesResidual(_) => commands::residual(cfg),
        Command::Validate(a) => {
            let mut v = ValidationConfig {
                k_max: cfg.k_max,
                flip_e22_sign: a.inject_e22_sign_error,
                ..ValidationConfig::default()
            };
            if let Some(seed) = env_parse::<u64>("BF_SEED")? {
                v.seed = seed;
            }
            commands::validate(&a.criteria, &v)
        }
    }
}

fn emit(cfg: &RunConfig, env: &Envelope, report: Option<&Report>) -> std::io::Result<()> {
    let w = output::sink(cfg.out.as_deref())?;
    match (cfg.format, report) {
        (Format::Json, _) => output::write_json(w, env),
        (Format::Csv, Some(r)) => r.table.write_csv(w),
        (Format::Csv, None) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = cli.command.name();
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("bf {command}: {}", e.info().message);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (env, report, code) = match execute(&cli, &cfg) {
        Ok(r) => {
            let (status, code, error) = if r.failed {
                let info = ErrorInfo {
                    kind: "ValidationFailure".into(),
                    message: "one or more checks failed".into(),
                };
                ("fail", 1, Some(info))
            } else {
                ("ok", 0, None)
            };
            let env = match error {
                Some(info) => Envelope::failed(command, status, info, r.data.clone()),
                None => Envelope::ok(command, r.data.clone()),
            };
            (env, Some(r), code)
        }
        Err(e) => {
            eprintln!("bf {command}: {}", e.info().message);
            if matches!(e, CliError::Io(_)) {
                return ExitCode::from(3);
            }
            let env = Envelope::failed(command, "error", e.info().clone(), serde_json::Value::Null);
            (env, None, e.exit_code())
        }
    };
    if let Err(e) = emit(&cfg, &env, report.as_ref()) {
        eprintln!("bf {command}: {e}");
        return ExitCode::from(3);
    }
    ExitCode::from(code as u8)
}
