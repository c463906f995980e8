use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use embezzlemeter::conversion::{DEFAULT_EVALUATION_BUDGET, DEFAULT_PURIFIED_TOL};
use embezzlemeter::families::DEFAULT_QUAD_TOL;

mod commands;
mod manifest;

use commands::Output;
use manifest::RunManifest;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] embezzlemeter::Error),
    #[error("input error: {0}")]
    Input(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(embezzlemeter::Error::Internal(_)) | CliError::Output(_) => 1,
            _ => 2,
        }
    }
}

/// Entanglement conversion distances and embezzling-family diagnostics.
#[derive(Parser)]
#[command(name = "embezzlemeter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Star conversion distance between two Schmidt coefficient vectors.
    Dstar(DstarArgs),
    /// Exact LOCC convertibility of ψ into φ.
    Nielsen(PairArgs),
    /// Convertibility of ψ into an ensemble of pure states.
    EnsembleCheck(EnsembleArgs),
    /// Finite-n embezzlement distances of a family along a schedule (CSV).
    EmbezzleScan(EmbezzleScanArgs),
    /// Analytic limit or numeric M(y) trajectory of a family (JSON).
    FamilyLimit(FamilyLimitArgs),
    /// Limits and finite-n estimates of the power families over an α range (CSV).
    Figure1(Figure1Args),
}

#[derive(Args)]
pub struct PairArgs {
    /// Source coefficients (JSON array or one-column CSV).
    #[arg(long)]
    pub psi: String,
    /// Target coefficients.
    #[arg(long)]
    pub phi: String,
    /// Rescale inputs that do not sum to 1 instead of rejecting them.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OracleKind {
    Grid,
    Lp,
}

#[derive(Args)]
pub struct DstarArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Also compute the purified-distance variant.
    #[arg(long)]
    pub purified: bool,
    #[arg(long, default_value_t = DEFAULT_PURIFIED_TOL)]
    pub tol: f64,
    /// Maximum objective evaluations for the purified optimizer.
    #[arg(long, default_value_t = DEFAULT_EVALUATION_BUDGET)]
    pub budget: usize,
    /// Cross-check with a brute-force minimization.
    #[arg(long, value_enum)]
    pub oracle: Option<OracleKind>,
    /// Lattice resolution of the grid oracle.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Distance fed to the discrimination bound (defaults to the lower sandwich bound).
    #[arg(long)]
    pub d_value: Option<f64>,
}

#[derive(Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub psi: String,
    /// JSON file `{"members": [{"weight": w, "state": [..]}, …]}`.
    #[arg(long)]
    pub ensemble: String,
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Args)]
pub struct EmbezzleScanArgs {
    /// vdh, power:α, log:k, osc or custom:FILE (two-column x,f(x) CSV).
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub m: usize,
    /// geometric:start,factor,count or an explicit list n1,n2,…
    #[arg(long)]
    pub schedule: String,
    /// Write the CSV to a file instead of stdout (`csv` means stdout).
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Args)]
pub struct FamilyLimitArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub m: usize,
    /// Evaluate the integral ratio M(y) numerically.
    #[arg(long)]
    pub numeric: bool,
    /// y values for --numeric: geometric:start,factor,count or y1,y2,…
    #[arg(long)]
    pub y_schedule: Option<String>,
    #[arg(long, default_value_t = DEFAULT_QUAD_TOL)]
    pub quad_tol: f64,
    /// Finite-n tail: geometric:start,factor,count or n1,n2,…
    #[arg(long)]
    pub schedule: Option<String>,
}

#[derive(Args)]
pub struct Figure1Args {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// start:step:end, e.g. -3:-0.1:3
    #[arg(long, allow_hyphen_values = true, default_value = "-3:0.1:3")]
    pub alphas: String,
    /// Dimensions of the finite-n estimates.
    #[arg(long, default_value = "1000000,10000000")]
    pub n: String,
    /// `csv` for stdout or a file path.
    #[arg(long)]
    pub out: Option<String>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("EMBEZZLEMETER_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "EMBEZZLEMETER_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Core(embezzlemeter::Error::Internal(e.to_string())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let (name, out_path) = match &cli.command {
        Command::Dstar(_) => ("dstar", None),
        Command::Nielsen(_) => ("nielsen", None),
        Command::EnsembleCheck(_) => ("ensemble-check", None),
        Command::EmbezzleScan(a) => ("embezzle-scan", a.out.clone()),
        Command::FamilyLimit(_) => ("family-limit", None),
        Command::Figure1(a) => ("figure1", a.out.clone()),
    };
    let mut manifest = RunManifest::new(name);
    record_parameters(&cli.command, &mut manifest);
    let output = match &cli.command {
        Command::Dstar(a) => commands::dstar(a, &mut manifest),
        Command::Nielsen(a) => commands::nielsen(a, &mut manifest),
        Command::EnsembleCheck(a) => commands::ensemble_check(a, &mut manifest),
        Command::EmbezzleScan(a) => commands::embezzle_scan_cmd(a, &mut manifest),
        Command::FamilyLimit(a) => commands::family_limit(a, &mut manifest),
        Command::Figure1(a) => commands::figure1(a, &mut manifest),
    }?;
    emit(&output, &manifest, out_path.as_deref())
}

fn record_parameters(command: &Command, m: &mut RunManifest) {
    match command {
        Command::Dstar(a) => {
            m.param("psi", &a.pair.psi)
                .param("phi", &a.pair.phi)
                .param("purified", a.purified);
            m.param("renormalize", a.pair.renormalize);
        }
        Command::Nielsen(a) => {
            m.param("psi", &a.psi)
                .param("phi", &a.phi)
                .param("renormalize", a.renormalize);
        }
        Command::EnsembleCheck(a) => {
            m.param("psi", &a.psi)
                .param("ensemble", &a.ensemble)
                .param("renormalize", a.renormalize);
        }
        Command::EmbezzleScan(a) => {
            m.param("family", &a.family)
                .param("m", a.m)
                .param("schedule", &a.schedule);
        }
        Command::FamilyLimit(a) => {
            m.param("family", &a.family)
                .param("m", a.m)
                .param("numeric", a.numeric);
            m.param("quad_tol", a.quad_tol);
            if let Some(s) = &a.y_schedule {
                m.param("y_schedule", s);
            }
            if let Some(s) = &a.schedule {
                m.param("schedule", s);
            }
        }
        Command::Figure1(a) => {
            m.param("m", a.m)
                .param("alphas", &a.alphas)
                .param("n", &a.n);
        }
    }
}

fn emit(output: &Output, manifest: &RunManifest, out: Option<&str>) -> Result<(), CliError> {
    let text = output.render(manifest);
    match out {
        Some(path) if path != "csv" => std::fs::write(path, text)?,
        _ => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("embezzlemeter: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
