mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use config::Resolver;
use output::Format;

#[derive(Debug)]
pub enum CliError {
    /// Bad or missing input; exit code 2.
    Usage(String),
    /// Failure inside the library; exit code 1 with error JSON.
    Model(gatesim::Error),
    Io(String),
}

impl From<gatesim::Error> for CliError {
    fn from(e: gatesim::Error) -> Self {
        CliError::Model(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "gatesim", version, about = "Protected phase gate simulator and analytic error models")]
struct Cli {
    /// Flat `key = value` config file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format (defaults: csv for sweep and tables, json otherwise).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads; GATESIM_THREADS overrides config and default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GateArgs {
    /// √(L/C).
    #[arg(long)]
    pub l: Option<f64>,
    /// √(J₀C).
    #[arg(long)]
    pub j: Option<f64>,
    /// Ramp time (default √(LC) = l).
    #[arg(long)]
    pub tau_j: Option<f64>,
    /// Reference plateau delay (default: ramp-corrected L/π).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Initial oscillator level.
    #[arg(long)]
    pub n: Option<u32>,
    /// Quartic coefficient λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Anharmonicity α = λ·L·√(L/C); overrides --lambda.
    #[arg(long)]
    pub alpha_anh: Option<f64>,
    #[arg(long)]
    pub beta_pert: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub oversample: Option<f64>,
    /// Golden-section search for the delay before running.
    #[arg(long)]
    pub optimize_tau: bool,
    /// Also search the ramp time.
    #[arg(long)]
    pub optimize_tau_j: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one gate and report the diamond-norm error.
    Simulate(GateArgs),
    /// Gate error along one parameter axis.
    Sweep(commands::SweepArgs),
    /// Closed-form error estimates.
    #[command(subcommand)]
    Analytic(commands::AnalyticCmd),
    /// Landau-Zener and ramp estimates.
    #[command(subcommand)]
    Diabatic(commands::DiabaticCmd),
    /// Bloch bands, effective capacitance and J_eff.
    #[command(subcommand)]
    Bands(commands::BandsCmd),
    /// Fault-tolerance bound for the teleported CNOT.
    #[command(subcommand)]
    Ft(commands::FtCmd),
}

fn configure_threads(res: &mut Resolver, flag: Option<usize>) -> Result<(), CliError> {
    let env = match std::env::var("GATESIM_THREADS") {
        Ok(s) => Some(s.trim().parse::<usize>().map_err(|e| CliError::Usage(format!("GATESIM_THREADS = '{s}': {e}")))?),
        Err(_) => None,
    };
    let configured = res.get::<usize>("threads", None, None)?;
    let n = flag.or(env).or(configured).unwrap_or(0);
    res.note("threads", &n);
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut res = Resolver::load(cli.config.as_deref())?;
    configure_threads(&mut res, cli.threads)?;
    let (name, default_format, table) = match cli.command {
        Command::Simulate(a) => ("simulate", Format::Json, commands::simulate(&mut res, &a)?),
        Command::Sweep(a) => ("sweep", Format::Csv, commands::sweep(&mut res, &a)?),
        Command::Analytic(c) => ("analytic", Format::Json, commands::analytic(&mut res, &c)?),
        Command::Diabatic(c) => ("diabatic", Format::Json, commands::diabatic(&mut res, &c)?),
        Command::Bands(c) => ("bands", Format::Csv, commands::bands(&mut res, &c)?),
        Command::Ft(c) => ("ft", Format::Json, commands::ft(&mut res, &c)?),
    };
    let format = res.or("format", cli.format, default_format)?;
    let path = res.get::<String>("output", cli.output.map(|p| p.display().to_string()), None)?;
    let text = output::render(format, name, res.resolved(), &table);
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|e| CliError::Io(format!("cannot write {p}: {e}")))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            ExitCode::from(2)
        }
        Err(CliError::Model(e)) => {
            print!("{}", output::render_error(e.kind(), &e.to_string()));
            ExitCode::from(1)
        }
        Err(CliError::Io(msg)) => {
            print!("{}", output::render_error("io", &msg));
            ExitCode::from(1)
        }
    }
}
