mod commands;
mod output;
mod reproduce;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use output::Table;

#[derive(Parser, Debug)]
#[command(name = "treesic", version, about = "Tree random-access analysis with multi-packet reception and SIC")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Recursive,
    Closed,
    Series,
    Auto,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expected CRI length L_n and throughput T_n for n = 0..=n-max.
    Cri {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        n_max: u64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        no_sic: bool,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
    },
    /// Asymptotic L_n and T_n (fair split).
    Asym {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        n: u64,
    },
    /// Oscillation amplitude 2K|B(K,1)| for K = 1..=K-max.
    Amplitude {
        #[arg(long = "K-max")]
        k_max: u32,
    },
    /// Linear bounds alpha_m, beta_m on L_n and the induced throughput bounds.
    Bounds {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        n_eval: Option<u64>,
    },
    /// Stability bounds for gated access.
    Gated {
        #[arg(long = "K")]
        k: u32,
    },
    /// Stability bounds for windowed access.
    Windowed {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        n_eval: Option<u64>,
        #[arg(long)]
        no_sic: bool,
    },
    /// Windowed stability objective F(z) with and without SIC.
    Sensitivity {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        z_max: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        z_step: f64,
    },
    /// Monte Carlo CRI lengths, or one trial's slot log with --trace.
    Simulate {
        #[arg(long = "K")]
        k: u32,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Probability of joining the first group (binary splitting only).
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        no_sic: bool,
        #[arg(long)]
        trace: bool,
    },
    /// Windowed access with Poisson arrivals: queue drift and delay.
    SimulateWindowed {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 100_000)]
        windows: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        no_sic: bool,
    },
    /// Regenerate a table or figure data set.
    Reproduce {
        #[arg(long, value_enum)]
        target: reproduce::Target,
        /// Write `<target>.csv` (or `.json`) here instead of stdout.
        #[arg(long)]
        out_dir: Option<std::path::PathBuf>,
        /// Also write a gnuplot script next to the data (needs --out-dir).
        #[arg(long)]
        gnuplot: bool,
        /// Trials per point for the simulation figures.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Io(std::io::Error),
}

impl From<treesic::Error> for CliError {
    fn from(e: treesic::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    use commands::*;
    let table = match cli.command {
        Command::Cri { k, n_max, p, no_sic, method } => cri(k, n_max, p, !no_sic, method)?,
        Command::Asym { k, n } => asym(k, n)?,
        Command::Amplitude { k_max } => amplitude_table(k_max)?,
        Command::Bounds { k, m, n_eval } => bounds(k, m, n_eval)?,
        Command::Gated { k } => gated(k)?,
        Command::Windowed { k, m, n_eval, no_sic } => windowed(k, m, n_eval, !no_sic)?,
        Command::Sensitivity { k, m, z_max, z_step } => sensitivity(k, m, z_max, z_step)?,
        Command::Simulate { k, d, n, trials, seed, p, no_sic, trace } => {
            simulate(SimulateArgs { k, d, n, trials, seed, p, sic: !no_sic, trace })?
        }
        Command::SimulateWindowed { k, lambda, delta, windows, seed, d, no_sic } => {
            simulate_windowed(k, d, !no_sic, lambda, delta, windows, seed)?
        }
        Command::Reproduce { target, out_dir, gnuplot, trials, seed } => {
            let table = reproduce::build(target, trials, seed)?;
            return reproduce::emit(target, &table, cli.format, out_dir.as_deref(), gnuplot);
        }
    };
    print!("{}", render(&table, cli.format));
    Ok(())
}

fn main() -> ExitCode {
    treesic::exec::init_thread_pool();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}
