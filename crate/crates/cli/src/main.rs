mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use joinlab::SampleMode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Lab(#[from] joinlab::Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser)]
#[command(
    name = "joinlab",
    version,
    about = "Exact joinings laboratory for finite systems"
)]
struct Cli {
    /// Worker threads for parallel LP solves and sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Add wall-clock time to the report (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Stat {
    Rigidity,
    Fraction,
    Average,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    IidCocycle,
    RandomCoboundary,
}

#[derive(Subcommand)]
enum Command {
    /// Build the Z₂^k parity 4-joining and optionally verify its properties.
    Eta {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        verify: bool,
    },
    /// Optimize over, or certify triviality of, a joining polytope.
    Polytope {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        independence: usize,
        #[arg(long)]
        certify: bool,
    },
    /// Cocycle statistics of a skew product.
    Cocycle {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        stat: Stat,
    },
    /// Multiple-mixing deviation sweep.
    Mixing {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sweep: u64,
    },
    /// Closest approach of Koopman powers to εI + (1−ε)Θ.
    Probe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
        #[arg(long)]
        k_max: u32,
    },
    /// Sample a random extension of a cyclic base rotation.
    Sample {
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long, default_value_t = 6)]
        base_size: usize,
        #[arg(long, default_value_t = 4)]
        fiber_size: usize,
        #[arg(long)]
        analyze: bool,
    },
    /// Operations on stored joining tensors.
    Joining {
        #[command(subcommand)]
        command: JoiningCommand,
    },
}

#[derive(Subcommand)]
enum JoiningCommand {
    /// Check marginals and diagonal invariance of a tensor file.
    Verify {
        #[arg(long)]
        file: PathBuf,
        /// Config file with an `[action]` table, or `z2k:K`.
        #[arg(long)]
        action: String,
    },
}

fn dispatch(command: &Command) -> Result<(&'static str, report::Outcome), CliError> {
    Ok(match command {
        Command::Eta { k, verify } => ("eta", commands::eta(*k, *verify)?),
        Command::Polytope {
            config,
            order,
            independence,
            certify,
        } => (
            "polytope",
            commands::polytope(config, *order, *independence, *certify)?,
        ),
        Command::Cocycle { config, stat } => ("cocycle", commands::cocycle(config, *stat)?),
        Command::Mixing { config, sweep } => ("mixing", commands::mixing(config, *sweep)?),
        Command::Probe {
            config,
            grid,
            k_max,
        } => ("probe", commands::probe(config, grid, *k_max)?),
        Command::Sample {
            seed,
            mode,
            base_size,
            fiber_size,
            analyze,
        } => {
            let mode = match mode {
                Mode::IidCocycle => SampleMode::IidCocycle,
                Mode::RandomCoboundary => SampleMode::RandomCoboundary,
            };
            (
                "sample",
                commands::sample(*seed, mode, *base_size, *fiber_size, *analyze)?,
            )
        }
        Command::Joining {
            command: JoiningCommand::Verify { file, action },
        } => ("joining verify", commands::verify_joining(file, action)?),
    })
}

fn run(cli: &Cli, args: &[String]) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Invalid(format!("--threads: {e}")))?;
    }
    let start = Instant::now();
    let (name, outcome) = dispatch(&cli.command)?;
    let wall = cli.timing.then(|| start.elapsed().as_millis());
    let text = report::render(name, args, &outcome, wall);
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.passed.unwrap_or(true))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match run(&cli, &args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
