//! `fcbio`: run bilevel experiments, verification suites and data generation.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "fcbio", version, about = "First-order solver for simple bilevel problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one experiment; prints a JSON summary and writes a CSV trace.
    Solve(RunArgs),
    /// Run a verification suite: projections, subroutines, driver, hardness or all.
    Verify { suite: String },
    /// Write the synthetic dataset for an experiment.
    GenData(RunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// min_norm, logistic, hard_smooth, hard_lipschitz, lower_bound or custom.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps_f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps_g: Option<String>,
    /// `certified`, a total first-order budget, or `per-round:K`.
    #[arg(long)]
    budget: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// Dataset to load instead of synthetic data.
    #[arg(long)]
    data: Option<PathBuf>,
    /// csv or libsvm.
    #[arg(long)]
    format: Option<String>,
    /// Trace file for `solve`, dataset file for `gen-data`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<String>,
    #[arg(long, num_args = 2, value_names = ["M", "N"])]
    dims: Option<Vec<String>>,
    /// Declare the upper-level objective nonnegative.
    #[arg(long)]
    nonneg_f: bool,
    /// Horizon T of the hard and lower-bound instances.
    #[arg(long, allow_hyphen_values = true)]
    horizon: Option<String>,
    /// smooth or lipschitz (lower_bound only).
    #[arg(long)]
    setting: Option<String>,
    /// upper or lower: which level carries the chain (lower_bound only).
    #[arg(long)]
    level: Option<String>,
    /// Extra trace row every this many inner iterations.
    #[arg(long)]
    trace_every: Option<String>,
    /// Budget multiplier of the logistic reference run; 0 skips it.
    #[arg(long)]
    reference_factor: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        let text = [
            ("experiment", &self.experiment),
            ("eps_f", &self.eps_f),
            ("eps_g", &self.eps_g),
            ("budget", &self.budget),
            ("seed", &self.seed),
            ("format", &self.format),
            ("radius", &self.radius),
            ("horizon", &self.horizon),
            ("setting", &self.setting),
            ("level", &self.level),
            ("trace_every", &self.trace_every),
            ("reference_factor", &self.reference_factor),
        ];
        for (key, value) in text {
            if let Some(v) = value {
                c.set(key, v)?;
            }
        }
        if let Some(d) = &self.data {
            c.data = Some(d.clone());
        }
        if let Some(o) = &self.out {
            c.out = o.clone();
        }
        if let Some(d) = &self.dims {
            c.set("dims", &d.join(" "))?;
        }
        if self.nonneg_f {
            c.nonneg_f = true;
        }
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(args) => {
            let config = args.resolve()?;
            let (summary, ok) = commands::cmd_solve(&config)?;
            println!("{summary}");
            if ok {
                Ok(())
            } else {
                Err(CliError::CheckFailed("solution not certified against the ground truth".into()))
            }
        }
        Command::Verify { suite } => {
            let mut stdout = std::io::stdout().lock();
            if commands::cmd_verify(&suite, &mut stdout)? {
                Ok(())
            } else {
                Err(CliError::CheckFailed(format!("suite {suite}")))
            }
        }
        Command::GenData(args) => {
            let mut config = args.resolve()?;
            if args.out.is_none() {
                config.out = PathBuf::from(match config.format {
                    fcbio::data::DataFormat::Csv => "data.csv",
                    fcbio::data::DataFormat::Libsvm => "data.libsvm",
                });
            }
            commands::cmd_gen_data(&config, &config.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
