//! `varlp`: modulars, norms, maximal functions and the modular-inequality
//! experiments from the command line.
//!
//! Every command prints one JSON document on stdout (or its table as CSV
//! with `--csv`). Exit codes: 0 holds/ok, 1 fails/falsified,
//! 2 inconclusive, 3 input error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use commands::Outcome;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "varlp", version, about = "Variable-exponent Lebesgue space laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print the command's table as CSV instead of the JSON report.
    #[arg(long, global = true, conflicts_with = "json")]
    csv: bool,
    /// Print the JSON report (default).
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args)]
struct ConfigArg {
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Parse expressions and print their canonical form.
    ParseCheck {
        exprs: Vec<String>,
        #[arg(long, short)]
        config: Option<PathBuf>,
    },
    /// Modular of `f` with exponent `p`.
    Modular(ConfigArg),
    /// Luxemburg norm of `f`.
    Norm(ConfigArg),
    /// Maximal function of `f`.
    Maxop {
        #[command(flatten)]
        config: ConfigArg,
        /// Use the brute-force reference implementation.
        #[arg(long)]
        oracle: bool,
    },
    /// Exponent conditions for the modular inequality.
    Check(ConfigArg),
    /// Build the weight certifying the inequality on an unbounded domain.
    Omega(ConfigArg),
    /// Search for a counterexample to the modular inequality.
    Falsify(ConfigArg),
    /// Estimate and validate the constants of the modular inequality.
    Constants(ConfigArg),
    /// Run a pinned example and compare with its golden table.
    Reproduce {
        id: String,
        /// Write the golden table to this file.
        #[arg(long)]
        write_golden: Option<PathBuf>,
        /// Compare with this golden table instead of the shipped one.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// The inequality with the discrete Fourier modulus in place of M.
    Fourier(ConfigArg),
    /// Time the fast maximal operator against the brute-force one.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
        sizes_1d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes_2d: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(c: &ConfigArg) -> anyhow::Result<RunConfig> {
    RunConfig::load(&c.config)
}

fn run(cli: &Cli) -> anyhow::Result<(Outcome, Option<RunConfig>)> {
    let with =
        |c: &ConfigArg, f: fn(&RunConfig) -> anyhow::Result<Outcome>| -> anyhow::Result<(Outcome, Option<RunConfig>)> {
            let cfg = load(c)?;
            Ok((f(&cfg)?, Some(cfg)))
        };
    match &cli.command {
        Command::ParseCheck { exprs, config } => {
            let cfg = match config {
                Some(path) => Some(toml::from_str::<RunConfig>(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            Ok((commands::parse_check(exprs, cfg.as_ref())?, cfg))
        }
        Command::Modular(c) => with(c, commands::modular_cmd),
        Command::Norm(c) => with(c, commands::norm_cmd),
        Command::Maxop { config, oracle } => {
            let cfg = load(config)?;
            Ok((commands::maxop_cmd(&cfg, *oracle)?, Some(cfg)))
        }
        Command::Check(c) => with(c, commands::check_cmd),
        Command::Omega(c) => with(c, commands::omega_cmd),
        Command::Falsify(c) => with(c, commands::falsify_cmd),
        Command::Constants(c) => with(c, commands::constants_cmd),
        Command::Reproduce {
            id,
            write_golden,
            golden,
        } => Ok((
            commands::reproduce_cmd(id, write_golden.as_deref(), golden.as_deref())?,
            None,
        )),
        Command::Fourier(c) => with(c, commands::fourier_cmd),
        Command::Bench {
            sizes_1d,
            sizes_2d,
            reps,
            seed,
        } => Ok((commands::bench_cmd(sizes_1d, sizes_2d, *reps, *seed)?, None)),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::ParseCheck { .. } => "parse-check",
        Command::Modular(_) => "modular",
        Command::Norm(_) => "norm",
        Command::Maxop { .. } => "maxop",
        Command::Check(_) => "check",
        Command::Omega(_) => "omega",
        Command::Falsify(_) => "falsify",
        Command::Constants(_) => "constants",
        Command::Reproduce { .. } => "reproduce",
        Command::Fourier(_) => "fourier",
        Command::Bench { .. } => "bench",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, cfg)) => {
            if let Some(path) = cfg.as_ref().and_then(|c| c.output.csv.as_ref()) {
                if let Err(e) = std::fs::write(path, out.csv.as_deref().unwrap_or("")) {
                    eprintln!("error: writing {path}: {e}");
                    return ExitCode::from(3);
                }
            }
            if cli.csv {
                print!("{}", out.csv.as_deref().unwrap_or(""));
            } else {
                let doc = json!({
                    "command": command_name(&cli.command),
                    "config": cfg,
                    "exit_code": out.exit,
                    "report": out.report,
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("reports serialize"));
            }
            ExitCode::from(out.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
