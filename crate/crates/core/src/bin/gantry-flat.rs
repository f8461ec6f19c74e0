use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gantry_flat::cli::{cmd_optimize, cmd_run, cmd_sweep, parse_ts_list, Options};

/// Flatness-based sampled-data control of a gantry crane: scenario runner.
#[derive(Parser)]
#[command(name = "gantry-flat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate every configured controller on the configured reference.
    Run(Common),
    /// Compute a minimax-acceleration reference.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Track the optimized reference afterwards.
        #[arg(long)]
        run: bool,
    },
    /// Repeat the run over a list of sampling times.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides the one in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sampling time(s) in milliseconds, comma separated.
    #[arg(long)]
    ts: Option<String>,
    /// Seed for the initial-state perturbation.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_DIVERGED: u8 = 3;

impl Common {
    fn options(&self, single: bool) -> gantry_flat::Result<(Options, Vec<f64>)> {
        let ts_list = self.ts.as_deref().map(parse_ts_list).transpose()?.unwrap_or_default();
        if single && ts_list.len() > 1 {
            return Err(gantry_flat::Error::Config("this command takes a single --ts value".into()));
        }
        let options = Options {
            out: self.out.clone(),
            ts: ts_list.first().copied(),
            seed: self.seed,
        };
        Ok((options, ts_list))
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn execute(cli: Cli) -> gantry_flat::Result<u8> {
    match cli.command {
        Command::Run(common) => {
            let (options, _) = common.options(true)?;
            let outcome = cmd_run(&common.config, &options)?;
            print!("{}", outcome.table);
            print_files(&outcome.files);
            Ok(if outcome.all_completed() { 0 } else { EXIT_DIVERGED })
        }
        Command::Optimize { common, run } => {
            let (options, _) = common.options(true)?;
            let outcome = cmd_optimize(&common.config, &options, run)?;
            let r = &outcome.report;
            println!(
                "{}: eps* = {:.6} m/s^2 (initial {:.6}) after {} iterations",
                r.termination, r.epsilon, r.initial_epsilon, r.iterations
            );
            print_files(&outcome.files);
            match outcome.run {
                Some(run) => {
                    print!("{}", run.table);
                    print_files(&run.files);
                    Ok(if run.all_completed() { 0 } else { EXIT_DIVERGED })
                }
                None => Ok(0),
            }
        }
        Command::Sweep(common) => {
            let (options, ts_list) = common.options(false)?;
            let ts_list = if ts_list.is_empty() {
                vec![gantry_flat::config::ScenarioConfig::load(&common.config)?.simulation.ts]
            } else {
                ts_list
            };
            let outcome = cmd_sweep(&common.config, &ts_list, &options)?;
            print!("{}", outcome.table);
            print_files(&outcome.files);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
