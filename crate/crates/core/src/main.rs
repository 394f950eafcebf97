use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kg_virial::config::{parse_config_with, Scenario};
use kg_virial::scenario::execute;
use kg_virial::Error;

#[derive(Parser)]
#[command(
    name = "kg-virial",
    version,
    about = "Odd Klein-Gordon decay experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Small odd data on the half line; tracks local energy decay.
    Decay(RunArgs),
    /// Full-line sine-Gordon breather; the even counterexample.
    Breather(RunArgs),
    /// Base and refined runs with observed orders.
    Convergence(RunArgs),
    /// Coercivity certificates and the Pöschl-Teller index battery.
    Spectral(RunArgs),
    /// Identity checks over pseudo-random odd fields.
    VirialCheck(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override applied after the file, e.g. `--set epsilon=0.025`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
    /// Print the resolved config and exit.
    #[arg(long)]
    describe: bool,
}

fn parse_override(raw: &str) -> Result<(String, String), String> {
    raw.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected KEY=VALUE, got `{raw}`"))
}

fn run(scenario: Scenario, args: RunArgs) -> Result<bool, Error> {
    let text = match &args.config {
        Some(path) => fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
        None => String::new(),
    };
    let cfg = parse_config_with(&text, &args.overrides, Some(scenario))?;
    if args.describe {
        print!("{}", cfg.describe());
        return Ok(true);
    }
    let outcome = execute(&cfg)?;
    print!("{}", outcome.summary.render());
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, args) = match cli.command {
        Command::Decay(a) => (Scenario::Decay, a),
        Command::Breather(a) => (Scenario::Breather, a),
        Command::Convergence(a) => (Scenario::Convergence, a),
        Command::Spectral(a) => (Scenario::Spectral, a),
        Command::VirialCheck(a) => (Scenario::VirialCheck, a),
    };
    match run(scenario, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
