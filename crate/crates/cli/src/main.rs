use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nmdis::{execute, validate_config, CliError, ConfigIssue, Override, ScenarioKind};

#[derive(Parser)]
#[command(name = "nmdis", version, about = "Composite non-Markovian qubit dynamics: witnesses and spectral attribution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override a config field, e.g. --set rtn.gamma=0.01 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Validate a config and print it with all defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// List the available scenarios.
    ListScenarios,
}

fn load(config: &PathBuf, set: &[String]) -> Result<nmdis::ScenarioConfig, CliError> {
    let raw = std::fs::read_to_string(config).map_err(|e| CliError::io(config, e))?;
    let mut issues: Vec<ConfigIssue> = Vec::new();
    let mut overrides = Vec::new();
    for s in set {
        match Override::parse(s) {
            Ok(o) => overrides.push(o),
            Err(i) => issues.push(i),
        }
    }
    match validate_config(&raw, &overrides) {
        Ok(cfg) if issues.is_empty() => Ok(cfg),
        Ok(_) => Err(CliError::Config(issues)),
        Err(CliError::Config(more)) => {
            issues.extend(more);
            Err(CliError::Config(issues))
        }
        Err(e) => Err(e),
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, set } => load(&config, &set).and_then(|cfg| execute(&cfg)).map(|r| print_json(&r)),
        Command::Validate { config, set } => load(&config, &set).map(|cfg| print_json(&cfg)),
        Command::ListScenarios => {
            for k in ScenarioKind::ALL {
                println!("{:<20} {}", k.as_str(), k.description());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
