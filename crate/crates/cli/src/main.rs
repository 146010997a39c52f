mod commands;
mod config;
mod error;
mod output;

use clap::Parser;

use crate::config::Cli;
use crate::error::CliError;

fn main() {
    let cli = Cli::parse();
    let level = match cli.flags.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = config::resolve(&cli.flags)?;
    let report = commands::execute(cli.command, &cfg)?;
    output::write(&report.document, &cfg)?;
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
