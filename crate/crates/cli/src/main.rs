mod cli;
mod commands;
mod config;
mod exit;
mod format;

use clap::error::ErrorKind;
use clap::Parser;

use crate::cli::{Cli, Command, SynthCommand};
use crate::exit::Failure;

fn run() -> Result<(), Failure> {
    let args = config::expand_args(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => exit::USAGE,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    log::debug!("{cli:?}");
    match &cli.command {
        Command::Train(args) => commands::train(args),
        Command::Synth(SynthCommand::Emg(args)) => commands::synth_emg_cmd(args),
        Command::Synth(SynthCommand::Spectra(args)) => commands::synth_spectra_cmd(args),
        Command::Extract(args) => commands::extract(args),
        Command::Enhance(args) => commands::enhance_cmd(args),
        Command::Evaluate(args) => commands::evaluate(args),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(failure) = run() {
        eprintln!("error: {}", failure.message);
        std::process::exit(failure.code);
    }
}
