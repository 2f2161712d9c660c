mod args;
mod commands;
mod error;
mod input;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use error::PARSE;

fn configure_threads() {
    let Ok(value) = std::env::var("CME_EXACT_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not set thread count: {e}");
            }
        }
        _ => log::warn!("ignoring CME_EXACT_THREADS={value}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(PARSE as u8) } else { ExitCode::SUCCESS };
        }
    };
    configure_threads();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code as u8)
        }
    }
}
