mod args;
mod commands;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Lyap(a) => commands::lyap(&a),
        Command::Care(a) => commands::care(&a),
        Command::ScanOmega(a) => commands::scan_omega(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.line());
            ExitCode::from(f.code())
        }
    }
}

impl Failure {
    fn line(&self) -> String {
        format!("error kind={} message={:?}", self.kind, self.message)
    }
}
