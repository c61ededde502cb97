use clap::Parser;
use std::process::ExitCode;

fn main() -> ExitCode {
    let args = copro_cli::app::Args::parse();
    ExitCode::from(copro_cli::app::execute(&args))
}
