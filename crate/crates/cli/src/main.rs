use std::process::ExitCode;

use clap::Parser;
use sortition_audit_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    sortition_audit_cli::exit_code(run(cli))
}
