use std::io;
use std::process::ExitCode;

use clap::Parser;
use duotherm_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    run(cli, &mut io::stdout().lock(), &mut io::stderr().lock())
}
