use std::process::ExitCode;

use clap::Parser;
use hfield_cli::{execute, standard_expansion, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(
        &cli.command,
        &standard_expansion,
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
    .into()
}
