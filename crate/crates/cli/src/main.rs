use std::process::ExitCode;

use clap::Parser;

use seqmc_cli::cli::{dispatch, Cli, EXIT_ERROR};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    match dispatch(cli, &mut stdout, &mut stderr) {
        Ok(done) => ExitCode::from(done.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
