use std::process;

use clap::error::ErrorKind;
use clap::Parser;

use handoff_sim::cli::{execute, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    if let Err(err) = execute(cli) {
        eprintln!("error: {err}");
        process::exit(err.exit_code());
    }
}
