// SPDX-License-Identifier: Apache-2.0

use std::process::ExitCode;

use clap::Parser;
use fluxnet_cli::{run, Cli};

fn main() -> ExitCode {
    // clap exits with 0 for --help and 2 for usage errors on its own
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match run(&cli, &argv) {
        Ok(outcome) => {
            for line in &outcome.lines {
                println!("{line}");
            }
            println!("manifest {}", outcome.manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
