use std::process::ExitCode;

use clap::Parser;

use kirkwood_cli::{run, Cli, RunConfig};

fn main() -> ExitCode {
    // clap exits with status 2 on its own usage errors
    let cli = Cli::parse();
    let result = RunConfig::from_cli(cli).and_then(|config| run(&config));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", failure.to_json());
            ExitCode::from(failure.exit_code() as u8)
        }
    }
}
