use std::process::ExitCode;

use clap::Parser;
use wgl::cli::{execute, Cli};
use wgl::pool::Pool;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> wgl::Result<i32> {
        let man = cli.command.into_manifest()?;
        let pool = Pool::from_env()?;
        Ok(execute(&man, &pool))
    };
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
