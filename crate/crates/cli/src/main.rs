use std::process::ExitCode;

use clap::Parser;
use weakcalc_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(m) => {
            for f in &m.outputs {
                println!("{}", cli.out.join(f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("weakcalc {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
