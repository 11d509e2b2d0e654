use std::process::ExitCode;

use clap::Parser;
use qzeno_cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match qzeno_cli::run(cli) {
        Ok(o) if o.failed.is_empty() => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("{} check(s) failed; see {}", o.failed.len(), o.manifest.display());
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
