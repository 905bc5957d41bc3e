mod args;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Format};
use erw_lab::experiment::run_experiment;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let resolved = match cli.resolve() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let report = match run_experiment(&resolved.spec) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let body = match resolved.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json() + "\n",
    };
    let mut stdout = std::io::stdout().lock();
    match &resolved.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &body) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_FAIL);
            }
        }
        None => {
            let _ = stdout.write_all(body.as_bytes());
        }
    }
    for line in report.verdict_lines() {
        let _ = writeln!(stdout, "{line}");
    }
    for (name, value) in &report.diagnostics {
        let _ = writeln!(stdout, "note {name}: {value:.6}");
    }
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}
