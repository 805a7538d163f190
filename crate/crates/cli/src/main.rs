use std::io::Write;
use std::process::ExitCode;

use charfun_kit::{run, Cli, Status, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use clap::Parser;
use serde_json::json;

/// Writes a line, ignoring a closed pipe on the other end.
fn emit(mut sink: impl Write, text: &str) {
    let _ = writeln!(sink, "{text}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let report = if cli.json {
                charfun_kit::format::to_json_pretty(&out.json).trim_end().to_string()
            } else {
                out.text.clone()
            };
            match (&out.artifact, &cli.out) {
                (Some(artifact), Some(path)) => {
                    if let Err(e) = std::fs::write(path, artifact) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_INPUT);
                    }
                    emit(std::io::stdout(), &report);
                }
                // The file goes to stdout; keep the summary out of the way.
                (Some(artifact), None) => {
                    emit(std::io::stdout(), artifact.trim_end());
                    emit(std::io::stderr(), &report);
                }
                (None, _) => emit(std::io::stdout(), &report),
            }
            ExitCode::from(match out.status {
                Status::Pass => EXIT_PASS,
                Status::Fail => EXIT_FAIL,
            })
        }
        Err(e) => {
            if cli.json {
                let body = json!({ "status": "ERROR", "error": e.to_string(), "exit_code": e.exit_code() });
                emit(std::io::stdout(), &body.to_string());
            }
            emit(std::io::stderr(), &format!("error: {e}"));
            ExitCode::from(e.exit_code())
        }
    }
}
