use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use bures_sep::cli::{self, Cli, Failure};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli::run(cli) {
        Ok(out) => {
            // a closed pipe is not an error worth a panic
            let _ = writeln!(std::io::stdout().lock(), "{}", out.stdout);
            ExitCode::from(out.status as u8)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(e)) => {
            let diag = serde_json::json!({ "error": error_kind(&e), "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(1)
        }
    }
}

fn error_kind(e: &bures_sep::Error) -> &'static str {
    use bures_sep::Error::*;
    match e {
        Domain(_) => "domain",
        Config(_) => "config",
        Quadrature { .. } => "quadrature",
        SingularWeight { .. } => "singular_weight",
        Numerical(_) => "numerical",
        Checkpoint(_) => "checkpoint",
        Overflow => "overflow",
        Parse(_) => "parse",
        Io(_) => "io",
        Json(_) => "json",
    }
}
