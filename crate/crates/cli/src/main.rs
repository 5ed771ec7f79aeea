mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use thiserror::Error;

use args::{Cli, Command};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] interwalk::Error),
}

impl CliError {
    /// 2 bad configuration, 3 numerical invariant violated, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(e) if e.is_io() => 4,
            CliError::Core(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Limit(a) => commands::limit(&a),
        Command::Spectral(a) => commands::spectral(&a),
        Command::Poisson(a) => commands::poisson(&a),
        Command::Engines => commands::engines(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use interwalk::Error;

    #[test]
    fn exit_code_classes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(Error::TraceDrift { step: 3, drift: 1e-6 }).exit_code(), 3);
        assert_eq!(CliError::from(Error::LemmaViolation("gap".into())).exit_code(), 3);
        let io = std::io::Error::new(std::io::ErrorKind::PermissionDenied, "denied");
        assert_eq!(CliError::from(Error::Io(io)).exit_code(), 4);
        assert_eq!(CliError::from(Error::EndpointRegime { q: 1.0 }).exit_code(), 2);
    }
}
