//! Command-line surface of the `lane-emden` crate: configuration parsing,
//! command execution and deterministic CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::io::Write;

pub use commands::{execute, Artifacts};
pub use config::{parse_config, Command, RunConfig};
pub use error::CliError;

/// Writes the artifacts to their destinations; the primary output defaults to `stdout`.
pub fn emit(config: &RunConfig, artifacts: &Artifacts, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &config.out {
        Some(path) => std::fs::write(path, &artifacts.primary).map_err(|e| CliError::io(e, path))?,
        None => match stdout.write_all(&artifacts.primary).and_then(|_| stdout.flush()) {
            // A closed pipe (e.g. `| head`) is the reader's choice, not a failure.
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                return Err(CliError::io(e, std::path::Path::new("<stdout>")))
            }
            _ => {}
        },
    }
    if let (Some(path), Some(bytes)) = (&config.drift_csv, &artifacts.drift_csv) {
        std::fs::write(path, bytes).map_err(|e| CliError::io(e, path))?;
    }
    Ok(())
}

/// Parses, runs and emits; returns the process exit status.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let result = parse_config(argv).and_then(|config| {
        let artifacts = execute(&config)?;
        for w in &artifacts.warnings {
            let _ = writeln!(stderr, "{}", serde_json::json!({ "warning": w }));
        }
        emit(&config, &artifacts, stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            if let Some(text) = &e.display_only {
                let _ = write!(stdout, "{text}");
            } else {
                let _ = writeln!(stderr, "{}", e.to_json());
            }
            e.exit
        }
    }
}
