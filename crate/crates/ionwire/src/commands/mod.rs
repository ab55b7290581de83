//! Subcommand implementations. Each returns the rendered output and an exit
//! code; nothing is written until the whole output exists.

mod budget;
mod simulate;
mod sweep;
mod validate;

use std::io::Write;
use std::path::Path;

use ionwire_core::SystemConfig;

use crate::config::parse_config;
use crate::error::{exit, CliError, CliResult};
use crate::manifest::{Command, RunManifest};
use crate::table::write_atomic;

pub use budget::budget_rows;
pub use simulate::simulate;
pub use sweep::sweep;
pub use validate::validate;

pub struct Outcome {
    pub output: String,
    pub exit_code: u8,
}

impl Outcome {
    fn success(output: String) -> Self {
        Outcome { output, exit_code: exit::SUCCESS }
    }
}

/// Reads and parses a configuration, rejecting configs that fail validation.
pub fn load_config(path: &Path) -> CliResult<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let cfg = parse_config(&text).map_err(|errors| CliError::Config { path: path.to_path_buf(), errors })?;
    let report = cfg.validate();
    if !report.is_ok() {
        let lines: Vec<String> = report.errors.iter().map(|e| format!("  {e}")).collect();
        return Err(CliError::Input(format!("{}: invalid configuration:\n{}", path.display(), lines.join("\n"))));
    }
    Ok(cfg)
}

pub fn execute(manifest: &RunManifest) -> CliResult<Outcome> {
    let cfg = load_config(&manifest.config_path)?;
    match &manifest.command {
        Command::Budget { dump_config: true } => Ok(Outcome::success(crate::config::dump_config(&cfg))),
        Command::Budget { dump_config: false } => budget::budget(&cfg, manifest.format),
        Command::Simulate(opts) => Ok(Outcome::success(simulate(&cfg, opts)?.render(manifest.format))),
        Command::Sweep { axes } => Ok(Outcome::success(sweep(&cfg, axes).render(manifest.format))),
        Command::Validate { samples } => validate(&cfg, *samples, manifest.seed, manifest.format),
    }
}

/// Runs the manifest and delivers its output; returns the exit code.
pub fn run(manifest: &RunManifest) -> CliResult<u8> {
    let outcome = execute(manifest)?;
    match &manifest.output {
        Some(path) => write_atomic(path, &outcome.output)
            .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.output.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
        }
    }
    Ok(outcome.exit_code)
}
