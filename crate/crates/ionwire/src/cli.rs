//! Argument parsing.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::manifest::{parse_sweep_axes, Command, InitialState, RunManifest, SimMode, SimulateOptions};
use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "ionwire", version, about = "Design budgets and dynamics for ions coupled through a floating wire")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (`key = value unit` lines in [species], [geometry], [modes], [environment])
    #[arg(long, short = 'c', value_name = "PATH")]
    pub config: PathBuf,

    /// Write here instead of standard output; the file appears only on success
    #[arg(long, short = 'o', value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Output format (budget defaults to text, everything else to csv)
    #[arg(long, short = 'f', value_enum)]
    pub format: Option<Format>,

    /// Seed for randomized checks
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Coupling, exchange time, equivalent circuit and noise budget
    Budget {
        #[command(flatten)]
        common: Common,
        /// Print the parsed configuration in SI units instead of the report
        #[arg(long)]
        dump_config: bool,
    },
    /// Time trace of the coupled motion
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "rwa")]
        mode: SimMode,
        /// fock:N, superposition:N, coherent:MU (complex, e.g. 1+0.5i) or displaced:LENGTH (e.g. 20nm)
        #[arg(long, default_value = "fock:1")]
        initial: InitialState,
        /// End time; a bare number is seconds (default: two exchange times)
        #[arg(long, value_name = "TIME")]
        tmax: Option<String>,
        #[arg(long, default_value_t = 201)]
        samples: usize,
        /// Fock truncation per mode for quantum mode
        #[arg(long)]
        nmax: Option<usize>,
        /// Replace the wire coupling by γ = ratio·m·ω² (two ions)
        #[arg(long, value_name = "RATIO")]
        coupling_ratio: Option<f64>,
        /// Relative tolerance of the circuit solver
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
    },
    /// Budget quantities over a grid of one or two parameters
    Sweep {
        #[command(flatten)]
        common: Common,
        /// AXIS=START:STOP:STEPS with AXIS one of H, h0, L, a, omega, T, R, Rg, scale
        #[arg(long, required = true, value_name = "SPEC")]
        sweep: Vec<String>,
    },
    /// Configuration checks plus cross-checks on nearby random geometries
    Validate {
        #[command(flatten)]
        common: Common,
        /// Number of perturbed configurations to cross-check
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
}

fn time_value(text: &str) -> CliResult<f64> {
    let t = text.trim();
    let seconds = match t.strip_suffix("ms") {
        Some(v) => v.trim().parse::<f64>().map(|v| v * 1e-3),
        None => match t.strip_suffix("us") {
            Some(v) => v.trim().parse::<f64>().map(|v| v * 1e-6),
            None => t.strip_suffix('s').unwrap_or(t).trim().parse::<f64>(),
        },
    }
    .map_err(|_| CliError::Input(format!("--tmax `{text}` is not a time (e.g. 0.4, 400ms, 2 s)")))?;
    if !(seconds.is_finite() && seconds >= 0.0) {
        return Err(CliError::Input(format!("--tmax must be a non-negative time, got `{text}`")));
    }
    Ok(seconds)
}

impl Cli {
    pub fn into_manifest(self) -> CliResult<RunManifest> {
        let (common, command, default_format) = match self.command {
            CliCommand::Budget { common, dump_config } => (common, Command::Budget { dump_config }, Format::Text),
            CliCommand::Simulate { common, mode, initial, tmax, samples, nmax, coupling_ratio, rtol } => {
                if let Some(r) = coupling_ratio {
                    if !(r.is_finite() && r > 0.0) {
                        return Err(CliError::Input(format!("--coupling-ratio must be positive, got {r}")));
                    }
                }
                if !(rtol.is_finite() && rtol > 0.0) {
                    return Err(CliError::Input(format!("--rtol must be positive, got {rtol}")));
                }
                let t_max = tmax.as_deref().map(time_value).transpose()?;
                let opts = SimulateOptions { mode, initial, t_max, samples, n_max: nmax, coupling_ratio, rtol };
                (common, Command::Simulate(opts), Format::Csv)
            }
            CliCommand::Sweep { common, sweep } => {
                (common, Command::Sweep { axes: parse_sweep_axes(&sweep)? }, Format::Csv)
            }
            CliCommand::Validate { common, samples } => (common, Command::Validate { samples }, Format::Csv),
        };
        Ok(RunManifest {
            config_path: common.config,
            command,
            output: common.output,
            format: common.format.unwrap_or(default_format),
            seed: common.seed,
        })
    }
}
