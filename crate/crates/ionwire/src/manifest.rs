//! What to run: the command, its inputs and where the output goes.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use ionwire_core::{Complex64, SystemConfig};

use crate::error::{CliError, CliResult};
use crate::table::Format;
use crate::units::{parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config_path: PathBuf,
    pub command: Command,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Budget { dump_config: bool },
    Simulate(SimulateOptions),
    Sweep { axes: Vec<SweepAxis> },
    Validate { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SimMode {
    Classical,
    Quantum,
    Rwa,
    Circuit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// |n⟩ on ion 1.
    Fock(usize),
    /// (|0⟩ + |n⟩)/√2 on ion 1.
    Superposition(usize),
    /// Coherent |μ⟩ on ion 1.
    Coherent(Complex64),
    /// Ion 1 displaced by this many metres, at rest.
    Displaced(f64),
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let usage = "expected fock:N, superposition:N, coherent:MU or displaced:LENGTH";
        let (kind, arg) = s.split_once(':').ok_or_else(|| format!("initial state `{s}`: {usage}"))?;
        let level = |arg: &str| arg.trim().parse::<usize>().map_err(|_| format!("`{arg}` is not a Fock level"));
        match kind.trim() {
            "fock" => Ok(InitialState::Fock(level(arg)?)),
            "superposition" => match level(arg)? {
                0 => Err("superposition level must be at least 1".into()),
                n => Ok(InitialState::Superposition(n)),
            },
            "coherent" => arg
                .trim()
                .parse::<Complex64>()
                .map(InitialState::Coherent)
                .map_err(|_| format!("`{arg}` is not a complex amplitude (e.g. 1, 0.5i, 1-0.2i)")),
            "displaced" => parse_quantity(arg, Dimension::Length, None).map(InitialState::Displaced),
            other => Err(format!("unknown initial state `{other}`: {usage}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub mode: SimMode,
    pub initial: InitialState,
    /// s; defaults to two exchange times
    pub t_max: Option<f64>,
    pub samples: usize,
    pub n_max: Option<usize>,
    /// Replaces the electrostatic γ by ratio·m·ω₁·ω₂.
    pub coupling_ratio: Option<f64>,
    pub rtol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    WireHeight,
    IonHeight,
    WireLength,
    WireRadius,
    Omega,
    Temperature,
    Resistance,
    LeakageResistance,
    /// Multiplies every geometric length of the base configuration.
    Scale,
}

impl SweepParam {
    const ALL: [(SweepParam, &'static str); 9] = [
        (SweepParam::WireHeight, "H"),
        (SweepParam::IonHeight, "h0"),
        (SweepParam::WireLength, "L"),
        (SweepParam::WireRadius, "a"),
        (SweepParam::Omega, "omega"),
        (SweepParam::Temperature, "T"),
        (SweepParam::Resistance, "R"),
        (SweepParam::LeakageResistance, "Rg"),
        (SweepParam::Scale, "scale"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(p, _)| *p == self).map(|(_, n)| *n).expect("listed")
    }

    pub fn dimension(self) -> Dimension {
        match self {
            SweepParam::WireHeight | SweepParam::IonHeight | SweepParam::WireLength | SweepParam::WireRadius => {
                Dimension::Length
            }
            SweepParam::Omega => Dimension::Frequency,
            SweepParam::Temperature => Dimension::Temperature,
            SweepParam::Resistance | SweepParam::LeakageResistance => Dimension::Resistance,
            SweepParam::Scale => Dimension::Dimensionless,
        }
    }

    /// Column header with the SI unit.
    pub fn header(self) -> String {
        match self.dimension().canonical_unit() {
            "" => self.name().to_string(),
            unit => format!("{} [{unit}]", self.name()),
        }
    }

    /// Sets this parameter to `value` on a copy of `base`.
    pub fn apply(self, base: &SystemConfig, cfg: &mut SystemConfig, value: f64) {
        match self {
            SweepParam::WireHeight => cfg.geometry.wire_height = value,
            SweepParam::IonHeight => cfg.geometry.ion_heights.iter_mut().for_each(|h| *h = value),
            SweepParam::WireLength => cfg.geometry.wire_length = value,
            SweepParam::WireRadius => cfg.geometry.wire_radius = value,
            SweepParam::Omega => {
                cfg.modes = ionwire_core::ModeSpec::from_angular(vec![value; cfg.modes.len()]);
            }
            SweepParam::Temperature => cfg.environment.temperature = value,
            SweepParam::Resistance => cfg.environment.wire_resistance = value,
            SweepParam::LeakageResistance => cfg.environment.leakage_resistance = value,
            SweepParam::Scale => cfg.geometry = base.geometry.scaled(value),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| {
                let last = (self.steps - 1) as f64;
                (self.start * (last - k as f64) + self.stop * k as f64) / last
            })
            .collect()
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    /// `AXIS=START:STOP:STEPS`; endpoints may carry units, bare numbers are SI.
    fn from_str(s: &str) -> Result<Self, String> {
        let (name, range) = s.split_once('=').ok_or_else(|| format!("sweep `{s}`: expected AXIS=START:STOP:STEPS"))?;
        let name = name.trim();
        let param = SweepParam::ALL.iter().find(|(_, n)| *n == name).map(|(p, _)| *p).ok_or_else(|| {
            let known: Vec<_> = SweepParam::ALL.iter().map(|(_, n)| *n).collect();
            format!("unknown sweep axis `{name}` (valid axes: {})", known.join(", "))
        })?;
        let parts: Vec<&str> = range.split(':').collect();
        let [start, stop, steps] = parts[..] else {
            return Err(format!("sweep `{s}`: expected AXIS=START:STOP:STEPS"));
        };
        let dim = param.dimension();
        let default_unit = Some(dim.canonical_unit());
        let start = parse_quantity(start, dim, default_unit).map_err(|e| format!("sweep {name} start: {e}"))?;
        let stop = parse_quantity(stop, dim, default_unit).map_err(|e| format!("sweep {name} stop: {e}"))?;
        let steps: usize =
            steps.trim().parse().map_err(|_| format!("sweep {name}: `{steps}` is not a step count"))?;
        if steps < 2 {
            return Err(format!("sweep {name}: needs at least 2 steps, got {steps}"));
        }
        Ok(SweepAxis { param, start, stop, steps })
    }
}

/// Parses `AXIS=..[,AXIS=..]` specs, possibly from several flags.
pub fn parse_sweep_axes(specs: &[String]) -> CliResult<Vec<SweepAxis>> {
    let axes = specs
        .iter()
        .flat_map(|s| s.split(','))
        .map(|s| s.parse::<SweepAxis>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::Input)?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Input(format!("sweep needs one or two axes, got {}", axes.len())));
    }
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(CliError::Input(format!("sweep axis `{}` given twice", axes[0].param)));
    }
    Ok(axes)
}
