//! Line-oriented configuration files.
//!
//! ```text
//! [species]
//! name = Ca40+
//!
//! [geometry]
//! H = 200 um
//! a = 12.5 um
//! L = 10 mm
//! h0 = 150 um          # one value per ion, or one value for all
//!
//! [modes]
//! omega = 1 MHz
//!
//! [environment]
//! T = 300 K
//! R = 0.6 ohm
//! ```
//!
//! `#` starts a comment. Every dimensional value needs a unit. Missing
//! optional keys take the library defaults (Ca40+, T = 300 K, R = 0,
//! R_g = 1e13 Ω, ratio = 50, two ions).

use std::collections::BTreeMap;
use std::fmt;

use ionwire_core::{species_constants, Environment, IonSpecies, ModeSpec, SystemConfig, TrapGeometry};

use crate::units::{format_si, parse_list, parse_quantity, Dimension};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Every problem found in one pass over a file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Species,
    Geometry,
    Modes,
    Environment,
}

impl Section {
    const ALL: [Section; 4] = [Section::Species, Section::Geometry, Section::Modes, Section::Environment];

    fn name(self) -> &'static str {
        match self {
            Section::Species => "species",
            Section::Geometry => "geometry",
            Section::Modes => "modes",
            Section::Environment => "environment",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Species => &["name", "mass", "charge"],
            Section::Geometry => &["H", "a", "L", "h0", "ions", "separation"],
            Section::Modes => &["omega"],
            Section::Environment => &["T", "R", "Rg", "ratio", "anomalous_rate"],
        }
    }
}

const REQUIRED: [(Section, &str); 5] = [
    (Section::Geometry, "H"),
    (Section::Geometry, "a"),
    (Section::Geometry, "L"),
    (Section::Geometry, "h0"),
    (Section::Modes, "omega"),
];

struct Entry {
    line: usize,
    value: String,
}

pub fn parse_config(text: &str) -> Result<SystemConfig, ConfigErrors> {
    let mut errors = Vec::new();
    let mut entries: BTreeMap<(Section, &'static str), Entry> = BTreeMap::new();
    let mut section: Option<Section> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| ConfigError { line: Some(line), message };
        if let Some(name) = content.strip_prefix('[') {
            let Some(name) = name.strip_suffix(']') else {
                errors.push(err(format!("malformed section header `{content}`")));
                continue;
            };
            let name = name.trim();
            section = Section::ALL.iter().copied().find(|s| s.name() == name);
            if section.is_none() {
                let known: Vec<_> = Section::ALL.iter().map(|s| format!("[{}]", s.name())).collect();
                errors.push(err(format!("unknown section [{name}] (valid sections: {})", known.join(", "))));
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(err(format!("expected `key = value`, found `{content}`")));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = section else {
            errors.push(err(format!("key `{key}` appears before any section header")));
            continue;
        };
        let Some(&known) = sec.keys().iter().find(|k| **k == key) else {
            errors.push(err(format!(
                "unknown key `{key}` in [{}] (valid keys: {})",
                sec.name(),
                sec.keys().join(", ")
            )));
            continue;
        };
        if let Some(previous) = entries.get(&(sec, known)) {
            errors.push(err(format!("`{key}` already set on line {}", previous.line)));
            continue;
        }
        entries.insert((sec, known), Entry { line, value: value.to_string() });
    }

    for (sec, key) in REQUIRED {
        if !entries.contains_key(&(sec, key)) {
            errors.push(ConfigError { line: None, message: format!("missing required key `{key}` in [{}]", sec.name()) });
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }

    let mut reader = Reader { entries: &entries, errors: &mut errors };
    let cfg = reader.build();
    match cfg {
        Some(cfg) if errors.is_empty() => Ok(cfg),
        _ => Err(ConfigErrors(errors)),
    }
}

struct Reader<'a> {
    entries: &'a BTreeMap<(Section, &'static str), Entry>,
    errors: &'a mut Vec<ConfigError>,
}

impl Reader<'_> {
    fn fail(&mut self, line: impl Into<Option<usize>>, message: String) {
        self.errors.push(ConfigError { line: line.into(), message });
    }

    fn scalar(&mut self, sec: Section, key: &str, dim: Dimension) -> Option<f64> {
        let entry = self.entries.get(&(sec, key_of(sec, key)))?;
        match parse_quantity(&entry.value, dim, None) {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(entry.line, format!("`{key}`: {e}"));
                None
            }
        }
    }

    fn list(&mut self, sec: Section, key: &str, dim: Dimension) -> Option<(usize, Vec<f64>)> {
        let entry = self.entries.get(&(sec, key_of(sec, key)))?;
        match parse_list(&entry.value, dim) {
            Ok(v) => Some((entry.line, v)),
            Err(e) => {
                self.fail(entry.line, format!("`{key}`: {e}"));
                None
            }
        }
    }

    fn build(&mut self) -> Option<SystemConfig> {
        let species = self.species();
        let big_h = self.scalar(Section::Geometry, "H", Dimension::Length);
        let a = self.scalar(Section::Geometry, "a", Dimension::Length);
        let l = self.scalar(Section::Geometry, "L", Dimension::Length);
        let heights = self.list(Section::Geometry, "h0", Dimension::Length);
        let separations = self.list(Section::Geometry, "separation", Dimension::Length);
        let omegas = self.list(Section::Modes, "omega", Dimension::Frequency);
        let ions = self.ion_count();
        let environment = self.environment();

        let (heights, omegas) = (heights?, omegas?);
        let n = ions.unwrap_or_else(|| heights.1.len().max(omegas.1.len()).max(2));
        let heights = self.broadcast("h0", heights, n);
        let omegas = self.broadcast("omega", omegas, n);
        let mut geometry = TrapGeometry::new(big_h?, a?, l?, heights?);
        if let Some((_, seps)) = separations {
            geometry = geometry.with_separations(seps);
        }
        Some(SystemConfig {
            species: species?,
            geometry,
            modes: ModeSpec::from_angular(omegas?),
            environment: environment?,
        })
    }

    fn ion_count(&mut self) -> Option<usize> {
        let entry = self.entries.get(&(Section::Geometry, "ions"))?;
        match entry.value.parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => {
                self.fail(entry.line, format!("`ions` must be a positive integer, got `{}`", entry.value));
                None
            }
        }
    }

    fn broadcast(&mut self, key: &str, (line, values): (usize, Vec<f64>), n: usize) -> Option<Vec<f64>> {
        match values.len() {
            1 => Some(vec![values[0]; n]),
            len if len == n => Some(values),
            len => {
                self.fail(line, format!("`{key}` lists {len} values for {n} ions (give 1 or {n})"));
                None
            }
        }
    }

    fn species(&mut self) -> Option<IonSpecies> {
        let name = self.entries.get(&(Section::Species, "name")).map(|e| (e.line, e.value.clone()));
        let mass = self.scalar(Section::Species, "mass", Dimension::Mass);
        let charge = self.scalar(Section::Species, "charge", Dimension::Charge);
        let has_mass = self.entries.contains_key(&(Section::Species, "mass"));
        let has_charge = self.entries.contains_key(&(Section::Species, "charge"));
        if !has_mass && !has_charge {
            let (line, name) = match name {
                Some((line, name)) => (Some(line), name),
                None => (None, "Ca40+".to_string()),
            };
            return match species_constants(&name) {
                Ok(s) => Some(s),
                Err(e) => {
                    self.fail(line, e.to_string());
                    None
                }
            };
        }
        // Explicit mass or charge: start from the named species if it is
        // known, otherwise both must be given.
        let label = name.as_ref().map(|(_, n)| n.clone()).unwrap_or_else(|| "custom".to_string());
        let base = species_constants(&label).ok();
        let line = name.as_ref().map(|(l, _)| *l);
        let mass = if has_mass { mass? } else if let Some(b) = &base { b.mass } else {
            self.fail(line, format!("species `{label}` is not built in; give `mass`"));
            return None;
        };
        let charge = if has_charge {
            charge?
        } else {
            base.as_ref().map(|b| b.charge).unwrap_or(ionwire_core::constants::ELEMENTARY_CHARGE)
        };
        match IonSpecies::new(label, mass, charge) {
            Ok(s) => Some(s),
            Err(e) => {
                self.fail(line, e.to_string());
                None
            }
        }
    }

    fn environment(&mut self) -> Option<Environment> {
        let mut env = Environment::default();
        let mut ok = true;
        let mut set = |this: &mut Self, key: &str, dim: Dimension, slot: &mut f64| {
            if this.entries.contains_key(&(Section::Environment, key_of(Section::Environment, key))) {
                match this.scalar(Section::Environment, key, dim) {
                    Some(v) => *slot = v,
                    None => ok = false,
                }
            }
        };
        set(self, "T", Dimension::Temperature, &mut env.temperature);
        set(self, "R", Dimension::Resistance, &mut env.wire_resistance);
        // `Rg = inf` removes the leakage path entirely.
        let open_circuit = self
            .entries
            .get(&(Section::Environment, "Rg"))
            .is_some_and(|e| e.value.split_whitespace().next() == Some("inf"));
        if open_circuit {
            env.leakage_resistance = f64::INFINITY;
        } else {
            set(self, "Rg", Dimension::Resistance, &mut env.leakage_resistance);
        }
        set(self, "ratio", Dimension::Dimensionless, &mut env.resistivity_ratio);
        if self.entries.contains_key(&(Section::Environment, "anomalous_rate")) {
            match self.scalar(Section::Environment, "anomalous_rate", Dimension::Rate) {
                Some(v) => env.anomalous_heating_rate = Some(v),
                None => ok = false,
            }
        }
        ok.then_some(env)
    }
}

fn key_of(sec: Section, key: &str) -> &'static str {
    sec.keys().iter().copied().find(|k| *k == key).expect("key belongs to section")
}

fn join(values: &[f64], dim: Dimension) -> String {
    values.iter().map(|v| format_si(*v, dim)).collect::<Vec<_>>().join(", ")
}

/// Writes `cfg` in SI units with exact float text; parsing the result gives
/// back an identical configuration.
pub fn dump_config(cfg: &SystemConfig) -> String {
    let g = &cfg.geometry;
    let e = &cfg.environment;
    let mut out = String::new();
    out.push_str("[species]\n");
    out.push_str(&format!("name = {}\n", cfg.species.name));
    out.push_str(&format!("mass = {}\n", format_si(cfg.species.mass, Dimension::Mass)));
    out.push_str(&format!("charge = {}\n", format_si(cfg.species.charge, Dimension::Charge)));
    out.push_str("\n[geometry]\n");
    out.push_str(&format!("ions = {}\n", g.ion_count()));
    out.push_str(&format!("H = {}\n", format_si(g.wire_height, Dimension::Length)));
    out.push_str(&format!("a = {}\n", format_si(g.wire_radius, Dimension::Length)));
    out.push_str(&format!("L = {}\n", format_si(g.wire_length, Dimension::Length)));
    out.push_str(&format!("h0 = {}\n", join(&g.ion_heights, Dimension::Length)));
    if !g.ion_separations.is_empty() {
        out.push_str(&format!("separation = {}\n", join(&g.ion_separations, Dimension::Length)));
    }
    out.push_str("\n[modes]\n");
    out.push_str(&format!("omega = {}\n", join(cfg.modes.omegas(), Dimension::Frequency)));
    out.push_str("\n[environment]\n");
    out.push_str(&format!("T = {}\n", format_si(e.temperature, Dimension::Temperature)));
    out.push_str(&format!("R = {}\n", format_si(e.wire_resistance, Dimension::Resistance)));
    if e.leakage_resistance.is_infinite() {
        out.push_str("Rg = inf\n");
    } else {
        out.push_str(&format!("Rg = {}\n", format_si(e.leakage_resistance, Dimension::Resistance)));
    }
    out.push_str(&format!("ratio = {}\n", format_si(e.resistivity_ratio, Dimension::Dimensionless)));
    if let Some(rate) = e.anomalous_heating_rate {
        out.push_str(&format!("anomalous_rate = {}\n", format_si(rate, Dimension::Rate)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASELINE: &str = "\
[species]
name = Ca40+

[geometry]
H = 200 um
a = 12.5 um
L = 10 mm
h0 = 150 um

[modes]
omega = 1 MHz

[environment]
T = 300 K
R = 0.6 ohm
";

    #[test]
    fn baseline_file_matches_library_baseline() {
        assert_eq!(parse_config(BASELINE).unwrap(), SystemConfig::ca40_baseline());
    }

    #[test]
    fn empty_file_lists_every_required_key() {
        let errs = parse_config("").unwrap_err().0;
        let missing: Vec<_> = errs.iter().map(|e| e.message.clone()).collect();
        for key in ["`H`", "`a`", "`L`", "`h0`", "`omega`"] {
            assert!(missing.iter().any(|m| m.contains(key)), "{key} not reported: {missing:?}");
        }
        assert_eq!(errs.len(), 5);
    }

    #[test]
    fn unitless_value_is_reported_on_its_line() {
        let text = BASELINE.replace("H = 200 um", "H = 200");
        let errs = parse_config(&text).unwrap_err().0;
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(5));
        assert!(errs[0].message.contains("needs a unit"));
    }

    #[test]
    fn unknown_key_lists_valid_keys() {
        let text = BASELINE.replace("a = 12.5 um", "radius = 12.5 um");
        let errs = parse_config(&text).unwrap_err().0;
        assert!(errs.iter().any(|e| e.line == Some(6) && e.message.contains("valid keys: H, a, L, h0")));
        assert!(errs.iter().any(|e| e.message.contains("missing required key `a`")));
    }

    #[test]
    fn structural_errors() {
        assert!(parse_config("H = 1 m").unwrap_err().0[0].message.contains("before any section"));
        assert!(parse_config("[wire]\n").unwrap_err().0[0].message.contains("unknown section"));
        assert!(parse_config("[geometry\n").unwrap_err().0[0].message.contains("malformed"));
        let dup = BASELINE.replace("L = 10 mm", "L = 10 mm\nL = 11 mm");
        assert!(parse_config(&dup).unwrap_err().0[0].message.contains("already set"));
    }

    #[test]
    fn lists_broadcast_and_count() {
        let text = BASELINE.replace("h0 = 150 um", "ions = 3\nh0 = 100, 150, 170 um");
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.ion_count(), 3);
        assert_eq!(cfg.modes.len(), 3);
        let bad = BASELINE.replace("h0 = 150 um", "ions = 3\nh0 = 100, 150 um");
        assert!(parse_config(&bad).unwrap_err().0[0].message.contains("2 values for 3 ions"));
    }

    #[test]
    fn custom_species_and_environment() {
        let text = BASELINE.replace("name = Ca40+", "name = Ba138+\nmass = 137.905 u")
            + "Rg = 1 TOhm\nratio = 80\nanomalous_rate = 25 /s\n";
        let cfg = parse_config(&text).unwrap();
        assert_eq!(cfg.species.name, "Ba138+");
        assert_eq!(cfg.environment.leakage_resistance, 1e12);
        assert_eq!(cfg.environment.resistivity_ratio, 80.0);
        assert_eq!(cfg.environment.anomalous_heating_rate, Some(25.0));
        let unknown = BASELINE.replace("Ca40+", "Xe131+");
        assert!(parse_config(&unknown).unwrap_err().0[0].message.contains("known"));
    }

    #[test]
    fn dump_round_trips() {
        let mut cfg = SystemConfig::ca40_baseline();
        assert_eq!(parse_config(&dump_config(&cfg)).unwrap(), cfg);
        cfg.geometry = cfg.geometry.clone().with_separations(vec![3e-3]);
        cfg.environment.anomalous_heating_rate = Some(12.5);
        cfg.environment.temperature = 4.2;
        cfg.species = IonSpecies::new("X+", 1.234e-25, 3.2e-19).unwrap();
        assert_eq!(parse_config(&dump_config(&cfg)).unwrap(), cfg);
        cfg.environment.leakage_resistance = f64::INFINITY;
        assert_eq!(parse_config(&dump_config(&cfg)).unwrap(), cfg);
    }
}
