//! Ion species, trap geometry, mode frequencies, environment and the
//! aggregate [`SystemConfig`] with its validity checks.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::constants::{ATOMIC_MASS_UNIT, ELEMENTARY_CHARGE};
use crate::{Error, Result};

/// Factor used to read "much greater than" in the long-wire and
/// well-separated-ion approximations.
pub const MUCH_GREATER_FACTOR: f64 = 10.0;

/// Wire radius above `H / THICK_WIRE_DIVISOR` triggers a thin-wire warning.
pub const THICK_WIRE_DIVISOR: f64 = 5.0;

/// Resonance tolerance on |ω₁ − ω₂| / ω₁.
pub const RESONANCE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub name: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
}

/// Built-in species: label, aliases, isotope mass in u, charge state.
const SPECIES_TABLE: &[(&str, &[&str], f64, i32)] = &[
    ("Ca40+", &["40Ca+", "ca40+", "ca40", "40ca+"], 39.9626, 1),
    ("Be9+", &["9Be+", "be9+", "be9"], 9.012_183_1, 1),
    ("Mg24+", &["24Mg+", "mg24+", "mg24"], 23.985_041_7, 1),
    ("Sr88+", &["88Sr+", "sr88+", "sr88"], 87.905_612_5, 1),
    ("Yb171+", &["171Yb+", "yb171+", "yb171"], 170.936_325_8, 1),
];

impl IonSpecies {
    pub fn new(name: impl Into<String>, mass: f64, charge: f64) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidConfig(format!("ion mass must be positive, got {mass}")));
        }
        if !charge.is_finite() || charge == 0.0 {
            return Err(Error::InvalidConfig("ion charge must be non-zero".into()));
        }
        Ok(IonSpecies { name: name.into(), mass, charge })
    }

    pub fn calcium_40() -> Self {
        species_constants("Ca40+").expect("built-in species")
    }

    /// Charge in units of the elementary charge.
    pub fn charge_state(&self) -> f64 {
        self.charge / ELEMENTARY_CHARGE
    }
}

/// Looks up a built-in ion species by label (case-insensitive, a few aliases).
pub fn species_constants(name: &str) -> Result<IonSpecies> {
    let wanted = name.trim();
    for (label, aliases, mass_u, z) in SPECIES_TABLE {
        if label.eq_ignore_ascii_case(wanted) || aliases.iter().any(|a| a.eq_ignore_ascii_case(wanted)) {
            return Ok(IonSpecies {
                name: (*label).to_string(),
                mass: mass_u * ATOMIC_MASS_UNIT,
                charge: f64::from(*z) * ELEMENTARY_CHARGE,
            });
        }
    }
    let known: Vec<&str> = SPECIES_TABLE.iter().map(|s| s.0).collect();
    Err(Error::UnknownSpecies { name: wanted.to_string(), known: known.join(", ") })
}

/// Wire-over-ground-plane geometry. All lengths in metres.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapGeometry {
    /// Height H of the wire axis above the ground plane.
    pub wire_height: f64,
    /// Wire radius a.
    pub wire_radius: f64,
    /// Wire length L.
    pub wire_length: f64,
    /// Equilibrium ion heights h₀ᵢ, one per ion.
    pub ion_heights: Vec<f64>,
    /// Horizontal pairwise separations dᵢⱼ in (0,1), (0,2), …, (1,2), … order.
    /// Empty when not specified.
    pub ion_separations: Vec<f64>,
}

impl TrapGeometry {
    pub fn new(wire_height: f64, wire_radius: f64, wire_length: f64, ion_heights: Vec<f64>) -> Self {
        TrapGeometry { wire_height, wire_radius, wire_length, ion_heights, ion_separations: Vec::new() }
    }

    pub fn with_separations(mut self, separations: Vec<f64>) -> Self {
        self.ion_separations = separations;
        self
    }

    pub fn ion_count(&self) -> usize {
        self.ion_heights.len()
    }

    /// Every length multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        TrapGeometry {
            wire_height: self.wire_height * k,
            wire_radius: self.wire_radius * k,
            wire_length: self.wire_length * k,
            ion_heights: self.ion_heights.iter().map(|h| h * k).collect(),
            ion_separations: self.ion_separations.iter().map(|d| d * k).collect(),
        }
    }

    /// Index into `ion_separations` for the unordered pair (i, j).
    pub fn pair_index(&self, i: usize, j: usize) -> Option<usize> {
        let n = self.ion_count();
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j >= n {
            return None;
        }
        Some(i * (2 * n - i - 1) / 2 + (j - i - 1))
    }

    pub fn separation(&self, i: usize, j: usize) -> Option<f64> {
        self.pair_index(i, j).and_then(|k| self.ion_separations.get(k).copied())
    }
}

/// Secular (angular) frequencies, one per ion.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSpec {
    omegas: Vec<f64>,
}

impl ModeSpec {
    /// From angular frequencies ωᵢ in rad/s.
    pub fn from_angular(omegas: Vec<f64>) -> Self {
        ModeSpec { omegas }
    }

    /// From ordinary frequencies νᵢ in Hz.
    pub fn from_hz(nus: &[f64]) -> Self {
        ModeSpec { omegas: nus.iter().map(|nu| 2.0 * PI * nu).collect() }
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.omegas[i]
    }

    pub fn nu(&self, i: usize) -> f64 {
        self.omegas[i] / (2.0 * PI)
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn scaled(&self, k: f64) -> Self {
        ModeSpec { omegas: self.omegas.iter().map(|w| w * k).collect() }
    }

    /// Largest relative deviation of any frequency from the first one.
    pub fn relative_detuning(&self) -> f64 {
        let Some(&w0) = self.omegas.first() else { return 0.0 };
        self.omegas.iter().map(|w| ((w - w0) / w0).abs()).fold(0.0, f64::max)
    }

    pub fn is_resonant(&self) -> bool {
        self.relative_detuning() <= RESONANCE_TOLERANCE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    /// K
    pub temperature: f64,
    /// Wire resistance at room temperature, Ω.
    pub wire_resistance: f64,
    /// Leakage resistance of the wire supports to ground, Ω.
    pub leakage_resistance: f64,
    /// ρ(300 K) / ρ(cryogenic).
    pub resistivity_ratio: f64,
    /// Empirical anomalous heating rate in quanta/s, if known.
    pub anomalous_heating_rate: Option<f64>,
}

impl Environment {
    pub const DEFAULT_TEMPERATURE: f64 = 300.0;
    pub const DEFAULT_LEAKAGE_RESISTANCE: f64 = 1e13;
    pub const DEFAULT_RESISTIVITY_RATIO: f64 = 50.0;
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            temperature: Self::DEFAULT_TEMPERATURE,
            wire_resistance: 0.0,
            leakage_resistance: Self::DEFAULT_LEAKAGE_RESISTANCE,
            resistivity_ratio: Self::DEFAULT_RESISTIVITY_RATIO,
            anomalous_heating_rate: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub species: IonSpecies,
    pub geometry: TrapGeometry,
    pub modes: ModeSpec,
    pub environment: Environment,
}

impl SystemConfig {
    /// Two ⁴⁰Ca⁺ ions: H = 200 µm, h₀ = 150 µm, L = 10 mm, a = 12.5 µm,
    /// ω = 2π·1 MHz, R = 0.6 Ω at 300 K.
    pub fn ca40_baseline() -> Self {
        SystemConfig {
            species: IonSpecies::calcium_40(),
            geometry: TrapGeometry::new(200e-6, 12.5e-6, 10e-3, alloc::vec![150e-6, 150e-6]),
            modes: ModeSpec::from_hz(&[1e6, 1e6]),
            environment: Environment { wire_resistance: 0.6, ..Environment::default() },
        }
    }

    pub fn ion_count(&self) -> usize {
        self.geometry.ion_count()
    }

    pub fn mass(&self) -> f64 {
        self.species.mass
    }

    pub fn charge(&self) -> f64 {
        self.species.charge
    }

    pub fn validate(&self) -> ValidationReport {
        validate_config(self)
    }

    pub(crate) fn check_ion(&self, i: usize) -> Result<()> {
        let count = self.ion_count();
        if i >= count {
            return Err(Error::IonIndex { index: i, count });
        }
        Ok(())
    }

    pub(crate) fn require_ions(&self, expected: usize) -> Result<()> {
        if self.ion_count() != expected {
            return Err(Error::IonCount { expected, found: self.ion_count() });
        }
        Ok(())
    }

    /// Validation errors as an `Err`, warnings dropped.
    pub(crate) fn require_valid(&self) -> Result<ValidationReport> {
        let report = self.validate();
        if let Some(first) = report.errors.first() {
            return Err(Error::InvalidConfig(first.message.clone()));
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    NoIons,
    IonCountMismatch,
    NonPositiveDimension,
    WireRadiusTooLarge,
    IonAtWireHeight,
    NegativeIonHeight,
    NonPositiveSeparation,
    SeparationCount,
    NonPositiveFrequency,
    InvalidSpecies,
    InvalidEnvironment,
    ShortWire,
    CloseIons,
    ThickWire,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub kind: IssueKind,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.errors.is_empty() && self.warnings.is_empty()
    }

    pub fn has_error(&self, kind: IssueKind) -> bool {
        self.errors.iter().any(|i| i.kind == kind)
    }

    pub fn has_warning(&self, kind: IssueKind) -> bool {
        self.warnings.iter().any(|i| i.kind == kind)
    }

    fn error(&mut self, kind: IssueKind, message: String) {
        self.errors.push(Issue { kind, message });
    }

    fn warn(&mut self, kind: IssueKind, message: String) {
        self.warnings.push(Issue { kind, message });
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Checks hard invariants (errors) and the long-wire / separated-ion
/// approximation regime (warnings). Never fails; the report carries
/// everything.
pub fn validate_config(cfg: &SystemConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let geom = &cfg.geometry;
    let big_h = geom.wire_height;

    if !positive(cfg.species.mass) {
        report.error(IssueKind::InvalidSpecies, format!("ion mass must be positive, got {}", cfg.species.mass));
    }
    if !cfg.species.charge.is_finite() || cfg.species.charge == 0.0 {
        report.error(IssueKind::InvalidSpecies, "ion charge must be non-zero".to_string());
    }

    let mut dims_ok = true;
    for (name, value) in [
        ("wire height H", geom.wire_height),
        ("wire radius a", geom.wire_radius),
        ("wire length L", geom.wire_length),
    ] {
        if !positive(value) {
            dims_ok = false;
            report.error(IssueKind::NonPositiveDimension, format!("{name} must be positive, got {value}"));
        }
    }
    if dims_ok && geom.wire_radius >= big_h {
        report.error(
            IssueKind::WireRadiusTooLarge,
            format!("wire radius a = {} m must be smaller than wire height H = {} m", geom.wire_radius, big_h),
        );
    }

    if geom.ion_heights.is_empty() {
        report.error(IssueKind::NoIons, "at least one ion height is required".to_string());
    }
    for (i, &h) in geom.ion_heights.iter().enumerate() {
        if !h.is_finite() || h < 0.0 {
            report.error(IssueKind::NegativeIonHeight, format!("ion {i}: height h0 = {h} m must be non-negative"));
        } else if dims_ok && h >= big_h {
            report.error(
                IssueKind::IonAtWireHeight,
                format!("ion {i}: ion at wire height or above (h0 = {h} m, H = {big_h} m)"),
            );
        }
    }

    if cfg.modes.len() != geom.ion_count() {
        report.error(
            IssueKind::IonCountMismatch,
            format!("{} ion heights but {} mode frequencies", geom.ion_count(), cfg.modes.len()),
        );
    }
    for (i, &w) in cfg.modes.omegas().iter().enumerate() {
        if !positive(w) {
            report.error(IssueKind::NonPositiveFrequency, format!("ion {i}: secular frequency must be positive, got {w}"));
        }
    }

    let n = geom.ion_count();
    let pairs = n * n.saturating_sub(1) / 2;
    if !geom.ion_separations.is_empty() && geom.ion_separations.len() != pairs {
        report.error(
            IssueKind::SeparationCount,
            format!("{} ion separations given, {} ions need {}", geom.ion_separations.len(), n, pairs),
        );
    }
    for (k, &d) in geom.ion_separations.iter().enumerate() {
        if !positive(d) {
            report.error(IssueKind::NonPositiveSeparation, format!("separation #{k}: d = {d} m must be positive"));
        }
    }

    let env = &cfg.environment;
    if !(env.temperature.is_finite() && env.temperature >= 0.0) {
        report.error(IssueKind::InvalidEnvironment, format!("temperature must be >= 0 K, got {}", env.temperature));
    }
    if !(env.wire_resistance.is_finite() && env.wire_resistance >= 0.0) {
        report.error(IssueKind::InvalidEnvironment, format!("wire resistance must be >= 0, got {}", env.wire_resistance));
    }
    if !(env.leakage_resistance > 0.0) || env.leakage_resistance.is_nan() {
        report.error(
            IssueKind::InvalidEnvironment,
            format!("leakage resistance must be positive, got {}", env.leakage_resistance),
        );
    }
    if !(env.resistivity_ratio.is_finite() && env.resistivity_ratio >= 1.0) {
        report.error(
            IssueKind::InvalidEnvironment,
            format!("resistivity ratio must be >= 1, got {}", env.resistivity_ratio),
        );
    }
    if let Some(rate) = env.anomalous_heating_rate {
        if !(rate.is_finite() && rate >= 0.0) {
            report.error(IssueKind::InvalidEnvironment, format!("anomalous heating rate must be >= 0, got {rate}"));
        }
    }

    if dims_ok {
        if geom.wire_length < MUCH_GREATER_FACTOR * big_h {
            report.warn(
                IssueKind::ShortWire,
                format!(
                    "long-wire limit violated: L = {} m is less than {MUCH_GREATER_FACTOR}·H = {} m",
                    geom.wire_length,
                    MUCH_GREATER_FACTOR * big_h
                ),
            );
        }
        if geom.wire_radius > big_h / THICK_WIRE_DIVISOR && geom.wire_radius < big_h {
            report.warn(
                IssueKind::ThickWire,
                format!("thin-wire limit violated: a = {} m exceeds H/{THICK_WIRE_DIVISOR}", geom.wire_radius),
            );
        }
        for (k, &d) in geom.ion_separations.iter().enumerate() {
            if positive(d) && d < MUCH_GREATER_FACTOR * big_h {
                report.warn(
                    IssueKind::CloseIons,
                    format!(
                        "separated-ion limit violated: separation #{k} d = {d} m is less than {MUCH_GREATER_FACTOR}·H"
                    ),
                );
            }
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn baseline_is_clean() {
        let report = validate_config(&SystemConfig::ca40_baseline());
        assert!(report.is_clean(), "{report:?}");
    }

    #[test]
    fn ion_at_wire_height_is_an_error() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.ion_heights[0] = cfg.geometry.wire_height;
        let report = validate_config(&cfg);
        assert!(report.has_error(IssueKind::IonAtWireHeight));
        assert!(report.errors[0].message.contains("ion at wire height"));
    }

    #[test]
    fn short_wire_warns() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.wire_length = 5.0 * cfg.geometry.wire_height;
        let report = validate_config(&cfg);
        assert!(report.is_ok());
        assert!(report.has_warning(IssueKind::ShortWire));
        assert!(report.warnings[0].message.contains("long-wire limit violated"));
    }

    #[test]
    fn close_ions_and_thick_wire_warn() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.ion_separations = vec![5.0 * cfg.geometry.wire_height];
        cfg.geometry.wire_radius = cfg.geometry.wire_height / 4.0;
        let report = validate_config(&cfg);
        assert!(report.is_ok());
        assert!(report.has_warning(IssueKind::CloseIons));
        assert!(report.has_warning(IssueKind::ThickWire));
    }

    #[test]
    fn hard_errors() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.wire_radius = cfg.geometry.wire_height;
        cfg.geometry.wire_length = 0.0;
        cfg.modes = ModeSpec::from_hz(&[1e6]);
        cfg.environment.leakage_resistance = 0.0;
        let report = validate_config(&cfg);
        assert!(report.has_error(IssueKind::NonPositiveDimension));
        assert!(report.has_error(IssueKind::IonCountMismatch));
        assert!(report.has_error(IssueKind::InvalidEnvironment));

        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.wire_radius = cfg.geometry.wire_height;
        assert!(validate_config(&cfg).has_error(IssueKind::WireRadiusTooLarge));
    }

    #[test]
    fn validation_is_pure() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.wire_length = 1e-3;
        assert_eq!(validate_config(&cfg), validate_config(&cfg));
    }

    #[test]
    fn calcium_constants() {
        let ca = species_constants("Ca40+").unwrap();
        assert!((ca.mass - 6.6359e-26).abs() / 6.6359e-26 < 1e-4);
        assert_eq!(ca.charge, ELEMENTARY_CHARGE);
        assert_eq!(ca.charge_state(), 1.0);
        assert_eq!(species_constants("40ca+").unwrap(), ca);
    }

    #[test]
    fn unknown_species_lists_known() {
        match species_constants("Xx99") {
            Err(Error::UnknownSpecies { known, .. }) => assert!(known.contains("Ca40+")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mode_spec_round_trip() {
        let modes = ModeSpec::from_hz(&[1.234_567e6]);
        let rel = (modes.omega(0) - 2.0 * PI * 1.234_567e6).abs() / modes.omega(0);
        assert!(rel < 1e-12);
        assert!((modes.nu(0) - 1.234_567e6).abs() / 1.234_567e6 < 1e-12);
    }

    #[test]
    fn pair_indexing() {
        let geom = TrapGeometry::new(1.0, 0.1, 10.0, vec![0.1, 0.2, 0.3, 0.4]);
        let mut seen = vec![];
        for i in 0..4 {
            for j in (i + 1)..4 {
                seen.push(geom.pair_index(i, j).unwrap());
                assert_eq!(geom.pair_index(i, j), geom.pair_index(j, i));
            }
        }
        assert_eq!(seen, (0..6).collect::<Vec<_>>());
        assert_eq!(geom.pair_index(2, 2), None);
    }
}
