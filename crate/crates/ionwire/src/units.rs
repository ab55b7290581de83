//! Physical quantities written as `value unit`, converted to SI.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    /// Angular frequency; cyclic units are multiplied by 2π.
    Frequency,
    Temperature,
    Resistance,
    Mass,
    Charge,
    /// Events per second.
    Rate,
    Dimensionless,
}

impl Dimension {
    /// Accepted unit spellings with their factor to SI; the first is
    /// canonical. A negative entry −d means "divide by d", which is exact
    /// where multiplying by 1/d would not be (200 um → 2e-4 m).
    fn units(self) -> &'static [(&'static str, f64)] {
        match self {
            Dimension::Length => &[
                ("m", 1.0),
                ("cm", -1e2),
                ("mm", -1e3),
                ("um", -1e6),
                ("µm", -1e6),
                ("μm", -1e6),
                ("nm", -1e9),
            ],
            Dimension::Frequency => &[
                ("rad/s", 1.0),
                ("Hz", 2.0 * PI),
                ("kHz", 2.0 * PI * 1e3),
                ("MHz", 2.0 * PI * 1e6),
                ("GHz", 2.0 * PI * 1e9),
            ],
            Dimension::Temperature => &[("K", 1.0), ("mK", -1e3)],
            Dimension::Resistance => &[
                ("ohm", 1.0),
                ("Ohm", 1.0),
                ("Ω", 1.0),
                ("mohm", -1e3),
                ("mOhm", -1e3),
                ("mΩ", -1e3),
                ("kohm", 1e3),
                ("kOhm", 1e3),
                ("kΩ", 1e3),
                ("Mohm", 1e6),
                ("MOhm", 1e6),
                ("MΩ", 1e6),
                ("Gohm", 1e9),
                ("GOhm", 1e9),
                ("GΩ", 1e9),
                ("Tohm", 1e12),
                ("TOhm", 1e12),
                ("TΩ", 1e12),
            ],
            Dimension::Mass => &[("kg", 1.0), ("u", ionwire_core::constants::ATOMIC_MASS_UNIT), ("amu", ionwire_core::constants::ATOMIC_MASS_UNIT)],
            Dimension::Charge => &[("C", 1.0), ("e", ionwire_core::constants::ELEMENTARY_CHARGE)],
            Dimension::Rate => &[("1/s", 1.0), ("/s", 1.0), ("quanta/s", 1.0)],
            Dimension::Dimensionless => &[("", 1.0)],
        }
    }

    pub fn canonical_unit(self) -> &'static str {
        self.units()[0].0
    }

    pub fn accepted(self) -> String {
        self.units().iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", ")
    }

    fn factor(self, unit: &str) -> Option<f64> {
        self.units().iter().find(|(u, _)| *u == unit).map(|(_, f)| *f)
    }
}

/// Splits `"200 um"` or `"200um"` into number and unit text.
fn split_number(text: &str) -> Result<(f64, &str), String> {
    let text = text.trim();
    if text.is_empty() {
        return Err("missing value".into());
    }
    // Longest prefix that parses as a float.
    let mut best = None;
    for (end, _) in text.char_indices().skip(1).chain([(text.len(), ' ')]) {
        if let Ok(v) = text[..end].trim_end().parse::<f64>() {
            best = Some((v, end));
        }
    }
    let (value, end) = best.ok_or_else(|| format!("`{text}` does not start with a number"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not a finite number"));
    }
    Ok((value, text[end..].trim()))
}

/// Parses one quantity. A unit is mandatory unless the dimension is
/// dimensionless, or `default_unit` supplies one for a bare number.
pub fn parse_quantity(text: &str, dim: Dimension, default_unit: Option<&str>) -> Result<f64, String> {
    let (value, unit) = split_number(text)?;
    if dim == Dimension::Dimensionless {
        if !unit.is_empty() {
            return Err(format!("`{text}` should be a plain number"));
        }
        return Ok(value);
    }
    let unit = match (unit, default_unit) {
        ("", Some(u)) => u,
        ("", None) => return Err(format!("`{text}` needs a unit (accepted: {})", dim.accepted())),
        (u, _) => u,
    };
    dim.factor(unit)
        .map(|f| if f < 0.0 { value / -f } else { value * f })
        .ok_or_else(|| format!("unknown unit `{unit}` (accepted: {})", dim.accepted()))
}

/// Parses a comma-separated list. Bare numbers take the unit of the last
/// element, so `150, 160 um` reads as two lengths in micrometres.
pub fn parse_list(text: &str, dim: Dimension) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err(format!("empty element in list `{text}`"));
    }
    let last_unit = split_number(items[items.len() - 1])?.1.to_string();
    let fallback = (!last_unit.is_empty()).then_some(last_unit.as_str());
    items.iter().map(|item| parse_quantity(item, dim, fallback)).collect()
}

/// Exact, SI-unit text for a value: Rust's shortest round-trip form.
pub fn format_si(value: f64, dim: Dimension) -> String {
    let unit = dim.canonical_unit();
    if unit.is_empty() {
        format!("{value:e}")
    } else {
        format!("{value:e} {unit}")
    }
}
