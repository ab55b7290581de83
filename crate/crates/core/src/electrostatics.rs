//! Electrostatics of a thin floating wire of radius `a` and length `L` held at
//! height `H` above a grounded plane, with point-like ions between wire and
//! plane.
//!
//! Sign convention: heights are measured upward from the ground plane, so a
//! positive displacement `y` moves an ion toward the wire.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::constants::VACUUM_PERMITTIVITY;
use crate::physmodel::{IonSpecies, SystemConfig, TrapGeometry, ValidationReport};
use crate::{Error, Result};

/// Linear charge density on the wire, C/m.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct WireCharge(pub f64);

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingResult {
    pub alpha: f64,
    pub beta: Vec<f64>,
    /// N/m
    pub gamma: f64,
    pub validity: ValidationReport,
}

/// α = ln((2H − a)/a).
pub fn geometry_alpha(wire_height: f64, wire_radius: f64) -> Result<f64> {
    if !(wire_radius > 0.0 && wire_radius < 2.0 * wire_height) {
        return Err(Error::domain(format!(
            "wire radius a = {wire_radius} m must lie in (0, 2H) with H = {wire_height} m"
        )));
    }
    Ok(((2.0 * wire_height - wire_radius) / wire_radius).ln())
}

/// ln((H + h)/(H − h)), the site factor shared by the potential, the induced
/// charge and the interaction energy.
pub(crate) fn site_log(wire_height: f64, h: f64) -> Result<f64> {
    if !(h.abs() < wire_height) {
        return Err(Error::domain(format!(
            "ion height h = {h} m must be below the wire height H = {wire_height} m"
        )));
    }
    Ok(((wire_height + h) / (wire_height - h)).ln())
}

fn check_height(wire_height: f64, h: f64) -> Result<()> {
    if !(h >= 0.0 && h < wire_height) {
        return Err(Error::domain(format!(
            "ion height h = {h} m must lie in [0, H) with H = {wire_height} m"
        )));
    }
    Ok(())
}

/// β = 2H² / (α (H² − h²)).
pub fn geometry_beta(wire_height: f64, h: f64, alpha: f64) -> Result<f64> {
    check_height(wire_height, h)?;
    if !(alpha > 0.0) {
        return Err(Error::domain(format!("geometry constant alpha = {alpha} must be positive")));
    }
    let h2 = wire_height * wire_height;
    Ok(2.0 * h2 / (alpha * (h2 - h * h)))
}

/// Potentials when the wire carries linear charge `lambda` and the ions are
/// uncharged.
#[derive(Debug, Clone, PartialEq)]
pub struct Potentials {
    /// V
    pub wire: f64,
    /// V, one per ion site
    pub sites: Vec<f64>,
}

pub fn wire_and_site_potentials(lambda: WireCharge, geom: &TrapGeometry) -> Result<Potentials> {
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    let scale = lambda.0 / (2.0 * PI * VACUUM_PERMITTIVITY);
    let sites = geom
        .ion_heights
        .iter()
        .map(|&h| {
            check_height(geom.wire_height, h)?;
            Ok(scale * site_log(geom.wire_height, h)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Potentials { wire: scale * alpha, sites })
}

/// Wire potential V′ when each of the two ions carries its charge and the
/// wire carries no net charge (reciprocity with [`wire_and_site_potentials`]).
pub fn induced_wire_potential(species: &IonSpecies, geom: &TrapGeometry) -> Result<f64> {
    if geom.ion_count() != 2 {
        return Err(Error::IonCount { expected: 2, found: geom.ion_count() });
    }
    induced_potential_at(species.charge, geom.wire_height, geom.wire_length, &geom.ion_heights)
}

fn induced_potential_at(charge: f64, wire_height: f64, wire_length: f64, heights: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for &h in heights {
        sum += site_log(wire_height, h)?;
    }
    Ok(charge / (2.0 * PI * VACUUM_PERMITTIVITY * wire_length) * sum)
}

/// Energy Uᵢ of ion `i` in the wire potential V′.
pub fn interaction_energy(species: &IonSpecies, v_prime: f64, geom: &TrapGeometry, i: usize) -> Result<f64> {
    let h = *geom
        .ion_heights
        .get(i)
        .ok_or(Error::IonIndex { index: i, count: geom.ion_count() })?;
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    energy_at(species.charge, v_prime, alpha, geom.wire_height, h)
}

fn energy_at(charge: f64, v_prime: f64, alpha: f64, wire_height: f64, h: f64) -> Result<f64> {
    Ok(charge * v_prime / alpha * site_log(wire_height, h)?)
}

/// Closed-form coupling between ions at heights `h1`, `h2`; the building
/// block for both the two-ion constant and the N-ion matrix.
pub(crate) fn pair_coupling(charge: f64, geom: &TrapGeometry, alpha: f64, h1: f64, h2: f64) -> f64 {
    let big_h2 = geom.wire_height * geom.wire_height;
    // Fixed operand order keeps γ bit-identical under ion exchange.
    let (h1, h2) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
    2.0 * charge * charge * big_h2
        / (PI * VACUUM_PERMITTIVITY * alpha * geom.wire_length * (big_h2 - h1 * h1) * (big_h2 - h2 * h2))
}

/// The bilinear coupling γ of the two-ion Hamiltonian, including the factor
/// 1/2 that avoids double counting the electrostatic energy. Validity-regime
/// warnings ride along in the result.
pub fn coupling_constant(cfg: &SystemConfig) -> Result<CouplingResult> {
    cfg.require_ions(2)?;
    let validity = cfg.require_valid()?;
    let geom = &cfg.geometry;
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    let beta = geom
        .ion_heights
        .iter()
        .map(|&h| geometry_beta(geom.wire_height, h, alpha))
        .collect::<Result<Vec<_>>>()?;
    let gamma = pair_coupling(cfg.charge(), geom, alpha, geom.ion_heights[0], geom.ion_heights[1]);
    Ok(CouplingResult { alpha, beta, gamma, validity })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleEstimate {
    /// N/m
    pub gamma: f64,
    /// Finite-difference step actually used, m.
    pub step: f64,
    pub accuracy_warning: Option<String>,
}

/// Default finite-difference step: (H − max h₀)/10³.
pub fn default_oracle_step(geom: &TrapGeometry) -> f64 {
    let h_max = geom.ion_heights.iter().copied().fold(0.0, f64::max);
    (geom.wire_height - h_max) / 1e3
}

/// Independent estimate of γ: half the mixed second derivative of U₁ + U₂
/// with respect to the two displacements, by a 5×5 product of fourth-order
/// central stencils applied to the potential and energy expressions.
pub fn coupling_constant_oracle(cfg: &SystemConfig, step: f64) -> Result<OracleEstimate> {
    cfg.require_ions(2)?;
    cfg.require_valid()?;
    let geom = &cfg.geometry;
    let big_h = geom.wire_height;
    let gap = geom.ion_heights.iter().map(|h| big_h - h).fold(f64::INFINITY, f64::min);
    if !(step > 0.0) {
        return Err(Error::domain(format!("finite-difference step must be positive, got {step}")));
    }
    if 2.0 * step >= gap {
        return Err(Error::domain(format!(
            "finite-difference step {step} m pushes an ion past the wire (gap {gap} m)"
        )));
    }
    let accuracy_warning = (step > gap / 100.0).then(|| {
        format!("step {step} m exceeds 1% of the ion-wire gap {gap} m; expect reduced accuracy")
    });

    let alpha = geometry_alpha(big_h, geom.wire_radius)?;
    let charge = cfg.charge();
    let (h1, h2) = (geom.ion_heights[0], geom.ion_heights[1]);
    let total_energy = |y1: f64, y2: f64| -> Result<f64> {
        let heights = [h1 + y1, h2 + y2];
        let v_prime = induced_potential_at(charge, big_h, geom.wire_length, &heights)?;
        Ok(energy_at(charge, v_prime, alpha, big_h, heights[0])?
            + energy_at(charge, v_prime, alpha, big_h, heights[1])?)
    };

    const OFFSETS: [f64; 4] = [-2.0, -1.0, 1.0, 2.0];
    const WEIGHTS: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
    let mut acc = 0.0;
    for (o1, w1) in OFFSETS.iter().zip(WEIGHTS) {
        for (o2, w2) in OFFSETS.iter().zip(WEIGHTS) {
            acc += w1 * w2 * total_energy(o1 * step, o2 * step)?;
        }
    }
    let mixed = acc / (144.0 * step * step);
    Ok(OracleEstimate { gamma: 0.5 * mixed, step, accuracy_warning })
}

/// Charge drawn onto the wire by an ion at height `h`.
pub fn induced_charge(species: &IonSpecies, wire_height: f64, wire_radius: f64, h: f64) -> Result<f64> {
    check_height(wire_height, h)?;
    let alpha = geometry_alpha(wire_height, wire_radius)?;
    Ok(-species.charge / alpha * site_log(wire_height, h)?)
}

/// Vertical field at height `h` produced by the wire held at `v_wire`.
pub fn field_at_ion(v_wire: f64, wire_height: f64, h: f64, alpha: f64) -> Result<f64> {
    let beta = geometry_beta(wire_height, h, alpha)?;
    Ok(-(beta / wire_height) * v_wire)
}
