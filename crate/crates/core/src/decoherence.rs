//! Noise and loss budget of the coupling wire.
//!
//! A single ion near its motional ground state drives a current of amplitude
//! `I = e·sqrt(ħω/m)·β/H` through the wire. With resistance R that current
//! dissipates `I²R/2` on average, and the same resistance injects Johnson
//! noise that adds one motional quantum every `τ = hQ/(kT)` seconds. Each
//! timescale is compared against the state-exchange time.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::circuit::{quality_factors_at, wire_capacitance};
use crate::constants::{BOLTZMANN_K, PLANCK_H, PLANCK_HBAR};
use crate::dynamics::exchange_time;
use crate::electrostatics::{geometry_alpha, geometry_beta};
use crate::physmodel::SystemConfig;
use crate::{Error, Result};

/// Temperature at which the wire resistance is the configured value, K.
pub const ROOM_TEMPERATURE: f64 = 300.0;
/// Temperature at which the resistance has dropped by the resistivity ratio, K.
pub const CRYOGENIC_TEMPERATURE: f64 = 4.0;

/// Current amplitude through the wire for ion `i` in a low-lying motional
/// state, A.
pub fn induced_current_amplitude(cfg: &SystemConfig, i: usize) -> Result<f64> {
    cfg.check_ion(i)?;
    let geom = &cfg.geometry;
    let omega = cfg.modes.omega(i);
    if !(omega > 0.0) {
        return Err(Error::domain("secular frequency must be positive"));
    }
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    let beta = geometry_beta(geom.wire_height, geom.ion_heights[i], alpha)?;
    let velocity = (PLANCK_HBAR * omega / cfg.mass()).sqrt();
    Ok(cfg.charge().abs() * velocity * beta / geom.wire_height)
}

/// Wire resistance at temperature `t`: R/ratio at or below 4 K, R at 300 K,
/// linear in between and continued linearly above 300 K.
pub fn effective_resistance(cfg: &SystemConfig, t: f64) -> Result<f64> {
    let env = &cfg.environment;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {t}")));
    }
    if !(env.resistivity_ratio >= 1.0 && env.resistivity_ratio.is_finite()) {
        return Err(Error::domain(format!("resistivity ratio must be >= 1, got {}", env.resistivity_ratio)));
    }
    let room = env.wire_resistance;
    let cold = room / env.resistivity_ratio;
    let frac = (t.max(CRYOGENIC_TEMPERATURE) - CRYOGENIC_TEMPERATURE) / (ROOM_TEMPERATURE - CRYOGENIC_TEMPERATURE);
    Ok(cold + (room - cold) * frac)
}

fn check_resistance(resistance: f64) -> Result<()> {
    if !(resistance >= 0.0 && resistance.is_finite()) {
        return Err(Error::domain(format!("wire resistance must be >= 0, got {resistance}")));
    }
    Ok(())
}

/// Time to dissipate one quantum ħω at resistance `resistance`, shortest over
/// the ions. Infinite for a lossless wire.
pub fn dissipation_time_at(cfg: &SystemConfig, resistance: f64) -> Result<f64> {
    check_resistance(resistance)?;
    let mut worst = f64::INFINITY;
    for i in 0..cfg.ion_count() {
        let current = induced_current_amplitude(cfg, i)?;
        if resistance == 0.0 {
            continue;
        }
        let power = 0.5 * current * current * resistance;
        worst = worst.min(PLANCK_HBAR * cfg.modes.omega(i) / power);
    }
    Ok(worst)
}

/// Dissipation time with the configured (room-temperature) resistance, s.
pub fn dissipation_time(cfg: &SystemConfig) -> Result<f64> {
    dissipation_time_at(cfg, cfg.environment.wire_resistance)
}

/// Johnson-noise heating time hQ/(kT) per quantum at resistance `resistance`,
/// shortest over the ions. Infinite when T or R vanishes.
pub fn johnson_heating_time_at(cfg: &SystemConfig, temperature: f64, resistance: f64) -> Result<f64> {
    check_resistance(resistance)?;
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::domain(format!("temperature must be >= 0 K, got {temperature}")));
    }
    if temperature == 0.0 || resistance == 0.0 {
        return Ok(f64::INFINITY);
    }
    let q = quality_factors_at(cfg, resistance)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(PLANCK_H * q / (BOLTZMANN_K * temperature))
}

/// Heating time at temperature `t` using the configured resistance as is.
pub fn johnson_heating_time(cfg: &SystemConfig, t: f64) -> Result<f64> {
    johnson_heating_time_at(cfg, t, cfg.environment.wire_resistance)
}

/// Heating time at `t_cryo` with the resistance reduced by the resistivity
/// ratio.
pub fn cryo_heating_time(cfg: &SystemConfig, t_cryo: f64) -> Result<f64> {
    let ratio = cfg.environment.resistivity_ratio;
    if !(ratio >= 1.0 && ratio.is_finite()) {
        return Err(Error::domain(format!("resistivity ratio must be >= 1, got {ratio}")));
    }
    johnson_heating_time_at(cfg, t_cryo, cfg.environment.wire_resistance / ratio)
}

/// 4·R_g·C, s.
pub fn leakage_decay_time(cfg: &SystemConfig) -> Result<f64> {
    Ok(4.0 * cfg.environment.leakage_resistance * wire_capacitance(&cfg.geometry)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    Ok,
    Marginal,
    Blocking,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Ok => "ok",
            Verdict::Marginal => "marginal",
            Verdict::Blocking => "blocking",
        }
    }
}

impl core::fmt::Display for Verdict {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Margins (timescale / t_ex) separating the verdicts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictPolicy {
    /// At or above this margin a mechanism is harmless.
    pub ok_margin: f64,
    /// Below this margin a mechanism destroys the exchange.
    pub blocking_margin: f64,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        VerdictPolicy { ok_margin: 10.0, blocking_margin: 0.1 }
    }
}

impl VerdictPolicy {
    pub fn classify(&self, margin: f64) -> Verdict {
        if margin >= self.ok_margin {
            Verdict::Ok
        } else if margin >= self.blocking_margin {
            Verdict::Marginal
        } else {
            Verdict::Blocking
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Dissipation,
    JohnsonHeating,
    Leakage,
    AnomalousHeating,
}

impl Mechanism {
    pub fn as_str(self) -> &'static str {
        match self {
            Mechanism::Dissipation => "dissipation",
            Mechanism::JohnsonHeating => "johnson",
            Mechanism::Leakage => "leakage",
            Mechanism::AnomalousHeating => "anomalous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanismBudget {
    pub mechanism: Mechanism,
    /// s (per quantum for the heating mechanisms)
    pub time: f64,
    /// time / t_ex
    pub margin: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    /// K
    pub temperature: f64,
    /// Wire resistance at `temperature`, Ω.
    pub effective_resistance: f64,
    /// A, largest over the ions
    pub induced_current: f64,
    /// s
    pub dissipation_time: f64,
    /// s per quantum
    pub johnson_heating_time: f64,
    /// s
    pub leakage_decay: f64,
    /// s per quantum, from the configured empirical rate
    pub anomalous_heating_time: Option<f64>,
    /// s
    pub exchange_time: f64,
    pub mechanisms: Vec<MechanismBudget>,
}

impl NoiseBudget {
    pub fn get(&self, mechanism: Mechanism) -> Option<&MechanismBudget> {
        self.mechanisms.iter().find(|m| m.mechanism == mechanism)
    }

    /// Worst verdict over all mechanisms.
    pub fn overall(&self) -> Verdict {
        self.mechanisms.iter().map(|m| m.verdict).max().unwrap_or(Verdict::Ok)
    }

    pub fn is_blocking(&self) -> bool {
        self.overall() == Verdict::Blocking
    }
}

/// Budget at the configured temperature, with the resistance scaled to that
/// temperature by [`effective_resistance`].
pub fn noise_budget(cfg: &SystemConfig) -> Result<NoiseBudget> {
    noise_budget_with(cfg, &VerdictPolicy::default())
}

pub fn noise_budget_with(cfg: &SystemConfig, policy: &VerdictPolicy) -> Result<NoiseBudget> {
    let exchange = exchange_time(cfg)?.exchange_time;
    let temperature = cfg.environment.temperature;
    let resistance = effective_resistance(cfg, temperature)?;
    let mut induced_current: f64 = 0.0;
    for i in 0..cfg.ion_count() {
        induced_current = induced_current.max(induced_current_amplitude(cfg, i)?);
    }
    let dissipation = dissipation_time_at(cfg, resistance)?;
    let johnson = johnson_heating_time_at(cfg, temperature, resistance)?;
    let leakage = leakage_decay_time(cfg)?;
    let anomalous = match cfg.environment.anomalous_heating_rate {
        Some(rate) if rate > 0.0 && rate.is_finite() => Some(1.0 / rate),
        Some(0.0) => Some(f64::INFINITY),
        Some(rate) => return Err(Error::domain(format!("anomalous heating rate must be >= 0, got {rate}"))),
        None => None,
    };

    let entry = |mechanism, time: f64| {
        let margin = time / exchange;
        MechanismBudget { mechanism, time, margin, verdict: policy.classify(margin) }
    };
    let mut mechanisms = alloc::vec![
        entry(Mechanism::Dissipation, dissipation),
        entry(Mechanism::JohnsonHeating, johnson),
        entry(Mechanism::Leakage, leakage),
    ];
    if let Some(time) = anomalous {
        mechanisms.push(entry(Mechanism::AnomalousHeating, time));
    }
    Ok(NoiseBudget {
        temperature,
        effective_resistance: resistance,
        induced_current,
        dissipation_time: dissipation,
        johnson_heating_time: johnson,
        leakage_decay: leakage,
        anomalous_heating_time: anomalous,
        exchange_time: exchange,
        mechanisms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn baseline() -> SystemConfig {
        SystemConfig::ca40_baseline()
    }

    #[test]
    fn baseline_current_and_dissipation() {
        let cfg = baseline();
        let i = induced_current_amplitude(&cfg, 0).unwrap();
        assert!(i > 0.09e-15 && i < 0.13e-15, "{i}");
        let t = dissipation_time(&cfg).unwrap();
        assert!(t > 1.6e5 && t < 2.4e5, "{t}");
    }

    #[test]
    fn current_scalings() {
        let cfg = baseline();
        let i0 = induced_current_amplitude(&cfg, 0).unwrap();
        let mut heavy = cfg.clone();
        heavy.species.mass *= 4.0;
        assert!((induced_current_amplitude(&heavy, 0).unwrap() / i0 - 0.5).abs() < 1e-12);

        let mut centered = cfg.clone();
        centered.geometry.ion_heights = alloc::vec![0.0, 0.0];
        let geom = &centered.geometry;
        let alpha = geometry_alpha(geom.wire_height, geom.wire_radius).unwrap();
        let expect = cfg.charge() * (PLANCK_HBAR * cfg.modes.omega(0) / cfg.mass()).sqrt() * (2.0 / alpha)
            / geom.wire_height;
        let got = induced_current_amplitude(&centered, 0).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-12);
        assert!(induced_current_amplitude(&cfg, 2).is_err());
    }

    #[test]
    fn johnson_times() {
        let cfg = baseline();
        let room = johnson_heating_time(&cfg, 300.0).unwrap();
        assert!(room > 0.09 && room < 0.11, "{room}");
        let cold = cryo_heating_time(&cfg, 4.0).unwrap();
        assert!(cold > 340.0 && cold < 420.0, "{cold}");
        assert!((cold / room / (75.0 * 50.0) - 1.0).abs() < 1e-12);
        assert!((johnson_heating_time(&cfg, 600.0).unwrap() / room - 0.5).abs() < 1e-12);

        let mut unit_ratio = cfg.clone();
        unit_ratio.environment.resistivity_ratio = 1.0;
        assert!((cryo_heating_time(&unit_ratio, 4.0).unwrap() / room - 75.0).abs() < 1e-9);
    }

    #[test]
    fn lossless_or_cold_is_infinite() {
        let mut cfg = baseline();
        assert_eq!(johnson_heating_time(&cfg, 0.0).unwrap(), f64::INFINITY);
        cfg.environment.wire_resistance = 0.0;
        assert_eq!(johnson_heating_time(&cfg, 300.0).unwrap(), f64::INFINITY);
        assert_eq!(dissipation_time(&cfg).unwrap(), f64::INFINITY);
        assert!(johnson_heating_time(&cfg, -1.0).is_err());
    }

    #[test]
    fn doubling_resistance_halves_both_times() {
        let cfg = baseline();
        let (d, j) = (dissipation_time(&cfg).unwrap(), johnson_heating_time(&cfg, 300.0).unwrap());
        let mut double = cfg.clone();
        double.environment.wire_resistance *= 2.0;
        assert!((dissipation_time(&double).unwrap() / d - 0.5).abs() < 1e-12);
        assert!((johnson_heating_time(&double, 300.0).unwrap() / j - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tau_t_r_is_invariant() {
        let cfg = baseline();
        let reference = johnson_heating_time(&cfg, 300.0).unwrap() * 300.0 * 0.6;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let t = rng.gen_range(0.01..1000.0);
            let r = rng.gen_range(1e-3..100.0);
            let tau = johnson_heating_time_at(&cfg, t, r).unwrap();
            assert!((tau * t * r / reference - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn effective_resistance_endpoints() {
        let cfg = baseline();
        assert!((effective_resistance(&cfg, 300.0).unwrap() - 0.6).abs() < 1e-15);
        assert!((effective_resistance(&cfg, 4.0).unwrap() - 0.012).abs() < 1e-15);
        assert_eq!(effective_resistance(&cfg, 1.0).unwrap(), effective_resistance(&cfg, 0.0).unwrap());
        assert!(effective_resistance(&cfg, 77.0).unwrap() < effective_resistance(&cfg, 78.0).unwrap());
    }

    #[test]
    fn baseline_budget_verdicts() {
        let mut cfg = baseline();
        let room = noise_budget(&cfg).unwrap();
        assert_eq!(room.get(Mechanism::JohnsonHeating).unwrap().verdict, Verdict::Marginal);
        assert_eq!(room.get(Mechanism::Dissipation).unwrap().verdict, Verdict::Ok);
        assert_eq!(room.get(Mechanism::Leakage).unwrap().verdict, Verdict::Ok);
        assert!(room.get(Mechanism::AnomalousHeating).is_none());
        assert!(!room.is_blocking());
        assert!(room.leakage_decay > 1.0);

        cfg.environment.temperature = 4.0;
        let cold = noise_budget(&cfg).unwrap();
        let johnson = cold.get(Mechanism::JohnsonHeating).unwrap();
        assert_eq!(johnson.verdict, Verdict::Ok);
        assert!(johnson.time > 340.0 && johnson.time < 420.0);
        assert_eq!(cold.overall(), Verdict::Ok);
    }

    #[test]
    fn margins_are_time_over_exchange() {
        let mut cfg = baseline();
        cfg.environment.anomalous_heating_rate = Some(100.0);
        let b = noise_budget(&cfg).unwrap();
        for m in &b.mechanisms {
            assert!((m.margin - m.time / b.exchange_time).abs() <= 1e-15 * m.margin);
        }
        let anomalous = b.get(Mechanism::AnomalousHeating).unwrap();
        assert_eq!(anomalous.time, 0.01);
        assert_eq!(anomalous.verdict, Verdict::Blocking);
        assert!(b.is_blocking());
    }

    #[test]
    fn policy_is_configurable() {
        let strict = VerdictPolicy { ok_margin: 1e9, blocking_margin: 1.0 };
        let b = noise_budget_with(&baseline(), &strict).unwrap();
        assert_eq!(b.get(Mechanism::JohnsonHeating).unwrap().verdict, Verdict::Blocking);
        assert_eq!(b.get(Mechanism::Dissipation).unwrap().verdict, Verdict::Marginal);
    }

    #[test]
    fn verdicts_never_improve_with_heat_or_leakier_supports() {
        let cfg = baseline();
        let mut previous = Verdict::Ok;
        for k in 0..60 {
            let mut c = cfg.clone();
            c.environment.temperature = 0.5 * 1.2f64.powi(k);
            let v = noise_budget(&c).unwrap().overall();
            assert!(v >= previous);
            previous = v;
        }
        let mut previous = Verdict::Ok;
        for k in 0..40 {
            let mut c = cfg.clone();
            c.environment.leakage_resistance = 1e16 / 3f64.powi(k);
            let v = noise_budget(&c).unwrap().overall();
            assert!(v >= previous);
            previous = v;
        }
        assert_eq!(previous, Verdict::Blocking);
    }
}
