//! Coupled-oscillator dynamics of ions sharing a floating wire.
//!
//! The two-ion Hamiltonian is
//! `p₁²/2m + mω₁²y₁²/2 + p₂²/2m + mω₂²y₂²/2 + γ y₁ y₂`.
//! [`TwoModeSystem`] carries its parameters; it is normally built from a
//! [`SystemConfig`] but can take an explicit coupling so that exchange
//! dynamics can be studied at desk-scale coupling strengths.

mod classical;
mod coupling;
mod quantum;
mod rwa;

pub use classical::{ClassicalState, NormalModes, TwoModeClassical};
pub use coupling::{build_n_ion_coupling, CouplingMatrix, NIonCoupling, PairWarning};
pub use quantum::{
    coherent_amplitudes, QuantumPropagator, QuantumState, INITIAL_LEAK_LIMIT, TRUNCATION_LEAK_LIMIT,
};
pub use rwa::RwaPropagator;

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::electrostatics::coupling_constant;
use crate::physmodel::{SystemConfig, RESONANCE_TOLERANCE};
use crate::{Error, Result};

/// Parameters of the two-ion Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeSystem {
    /// kg
    pub mass: f64,
    /// rad/s
    pub omegas: [f64; 2],
    /// N/m
    pub gamma: f64,
}

impl TwoModeSystem {
    pub fn new(mass: f64, omegas: [f64; 2], gamma: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::domain("mass must be positive"));
        }
        if !omegas.iter().all(|w| *w > 0.0 && w.is_finite()) {
            return Err(Error::domain("secular frequencies must be positive"));
        }
        if !gamma.is_finite() {
            return Err(Error::domain("coupling must be finite"));
        }
        Ok(TwoModeSystem { mass, omegas, gamma })
    }

    /// Electrostatic coupling from the configured geometry.
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        let coupling = coupling_constant(cfg)?;
        Self::new(cfg.mass(), [cfg.modes.omega(0), cfg.modes.omega(1)], coupling.gamma)
    }

    /// Same masses and frequencies, coupling replaced by `ratio · m ω₁ ω₂`.
    pub fn with_coupling_ratio(self, ratio: f64) -> Self {
        TwoModeSystem { gamma: ratio * self.mass * self.omegas[0] * self.omegas[1], ..self }
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        TwoModeSystem { gamma, ..self }
    }

    /// γ / (m ω₁ ω₂); equals γ/mω² on resonance.
    pub fn coupling_ratio(&self) -> f64 {
        self.gamma / (self.mass * self.omegas[0] * self.omegas[1])
    }

    pub fn relative_detuning(&self) -> f64 {
        ((self.omegas[1] - self.omegas[0]) / self.omegas[0]).abs()
    }

    pub fn is_resonant(&self) -> bool {
        self.relative_detuning() <= RESONANCE_TOLERANCE
    }

    pub(crate) fn require_resonant(&self) -> Result<f64> {
        if !self.is_resonant() {
            return Err(Error::NotResonant { relative_detuning: self.relative_detuning() });
        }
        Ok(0.5 * (self.omegas[0] + self.omegas[1]))
    }

    /// Oscillator length sqrt(ħ / 2mω) of mode `i`, m.
    pub fn oscillator_length(&self, i: usize) -> f64 {
        (crate::constants::PLANCK_HBAR / (2.0 * self.mass * self.omegas[i])).sqrt()
    }

    /// Rotating-wave swap rate Ω = γ/(mω), rad/s.
    pub fn swap_rate(&self) -> Result<f64> {
        let omega = self.require_resonant()?;
        Ok(self.gamma / (self.mass * omega))
    }

    pub fn exchange(&self) -> Result<ExchangeResult> {
        let omega = self.require_resonant()?;
        if !(self.gamma > 0.0) {
            return Err(Error::domain("exchange needs a positive coupling"));
        }
        let m = self.mass;
        let exchange_time = PI * omega * m / self.gamma;
        let mw2 = m * omega * omega;
        let raw = PI * (mw2 / self.gamma + 0.5);
        Ok(ExchangeResult {
            exchange_time,
            theta: Phase::from_radians(raw),
            theta_sensitivity: -PI * mw2 / (self.gamma * self.gamma),
            gamma: self.gamma,
            resonant: true,
        })
    }

    /// Value of the Hamiltonian at a classical phase-space point, J.
    pub fn energy(&self, state: &ClassicalState) -> f64 {
        let [e1, e2] = self.mode_energies(state);
        e1 + e2 + self.gamma * state.positions[0] * state.positions[1]
    }

    /// Uncoupled oscillator energies pᵢ²/2m + mωᵢ²yᵢ²/2, J.
    pub fn mode_energies(&self, state: &ClassicalState) -> [f64; 2] {
        let m = self.mass;
        let e = |i: usize| {
            let (y, p, w) = (state.positions[i], state.momenta[i], self.omegas[i]);
            p * p / (2.0 * m) + 0.5 * m * w * w * y * y
        };
        [e(0), e(1)]
    }
}

/// An angle reported as a principal value in (−π, π] plus whole turns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phase {
    pub principal: f64,
    pub winding: i64,
}

impl Phase {
    pub fn from_radians(raw: f64) -> Self {
        let turns = ((raw - PI) / (2.0 * PI)).ceil();
        let principal = raw - 2.0 * PI * turns;
        Phase { principal, winding: turns as i64 }
    }

    pub fn radians(&self) -> f64 {
        self.principal + 2.0 * PI * self.winding as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeResult {
    /// s
    pub exchange_time: f64,
    /// Phase acquired by the transferred state, Θ = π(mω²/γ + 1/2).
    pub theta: Phase,
    /// dΘ/dγ, rad per N/m.
    pub theta_sensitivity: f64,
    /// N/m
    pub gamma: f64,
    pub resonant: bool,
}

impl ExchangeResult {
    pub fn rate(&self) -> f64 {
        1.0 / self.exchange_time
    }
}

/// State-exchange time and acquired phase for a resonant two-ion config.
pub fn exchange_time(cfg: &SystemConfig) -> Result<ExchangeResult> {
    cfg.require_ions(2)?;
    let detuning = cfg.modes.relative_detuning();
    if detuning > RESONANCE_TOLERANCE {
        return Err(Error::NotResonant { relative_detuning: detuning });
    }
    TwoModeSystem::from_config(cfg)?.exchange()
}

pub fn evolve_classical(cfg: &SystemConfig, state: &ClassicalState, t: f64) -> Result<ClassicalState> {
    let system = TwoModeSystem::from_config(cfg)?;
    TwoModeClassical::new(&system)?.evolve(state, t)
}

pub fn evolve_quantum(cfg: &SystemConfig, state: &QuantumState, t: f64) -> Result<QuantumState> {
    let system = TwoModeSystem::from_config(cfg)?;
    QuantumPropagator::new(&system, state.n_max())?.propagate(state, t)
}

pub fn evolve_rwa(cfg: &SystemConfig, state: &QuantumState, t: f64) -> Result<QuantumState> {
    let system = TwoModeSystem::from_config(cfg)?;
    RwaPropagator::new(&system)?.propagate(state, t)
}

/// Complex coherent-state amplitude μ (dimensionless).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentAmplitude(pub Complex64);

/// Exchange time and the amplitude μ·e^{−iΘ} with which a coherent state
/// |μ⟩ ⊗ |0⟩ arrives at the second ion.
pub fn coherent_exchange(cfg: &SystemConfig, mu: CoherentAmplitude) -> Result<(f64, CoherentAmplitude)> {
    let system = TwoModeSystem::from_config(cfg)?;
    coherent_exchange_for(&system, mu)
}

pub fn coherent_exchange_for(system: &TwoModeSystem, mu: CoherentAmplitude) -> Result<(f64, CoherentAmplitude)> {
    let exchange = system.exchange()?;
    let rwa = RwaPropagator::new(system)?;
    let [_, out] = rwa.transform_amplitudes([mu.0, Complex64::new(0.0, 0.0)], exchange.exchange_time);
    Ok((exchange.exchange_time, CoherentAmplitude(out)))
}

/// Largest deviation, over `t_grid`, between the exact classical energy of
/// ion 1 and the rotating-wave envelope E·cos²(Ωt/2), relative to the total
/// energy. Ion 1 starts displaced, ion 2 at rest.
pub fn rwa_error_metric(system: &TwoModeSystem, t_grid: &[f64]) -> Result<f64> {
    let swap = system.swap_rate()?;
    let propagator = TwoModeClassical::new(system)?;
    let y0 = system.oscillator_length(0);
    let start = ClassicalState::new(alloc::vec![y0, 0.0], alloc::vec![0.0, 0.0])?;
    let total = system.energy(&start);
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let state = propagator.evolve(&start, t)?;
        let exact = system.mode_energies(&state)[0];
        let envelope = total * (0.5 * swap * t).cos().powi(2);
        worst = worst.max((exact - envelope).abs() / total);
    }
    Ok(worst)
}

/// `n` evenly spaced instants covering [0, t_max].
pub fn time_grid(t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![0.0],
        _ => (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn baseline_exchange_time() {
        let res = exchange_time(&SystemConfig::ca40_baseline()).unwrap();
        assert!((res.exchange_time - 0.19).abs() < 0.005, "{}", res.exchange_time);
        assert!(res.resonant);
    }

    #[test]
    fn halving_lengths_divides_by_eight() {
        let cfg = SystemConfig::ca40_baseline();
        let mut half = cfg.clone();
        half.geometry = cfg.geometry.scaled(0.5);
        let t1 = exchange_time(&cfg).unwrap().exchange_time;
        let t2 = exchange_time(&half).unwrap().exchange_time;
        assert!(rel(t1 / t2, 8.0) < 1e-12);
        assert!((t2 - 0.024).abs() < 0.001);
    }

    #[test]
    fn exchange_time_linear_in_omega() {
        let cfg = SystemConfig::ca40_baseline();
        let mut fast = cfg.clone();
        fast.modes = cfg.modes.scaled(2.0);
        let ratio = exchange_time(&fast).unwrap().exchange_time / exchange_time(&cfg).unwrap().exchange_time;
        assert!(rel(ratio, 2.0) < 1e-12);
    }

    #[test]
    fn detuned_config_is_rejected() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.modes = crate::ModeSpec::from_hz(&[1e6, 1.001e6]);
        assert!(matches!(exchange_time(&cfg), Err(Error::NotResonant { .. })));
        assert!(matches!(evolve_rwa(&cfg, &QuantumState::fock(1, 0, 4).unwrap(), 0.0), Err(Error::NotResonant { .. })));
    }

    #[test]
    fn phase_wrapping() {
        for raw in [0.0, PI, -PI, 3.0 * PI, 1234.5678, -77.7, 2.0 * PI * 1e5 + 0.1] {
            let p = Phase::from_radians(raw);
            assert!(p.principal > -PI && p.principal <= PI + 1e-12, "{raw} {p:?}");
            assert!((p.radians() - raw).abs() < 1e-9 * raw.abs().max(1.0));
        }
        assert_eq!(Phase::from_radians(PI).principal, PI);
        assert_eq!(Phase::from_radians(-PI).principal, PI);
    }

    #[test]
    fn theta_formula_and_sensitivity() {
        let system = TwoModeSystem::new(1.0, [1.0, 1.0], 1e-3).unwrap();
        let ex = system.exchange().unwrap();
        assert!(rel(ex.theta.radians(), PI * (1000.0 + 0.5)) < 1e-14);
        let d = 1e-9;
        let up = system.with_gamma(1e-3 + d).exchange().unwrap().theta.radians();
        let down = system.with_gamma(1e-3 - d).exchange().unwrap().theta.radians();
        assert!(rel((up - down) / (2.0 * d), ex.theta_sensitivity) < 1e-5);
    }

    #[test]
    fn rwa_metric_shrinks_with_coupling() {
        let base = TwoModeSystem::new(1.0, [1.0, 1.0], 0.0).unwrap();
        let mut last = f64::INFINITY;
        for ratio in [0.1, 0.01, 0.001, 1e-5] {
            let sys = base.with_coupling_ratio(ratio);
            let tex = sys.exchange().unwrap().exchange_time;
            let dev = rwa_error_metric(&sys, &time_grid(2.0 * tex, 4001)).unwrap();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn coherent_exchange_phase_only() {
        let sys = TwoModeSystem::new(1.0, [1.0, 1.0], 0.0).unwrap().with_coupling_ratio(1e-3);
        let (_, out) = coherent_exchange_for(&sys, CoherentAmplitude(Complex64::new(0.0, 0.0))).unwrap();
        assert_eq!(out.0.norm(), 0.0);
        let mu = Complex64::new(0.8, -0.3);
        let (_, out) = coherent_exchange_for(&sys, CoherentAmplitude(mu)).unwrap();
        assert!(rel(out.0.norm(), mu.norm()) < 1e-12);
        let theta = sys.exchange().unwrap().theta.principal;
        let expected = mu * Complex64::from_polar(1.0, -theta);
        assert!((out.0 - expected).norm() < 1e-9);
    }
}
