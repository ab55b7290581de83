//! Equivalent-circuit picture: each ion is a series LC branch, the wire is a
//! capacitance C to ground (shunted by the leakage resistance R_g) that joins
//! the branches at node A, and the wire resistance R appears in series with
//! every ion branch.
//!
//! Branch current Iᵢ corresponds to ion velocity through Iᵢ = (eβᵢ/H)·ẏᵢ, and
//! branch charge to displacement through qᵢ = (eβᵢ/H)·yᵢ.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::dynamics::ClassicalState;
use crate::electrostatics::{geometry_alpha, geometry_beta};
use crate::physmodel::{SystemConfig, TrapGeometry};
use crate::constants::VACUUM_PERMITTIVITY;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitEquivalent {
    /// H, per ion
    pub inductances: Vec<f64>,
    /// F, per ion; resonates with the inductance at the secular frequency
    pub capacitances: Vec<f64>,
    /// F
    pub wire_capacitance: f64,
    /// Ω
    pub wire_resistance: f64,
    /// Ω; may be infinite
    pub leakage_resistance: f64,
    /// Smallest per-ion R⁻¹·sqrt(Lᵢ/Cᵢ); `None` for a lossless wire.
    pub quality_factor: Option<f64>,
    /// eβᵢ/H in C/m: branch charge per unit ion displacement.
    pub induction_coefficients: Vec<f64>,
    /// kg
    pub mass: f64,
}

/// Lᵢ = mH²/(e²βᵢ²) and Cᵢ = 1/(ωᵢ²Lᵢ).
pub fn ion_equivalent_lc(cfg: &SystemConfig, i: usize) -> Result<(f64, f64)> {
    cfg.check_ion(i)?;
    let omega = cfg.modes.omega(i);
    if !(omega > 0.0) {
        return Err(Error::domain("secular frequency must be positive"));
    }
    let s = induction_coefficient(cfg, i)?;
    let inductance = cfg.mass() / (s * s);
    Ok((inductance, 1.0 / (omega * omega * inductance)))
}

fn induction_coefficient(cfg: &SystemConfig, i: usize) -> Result<f64> {
    let geom = &cfg.geometry;
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    let beta = geometry_beta(geom.wire_height, geom.ion_heights[i], alpha)?;
    Ok(cfg.charge().abs() * beta / geom.wire_height)
}

/// C = 2πε₀L/α.
pub fn wire_capacitance(geom: &TrapGeometry) -> Result<f64> {
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    if !(alpha > 0.0) {
        return Err(Error::domain("wire capacitance diverges when a >= H"));
    }
    if !(geom.wire_length > 0.0) {
        return Err(Error::domain("wire length must be positive"));
    }
    Ok(2.0 * PI * VACUUM_PERMITTIVITY * geom.wire_length / alpha)
}

pub fn quality_factors(cfg: &SystemConfig) -> Result<Vec<f64>> {
    quality_factors_at(cfg, cfg.environment.wire_resistance)
}

pub(crate) fn quality_factors_at(cfg: &SystemConfig, resistance: f64) -> Result<Vec<f64>> {
    if resistance == 0.0 {
        return Err(Error::Lossless);
    }
    if !(resistance > 0.0) {
        return Err(Error::domain(format!("wire resistance must be positive, got {resistance}")));
    }
    (0..cfg.ion_count())
        .map(|i| {
            let (l, c) = ion_equivalent_lc(cfg, i)?;
            Ok((l / c).sqrt() / resistance)
        })
        .collect()
}

/// Q = R⁻¹·sqrt(Lᵢ/Cᵢ), for the ion with the lowest Q.
pub fn quality_factor(cfg: &SystemConfig) -> Result<f64> {
    Ok(quality_factors(cfg)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// State-exchange rate 2ν·C_eff/C with C_eff = sqrt(C₁C₂).
pub fn exchange_rate_circuit(cfg: &SystemConfig) -> Result<f64> {
    cfg.require_ions(2)?;
    cfg.require_valid()?;
    let detuning = cfg.modes.relative_detuning();
    if !cfg.modes.is_resonant() {
        return Err(Error::NotResonant { relative_detuning: detuning });
    }
    let (_, c1) = ion_equivalent_lc(cfg, 0)?;
    let (_, c2) = ion_equivalent_lc(cfg, 1)?;
    let nu = 0.5 * (cfg.modes.nu(0) + cfg.modes.nu(1));
    Ok(2.0 * nu * (c1 * c2).sqrt() / wire_capacitance(&cfg.geometry)?)
}

/// Decay constant 4·R_g·C of the coupling signal through the leakage path, s.
pub fn leakage_decay_constant(circ: &CircuitEquivalent) -> f64 {
    4.0 * circ.leakage_resistance * circ.wire_capacitance
}

/// Whether leakage is slow compared with the state exchange.
pub fn leakage_ok(circ: &CircuitEquivalent, exchange_time: f64) -> bool {
    leakage_decay_constant(circ) > exchange_time
}

impl CircuitEquivalent {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        cfg.require_valid()?;
        let n = cfg.ion_count();
        let mut inductances = Vec::with_capacity(n);
        let mut capacitances = Vec::with_capacity(n);
        let mut induction_coefficients = Vec::with_capacity(n);
        for i in 0..n {
            let (l, c) = ion_equivalent_lc(cfg, i)?;
            inductances.push(l);
            capacitances.push(c);
            induction_coefficients.push(induction_coefficient(cfg, i)?);
        }
        let quality_factor = match quality_factor(cfg) {
            Ok(q) => Some(q),
            Err(Error::Lossless) => None,
            Err(e) => return Err(e),
        };
        Ok(CircuitEquivalent {
            inductances,
            capacitances,
            wire_capacitance: wire_capacitance(&cfg.geometry)?,
            wire_resistance: cfg.environment.wire_resistance,
            leakage_resistance: cfg.environment.leakage_resistance,
            quality_factor,
            induction_coefficients,
            mass: cfg.mass(),
        })
    }

    pub fn ion_count(&self) -> usize {
        self.inductances.len()
    }

    /// Coupling γᵢⱼ = sᵢsⱼ/C mediated by the wire capacitance, N/m.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.induction_coefficients[i] * self.induction_coefficients[j] / self.wire_capacitance
    }

    /// Resizes the wire capacitance so that the (0, 1) coupling equals `gamma`.
    pub fn with_coupling(mut self, gamma: f64) -> Self {
        self.wire_capacitance = self.induction_coefficients[0] * self.induction_coefficients[1] / gamma;
        self
    }

    pub fn with_resistance(mut self, resistance: f64) -> Self {
        self.wire_resistance = resistance;
        self.quality_factor = (resistance > 0.0).then(|| {
            self.inductances
                .iter()
                .zip(&self.capacitances)
                .map(|(l, c)| (l / c).sqrt() / resistance)
                .fold(f64::INFINITY, f64::min)
        });
        self
    }

    pub fn with_leakage(mut self, leakage_resistance: f64) -> Self {
        self.leakage_resistance = leakage_resistance;
        self
    }

    /// Resonance frequency 1/sqrt(LᵢCᵢ) of branch `i`, rad/s.
    pub fn branch_frequency(&self, i: usize) -> f64 {
        1.0 / (self.inductances[i] * self.capacitances[i]).sqrt()
    }

    /// Trap-side branch capacitance: in series with the wire capacitance it
    /// gives back Cᵢ, so the loaded branch resonates at the secular frequency.
    pub fn trap_capacitance(&self, i: usize) -> Result<f64> {
        let inv = 1.0 / self.capacitances[i] - 1.0 / self.wire_capacitance;
        if !(inv > 0.0) {
            return Err(Error::domain(format!(
                "branch {i}: capacitance {:e} F is not smaller than the wire capacitance {:e} F",
                self.capacitances[i], self.wire_capacitance
            )));
        }
        Ok(1.0 / inv)
    }

    /// Network state matching a classical ion state, with the wire charge
    /// equal to the sum of the induced branch charges.
    pub fn state_from_ions(&self, ions: &ClassicalState) -> Result<CircuitState> {
        if ions.dimension() != self.ion_count() {
            return Err(Error::IonCount { expected: self.ion_count(), found: ions.dimension() });
        }
        let charges: Vec<f64> =
            ions.positions.iter().zip(&self.induction_coefficients).map(|(y, s)| s * y).collect();
        let currents =
            ions.momenta.iter().zip(&self.induction_coefficients).map(|(p, s)| s * p / self.mass).collect();
        let node_voltage = charges.iter().sum::<f64>() / self.wire_capacitance;
        Ok(CircuitState { currents, charges, node_voltage })
    }

    /// Ion velocities Iᵢ·H/(eβᵢ), m/s.
    pub fn ion_velocities(&self, state: &CircuitState) -> Vec<f64> {
        state.currents.iter().zip(&self.induction_coefficients).map(|(i, s)| i / s).collect()
    }

    /// Energy stored in the network, J.
    pub fn stored_energy(&self, state: &CircuitState) -> Result<f64> {
        let mut e = 0.5 * self.wire_capacitance * state.node_voltage * state.node_voltage;
        for i in 0..self.ion_count() {
            let (l, q, cur) = (self.inductances[i], state.charges[i], state.currents[i]);
            e += 0.5 * l * cur * cur + 0.5 * q * q / self.trap_capacitance(i)?;
        }
        Ok(e)
    }

    /// Current into node A minus the current leaving through C and R_g.
    pub fn kcl_residual(&self, state: &CircuitState, node_voltage_rate: f64) -> f64 {
        let leak = if self.leakage_resistance.is_finite() { state.node_voltage / self.leakage_resistance } else { 0.0 };
        state.currents.iter().sum::<f64>() - self.wire_capacitance * node_voltage_rate - leak
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitState {
    /// A, per branch, flowing from ground into node A
    pub currents: Vec<f64>,
    /// C, per branch
    pub charges: Vec<f64>,
    /// V at node A
    pub node_voltage: f64,
}

impl CircuitState {
    pub fn quiescent(n: usize) -> Self {
        CircuitState { currents: alloc::vec![0.0; n], charges: alloc::vec![0.0; n], node_voltage: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative tolerance on the whole trajectory, measured in the energy norm.
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { rtol: 1e-9, max_steps: 200_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTrace {
    pub times: Vec<f64>,
    pub states: Vec<CircuitState>,
    /// Stored energy at each sample, J.
    pub energies: Vec<f64>,
    pub steps: usize,
    /// Accumulated local error estimate, relative to the state norm.
    pub error_estimate: f64,
}

/// Network equations in energy-normalized coordinates
/// x = (qᵢ/sqrt(C′ᵢ), sqrt(Lᵢ)·Iᵢ, sqrt(C)·V), with time in units of
/// 1/ω_ref. Stored energy is |x|²/2 and the lossless generator is
/// antisymmetric.
struct Network {
    generator: DMatrix<f64>,
    omega_ref: f64,
    to_normal: Vec<f64>,
}

impl Network {
    fn new(circ: &CircuitEquivalent) -> Result<Self> {
        let n = circ.ion_count();
        let dim = 2 * n + 1;
        let c_wire = circ.wire_capacitance;
        let mut freqs = Vec::with_capacity(n);
        let mut to_normal = alloc::vec![0.0; dim];
        for i in 0..n {
            let l = circ.inductances[i];
            let c_trap = circ.trap_capacitance(i)?;
            freqs.push(1.0 / (l * c_trap).sqrt());
            to_normal[i] = 1.0 / c_trap.sqrt();
            to_normal[n + i] = l.sqrt();
        }
        to_normal[2 * n] = c_wire.sqrt();
        let omega_ref = freqs.iter().copied().fold(0.0, f64::max);

        let mut a = DMatrix::zeros(dim, dim);
        let v = 2 * n;
        for i in 0..n {
            let l = circ.inductances[i];
            let w = freqs[i] / omega_ref;
            let k = 1.0 / ((l * c_wire).sqrt() * omega_ref);
            a[(i, n + i)] = w;
            a[(n + i, i)] = -w;
            a[(n + i, n + i)] = -circ.wire_resistance / l / omega_ref;
            a[(n + i, v)] = -k;
            a[(v, n + i)] = k;
        }
        if circ.leakage_resistance.is_finite() {
            a[(v, v)] = -1.0 / (circ.leakage_resistance * c_wire * omega_ref);
        }
        Ok(Network { generator: a, omega_ref, to_normal })
    }

    fn encode(&self, s: &CircuitState) -> DVector<f64> {
        let n = s.charges.len();
        let mut x = DVector::zeros(2 * n + 1);
        for i in 0..n {
            x[i] = s.charges[i] * self.to_normal[i];
            x[n + i] = s.currents[i] * self.to_normal[n + i];
        }
        x[2 * n] = s.node_voltage * self.to_normal[2 * n];
        x
    }

    fn decode(&self, x: &DVector<f64>) -> CircuitState {
        let n = (x.len() - 1) / 2;
        CircuitState {
            charges: (0..n).map(|i| x[i] / self.to_normal[i]).collect(),
            currents: (0..n).map(|i| x[n + i] / self.to_normal[n + i]).collect(),
            node_voltage: x[2 * n] / self.to_normal[2 * n],
        }
    }

    /// One step of the three-stage Gauss–Legendre method. For a linear
    /// system it reduces to the (3,3) Padé approximant of exp(hA).
    fn step_matrix(&self, h: f64) -> Result<DMatrix<f64>> {
        let dim = self.generator.nrows();
        let z = &self.generator * h;
        let z2 = &z * &z;
        let z3 = &z2 * &z;
        let id = DMatrix::<f64>::identity(dim, dim);
        let numer = &id + &z * 0.5 + &z2 * 0.1 + &z3 * (1.0 / 120.0);
        let denom = &id - &z * 0.5 + &z2 * 0.1 - &z3 * (1.0 / 120.0);
        denom
            .lu()
            .solve(&numer)
            .ok_or_else(|| Error::domain("singular implicit step matrix"))
    }
}

/// Step-doubling differences below this are rounding noise.
const ROUNDOFF_FLOOR: f64 = 1e-15;

struct StepCache {
    h: f64,
    full: DMatrix<f64>,
    half: DMatrix<f64>,
}

/// Integrates the network from `initial` and samples it at `times` (seconds,
/// non-decreasing, starting at or after 0). Steps adaptively with an implicit
/// sixth-order scheme; step doubling supplies the error estimate, held to
/// `rtol · h / span` per step so the accumulated error stays within `rtol`.
pub fn simulate_circuit(
    circ: &CircuitEquivalent,
    initial: &CircuitState,
    times: &[f64],
    options: SolverOptions,
) -> Result<CircuitTrace> {
    let n = circ.ion_count();
    if initial.currents.len() != n || initial.charges.len() != n {
        return Err(Error::IonCount { expected: n, found: initial.currents.len() });
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sample times must be finite, non-negative and non-decreasing"));
    }
    let net = Network::new(circ)?;
    let mut x = net.encode(initial);
    let span = times.last().copied().unwrap_or(0.0) * net.omega_ref;
    let mut trace = CircuitTrace {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        energies: Vec::with_capacity(times.len()),
        steps: 0,
        error_estimate: 0.0,
    };

    let mut now = 0.0;
    let mut h = 0.05;
    let mut cache: Option<StepCache> = None;
    for &t in times {
        let target = t * net.omega_ref;
        while target - now > 1e-14 * target.max(1.0) {
            if x.norm() == 0.0 {
                now = target;
                break;
            }
            let step = h.min(target - now);
            let fresh = match &cache {
                Some(c) if c.h == step => None,
                _ => Some(StepCache { h: step, full: net.step_matrix(step)?, half: net.step_matrix(0.5 * step)? }),
            };
            if let Some(c) = fresh {
                cache = Some(c);
            }
            let c = cache.as_ref().expect("step cache filled above");
            let coarse = &c.full * &x;
            let fine = &c.half * (&c.half * &x);
            let err = (&fine - &coarse).norm() / (63.0 * x.norm());
            // Closely spaced samples force steps whose share of the budget
            // falls below what double precision can resolve.
            let allowed = (options.rtol * step / span.max(step)).max(ROUNDOFF_FLOOR);
            trace.steps += 1;
            if trace.steps > options.max_steps {
                return Err(Error::SolverTolerance { requested: options.rtol, achieved: trace.error_estimate });
            }
            if err <= allowed || step < 1e-9 {
                if err > allowed {
                    return Err(Error::SolverTolerance { requested: options.rtol, achieved: trace.error_estimate + err });
                }
                x = fine;
                now += step;
                trace.error_estimate += err;
                let grow = if err == 0.0 { 4.0 } else { 0.9 * (allowed / err).powf(1.0 / 7.0) };
                if grow > 1.25 && step == h {
                    h *= grow.min(4.0);
                }
            } else {
                h = step * (0.9 * (allowed / err).powf(1.0 / 7.0)).clamp(0.2, 0.9);
            }
        }
        let state = net.decode(&x);
        trace.times.push(t);
        trace.energies.push(0.5 * x.norm_squared());
        trace.states.push(state);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{time_grid, TwoModeClassical, TwoModeSystem};
    use crate::physmodel::ModeSpec;
    use alloc::vec;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn baseline_circuit_values() {
        let cfg = SystemConfig::ca40_baseline();
        let (l, c) = ion_equivalent_lc(&cfg, 0).unwrap();
        assert!((l - 6e4).abs() < 0.5e4, "{l}");
        assert!((c - 4e-19).abs() < 0.5e-19, "{c}");
        let cw = wire_capacitance(&cfg.geometry).unwrap();
        assert!((cw - 1.6e-13).abs() < 0.05e-13);
        let q = quality_factor(&cfg).unwrap();
        assert!((q - 6e11).abs() < 0.5e11, "{q}");
        let rate = exchange_rate_circuit(&cfg).unwrap();
        assert!((rate - 5.3).abs() < 0.1);
    }

    #[test]
    fn lc_scaling_with_frequency() {
        let cfg = SystemConfig::ca40_baseline();
        let mut fast = cfg.clone();
        fast.modes = cfg.modes.scaled(2.0);
        let (l1, c1) = ion_equivalent_lc(&cfg, 0).unwrap();
        let (l2, c2) = ion_equivalent_lc(&fast, 0).unwrap();
        assert!(rel(l2, l1) < 1e-15);
        assert!(rel(c2, c1 / 4.0) < 1e-14);
        assert!(ion_equivalent_lc(&cfg, 2).is_err());
    }

    #[test]
    fn wire_capacitance_linear_in_length() {
        let cfg = SystemConfig::ca40_baseline();
        let mut geom = cfg.geometry.clone();
        let c1 = wire_capacitance(&geom).unwrap();
        geom.wire_length *= 2.0;
        assert!(rel(wire_capacitance(&geom).unwrap(), 2.0 * c1) < 1e-15);
        geom.wire_radius = geom.wire_height;
        assert!(wire_capacitance(&geom).is_err());
    }

    #[test]
    fn quality_factor_scaling() {
        let mut cfg = SystemConfig::ca40_baseline();
        let q = quality_factor(&cfg).unwrap();
        cfg.environment.wire_resistance = 0.3;
        assert!(rel(quality_factor(&cfg).unwrap(), 2.0 * q) < 1e-14);
        for r in [0.01, 0.6, 17.0] {
            cfg.environment.wire_resistance = r;
            assert!(rel(quality_factor(&cfg).unwrap() * r, q * 0.6) < 1e-14);
        }
        cfg.environment.wire_resistance = 0.0;
        assert_eq!(quality_factor(&cfg), Err(Error::Lossless));
    }

    #[test]
    fn circuit_rate_matches_hamiltonian_rate() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.ion_heights = vec![110e-6, 170e-6];
        let circuit = exchange_rate_circuit(&cfg).unwrap();
        let hamiltonian = crate::dynamics::exchange_time(&cfg).unwrap().rate();
        assert!(rel(circuit, hamiltonian) < 1e-12);
    }

    #[test]
    fn circuit_rate_halves_with_doubled_capacitance() {
        let cfg = SystemConfig::ca40_baseline();
        let circ = CircuitEquivalent::from_config(&cfg).unwrap();
        let nu = cfg.modes.nu(0);
        let rate = |c: f64| 2.0 * nu * circ.capacitances[0] / c;
        assert!(rel(rate(2.0 * circ.wire_capacitance), 0.5 * exchange_rate_circuit(&cfg).unwrap()) < 1e-12);
    }

    #[test]
    fn circuit_rate_rejects_detuning() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.modes = ModeSpec::from_hz(&[1e6, 1.1e6]);
        assert!(matches!(exchange_rate_circuit(&cfg), Err(Error::NotResonant { .. })));
    }

    #[test]
    fn leakage_constant() {
        let cfg = SystemConfig::ca40_baseline();
        let circ = CircuitEquivalent::from_config(&cfg).unwrap();
        let tau = leakage_decay_constant(&circ);
        assert!((tau - 6.5).abs() < 0.1, "{tau}");
        assert!(rel(leakage_decay_constant(&circ.clone().with_leakage(2e13)), 2.0 * tau) < 1e-15);
        assert!(leakage_ok(&circ, 0.19));
    }

    #[test]
    fn coupling_through_capacitance_is_gamma() {
        let cfg = SystemConfig::ca40_baseline();
        let circ = CircuitEquivalent::from_config(&cfg).unwrap();
        let gamma = crate::electrostatics::coupling_constant(&cfg).unwrap().gamma;
        assert!(rel(circ.coupling(0, 1), gamma) < 1e-12);
    }

    fn desk_circuit(ratio: f64) -> (CircuitEquivalent, TwoModeSystem) {
        let cfg = SystemConfig::ca40_baseline();
        let sys = TwoModeSystem::from_config(&cfg).unwrap().with_coupling_ratio(ratio);
        let circ = CircuitEquivalent::from_config(&cfg).unwrap().with_coupling(sys.gamma)
            .with_resistance(0.0)
            .with_leakage(f64::INFINITY);
        (circ, sys)
    }

    #[test]
    fn quiescent_network_stays_quiet() {
        let (circ, _) = desk_circuit(1e-3);
        let trace = simulate_circuit(&circ, &CircuitState::quiescent(2), &[0.0, 1e-3], SolverOptions::default()).unwrap();
        for s in &trace.states {
            assert!(s.currents.iter().chain(&s.charges).all(|v| *v == 0.0));
            assert_eq!(s.node_voltage, 0.0);
        }
    }

    #[test]
    fn lossless_network_swaps_energy() {
        let (circ, sys) = desk_circuit(1e-2);
        let y0 = sys.oscillator_length(0);
        let ions = ClassicalState::new(vec![y0, 0.0], vec![0.0, 0.0]).unwrap();
        let start = circ.state_from_ions(&ions).unwrap();
        let tex = TwoModeClassical::new(&sys).unwrap().beat_half_period();
        let trace = simulate_circuit(&circ, &start, &[0.0, tex], SolverOptions::default()).unwrap();
        let e0 = trace.energies[0];
        let end = &trace.states[1];
        let branch1 = 0.5 * circ.inductances[0] * end.currents[0].powi(2)
            + 0.5 * end.charges[0].powi(2) / circ.trap_capacitance(0).unwrap();
        assert!(branch1 / e0 < 1e-4, "{}", branch1 / e0);
        assert!(rel(trace.energies[1], e0) < 1e-8);
    }

    #[test]
    fn lossless_network_conserves_charge_and_energy() {
        let (circ, sys) = desk_circuit(1e-2);
        let ions = ClassicalState::new(vec![1e-8, -4e-9], vec![3e-20, 0.0]).unwrap();
        let start = circ.state_from_ions(&ions).unwrap();
        let tex = sys.exchange().unwrap().exchange_time;
        let trace = simulate_circuit(&circ, &start, &time_grid(tex, 40), SolverOptions::default()).unwrap();
        let e0 = trace.energies[0];
        for (s, e) in trace.states.iter().zip(&trace.energies) {
            assert!(rel(*e, e0) < 1e-8);
            assert!(rel(circ.stored_energy(s).unwrap(), *e) < 1e-10);
            // Floating node: the wire charge tracks the branch charges.
            let imbalance = circ.wire_capacitance * s.node_voltage - s.charges.iter().sum::<f64>();
            assert!(imbalance.abs() < 1e-8 * s.charges.iter().map(|q| q.abs()).sum::<f64>().max(1e-40));
        }
    }

    #[test]
    fn kcl_holds_along_trace() {
        let (circ, sys) = desk_circuit(1e-2);
        let circ = circ.with_leakage(1e6 / (sys.omegas[0] * 1e-13)).with_resistance(1e3);
        let ions = ClassicalState::new(vec![1e-8, 0.0], vec![0.0, 0.0]).unwrap();
        let start = circ.state_from_ions(&ions).unwrap();
        let dt = 1e-4 / sys.omegas[0];
        let t0 = 50.0 / sys.omegas[0];
        let times = [t0 - 2.0 * dt, t0 - dt, t0, t0 + dt, t0 + 2.0 * dt];
        let trace = simulate_circuit(&circ, &start, &times, SolverOptions::default()).unwrap();
        let v: Vec<f64> = trace.states.iter().map(|s| s.node_voltage).collect();
        let rate = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * dt);
        let residual = circ.kcl_residual(&trace.states[2], rate);
        let scale = trace.states[2].currents.iter().map(|i| i.abs()).sum::<f64>();
        assert!(residual.abs() < 1e-6 * scale, "{residual} vs {scale}");
    }

    #[test]
    fn finite_resistance_decays_monotonically() {
        let (circ, sys) = desk_circuit(1e-2);
        let (l, c) = (circ.inductances[0], circ.capacitances[0]);
        let q_target = 200.0;
        let circ = circ.with_resistance((l / c).sqrt() / q_target);
        let ions = ClassicalState::new(vec![1e-8, 0.0], vec![0.0, 0.0]).unwrap();
        let start = circ.state_from_ions(&ions).unwrap();
        let period = 2.0 * PI / sys.omegas[0];
        let times = time_grid(100.0 * period, 401);
        let trace = simulate_circuit(&circ, &start, &times, SolverOptions::default()).unwrap();
        for w in trace.energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_bad_sample_times() {
        let (circ, _) = desk_circuit(1e-3);
        let start = CircuitState::quiescent(2);
        assert!(simulate_circuit(&circ, &start, &[1.0, 0.5], SolverOptions::default()).is_err());
        assert!(simulate_circuit(&circ, &start, &[-1.0], SolverOptions::default()).is_err());
    }

    #[test]
    fn step_budget_exhaustion_is_reported() {
        let (circ, sys) = desk_circuit(1e-2);
        let ions = ClassicalState::new(vec![1e-8, 0.0], vec![0.0, 0.0]).unwrap();
        let start = circ.state_from_ions(&ions).unwrap();
        let options = SolverOptions { rtol: 1e-9, max_steps: 10 };
        let res = simulate_circuit(&circ, &start, &[1e3 / sys.omegas[0]], options);
        assert!(matches!(res, Err(Error::SolverTolerance { .. })));
    }
}
