//! Two-mode states in a truncated Fock basis and the exact propagator of the
//! full (non-rotating-wave) Hamiltonian.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::TwoModeSystem;
use crate::{Error, Result};

/// Largest population allowed in the top two Fock layers of an input state.
pub const INITIAL_LEAK_LIMIT: f64 = 1e-8;
/// Largest population allowed in the top two Fock layers after propagation.
pub const TRUNCATION_LEAK_LIMIT: f64 = 1e-6;

const NORM_TOLERANCE: f64 = 1e-9;

/// Amplitudes c(n₁, n₂) over |n₁, n₂⟩ with 0 ≤ nᵢ ≤ n_max, row-major in n₁.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_max: usize,
    amplitudes: Vec<Complex64>,
}

/// Coherent-state amplitudes e^{−|μ|²/2} μⁿ/√n! for n ≤ n_max, renormalized
/// over the truncated basis.
pub fn coherent_amplitudes(mu: Complex64, n_max: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut c = Complex64::new((-0.5 * mu.norm_sqr()).exp(), 0.0);
    out.push(c);
    for n in 1..=n_max {
        c = c * mu / (n as f64).sqrt();
        out.push(c);
    }
    let norm = out.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    out.iter_mut().for_each(|c| *c /= norm);
    out
}

impl QuantumState {
    pub fn new(n_max: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidState("n_max must be at least 1".into()));
        }
        let dim = (n_max + 1) * (n_max + 1);
        if amplitudes.len() != dim {
            return Err(Error::InvalidState(format!("expected {dim} amplitudes, got {}", amplitudes.len())));
        }
        let state = QuantumState { n_max, amplitudes };
        let norm = state.norm_sqr();
        if !((norm - 1.0).abs() <= NORM_TOLERANCE) {
            return Err(Error::InvalidState(format!("state norm {norm} differs from 1")));
        }
        Ok(state)
    }

    /// Skips the norm check; for propagators that account for leakage themselves.
    pub(crate) fn from_raw(n_max: usize, amplitudes: Vec<Complex64>) -> Self {
        QuantumState { n_max, amplitudes }
    }

    pub fn fock(n1: usize, n2: usize, n_max: usize) -> Result<Self> {
        if n1 > n_max || n2 > n_max {
            return Err(Error::InvalidState(format!("|{n1},{n2}> lies outside n_max = {n_max}")));
        }
        let d = n_max + 1;
        let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); d * d];
        amplitudes[n1 * d + n2] = Complex64::new(1.0, 0.0);
        Self::new(n_max, amplitudes)
    }

    /// Product state |ψ₁⟩ ⊗ |ψ₂⟩; each factor must have n_max + 1 entries.
    pub fn product(mode1: &[Complex64], mode2: &[Complex64]) -> Result<Self> {
        if mode1.len() != mode2.len() || mode1.len() < 2 {
            return Err(Error::InvalidState("mode factors must share a length of at least 2".into()));
        }
        let n_max = mode1.len() - 1;
        let amplitudes = mode1.iter().flat_map(|a| mode2.iter().map(move |b| a * b)).collect();
        Self::new(n_max, amplitudes)
    }

    /// (|0⟩ + |n⟩)/√2 on ion 1, ground state on ion 2.
    pub fn fock_superposition(n: usize, n_max: usize) -> Result<Self> {
        if n == 0 || n > n_max {
            return Err(Error::InvalidState(format!("superposition level {n} must lie in 1..={n_max}")));
        }
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut mode1 = alloc::vec![Complex64::new(0.0, 0.0); n_max + 1];
        mode1[0] = Complex64::new(s, 0.0);
        mode1[n] = Complex64::new(s, 0.0);
        Self::product(&mode1, &single_mode_fock(0, n_max))
    }

    /// |μ₁⟩ ⊗ |μ₂⟩. Each |μ|² must stay within n_max/4.
    pub fn coherent(mu1: Complex64, mu2: Complex64, n_max: usize) -> Result<Self> {
        let limit = n_max as f64 / 4.0;
        for mu in [mu1, mu2] {
            if mu.norm_sqr() > limit {
                return Err(Error::InvalidState(format!(
                    "|mu|^2 = {} exceeds the truncation margin n_max/4 = {limit}",
                    mu.norm_sqr()
                )));
            }
        }
        Self::product(&coherent_amplitudes(mu1, n_max), &coherent_amplitudes(mu2, n_max))
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n1: usize, n2: usize) -> Complex64 {
        self.amplitudes[n1 * (self.n_max + 1) + n2]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Marginal Fock distribution of `mode` (0 or 1).
    pub fn mode_populations(&self, mode: usize) -> Vec<f64> {
        let d = self.n_max + 1;
        let mut pops = alloc::vec![0.0; d];
        for n1 in 0..d {
            for n2 in 0..d {
                let p = self.amplitudes[n1 * d + n2].norm_sqr();
                pops[if mode == 0 { n1 } else { n2 }] += p;
            }
        }
        pops
    }

    pub fn mean_occupation(&self, mode: usize) -> f64 {
        self.mode_populations(mode).iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// ⟨a⟩ for `mode` 0, ⟨b⟩ for `mode` 1.
    pub fn annihilation_expectation(&self, mode: usize) -> Complex64 {
        let d = self.n_max + 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for n1 in 0..d {
            for n2 in 0..d {
                let (lowered, n) = if mode == 0 {
                    if n1 == 0 {
                        continue;
                    }
                    ((n1 - 1) * d + n2, n1)
                } else {
                    if n2 == 0 {
                        continue;
                    }
                    (n1 * d + n2 - 1, n2)
                };
                acc += self.amplitudes[lowered].conj() * self.amplitudes[n1 * d + n2] * (n as f64).sqrt();
            }
        }
        acc
    }

    /// Reduced density matrix ρ of `mode`, ρ[(j, k)] = ⟨j|ρ|k⟩.
    pub fn reduced_density_matrix(&self, mode: usize) -> DMatrix<Complex64> {
        let d = self.n_max + 1;
        let c = |kept: usize, traced: usize| {
            if mode == 0 {
                self.amplitudes[kept * d + traced]
            } else {
                self.amplitudes[traced * d + kept]
            }
        };
        DMatrix::from_fn(d, d, |j, k| (0..d).map(|t| c(j, t) * c(k, t).conj()).sum())
    }

    /// ⟨φ|ρ|φ⟩ for the reduced state of `mode` and a normalized pure target.
    pub fn mode_fidelity(&self, mode: usize, target: &[Complex64]) -> f64 {
        let rho = self.reduced_density_matrix(mode);
        let d = self.n_max + 1;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..d.min(target.len()) {
            for k in 0..d.min(target.len()) {
                acc += target[j].conj() * rho[(j, k)] * target[k];
            }
        }
        acc.re
    }

    pub fn overlap(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Population with either mode in one of its two highest Fock levels.
    pub fn top_layer_population(&self) -> f64 {
        let d = self.n_max + 1;
        let edge = self.n_max.saturating_sub(1);
        let mut acc = 0.0;
        for n1 in 0..d {
            for n2 in 0..d {
                if n1 >= edge || n2 >= edge {
                    acc += self.amplitudes[n1 * d + n2].norm_sqr();
                }
            }
        }
        acc
    }
}

pub(crate) fn single_mode_fock(n: usize, n_max: usize) -> Vec<Complex64> {
    let mut v = alloc::vec![Complex64::new(0.0, 0.0); n_max + 1];
    v[n] = Complex64::new(1.0, 0.0);
    v
}

#[derive(Debug, Clone)]
struct ParityBlock {
    /// Flat basis indices belonging to this block.
    members: Vec<usize>,
    /// Eigenvalues of H/(ħ ω_ref).
    energies: Vec<f64>,
    vectors: DMatrix<f64>,
}

/// Propagator exp(−iHt/ħ) of
/// `H = ħω₁a†a + ħω₂b†b + γ x₁x₂ (a + a†)(b + b†)` on the truncated basis,
/// with xᵢ = sqrt(ħ/2mωᵢ). The coupling changes n₁ + n₂ by 0 or ±2, so the
/// Hamiltonian splits into even and odd blocks, each diagonalized once.
#[derive(Debug, Clone)]
pub struct QuantumPropagator {
    n_max: usize,
    omega_ref: f64,
    blocks: [ParityBlock; 2],
}

impl QuantumPropagator {
    pub fn new(system: &TwoModeSystem, n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidState("n_max must be at least 1".into()));
        }
        let [w1, w2] = system.omegas;
        let omega_ref = w1;
        let kappa = system.gamma / (2.0 * system.mass * (w1 * w2).sqrt() * omega_ref);
        let d = n_max + 1;
        let blocks = [0usize, 1].map(|parity| {
            let members: Vec<usize> = (0..d * d).filter(|k| (k / d + k % d) % 2 == parity).collect();
            let mut position = alloc::vec![usize::MAX; d * d];
            for (slot, &k) in members.iter().enumerate() {
                position[k] = slot;
            }
            let size = members.len();
            let mut h = DMatrix::<f64>::zeros(size, size);
            for (col, &k) in members.iter().enumerate() {
                let (n1, n2) = (k / d, k % d);
                h[(col, col)] = (w1 * n1 as f64 + w2 * n2 as f64) / omega_ref;
                let (f1, f2) = (n1 as f64, n2 as f64);
                // (a + a†)(b + b†) = a†b† + ab + a†b + ab†
                let moves: [(isize, isize, f64); 4] = [
                    (1, 1, ((f1 + 1.0) * (f2 + 1.0)).sqrt()),
                    (-1, -1, (f1 * f2).sqrt()),
                    (1, -1, ((f1 + 1.0) * f2).sqrt()),
                    (-1, 1, (f1 * (f2 + 1.0)).sqrt()),
                ];
                for (d1, d2, amp) in moves {
                    let (m1, m2) = (n1 as isize + d1, n2 as isize + d2);
                    if m1 < 0 || m2 < 0 || m1 as usize > n_max || m2 as usize > n_max || amp == 0.0 {
                        continue;
                    }
                    let row = position[m1 as usize * d + m2 as usize];
                    h[(row, col)] += kappa * amp;
                }
            }
            let eigen = SymmetricEigen::new(h);
            ParityBlock { members, energies: eigen.eigenvalues.iter().copied().collect(), vectors: eigen.eigenvectors }
        });
        Ok(QuantumPropagator { n_max, omega_ref, blocks })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    fn check_input(&self, state: &QuantumState) -> Result<()> {
        if state.n_max() != self.n_max {
            return Err(Error::InvalidState(format!(
                "state truncated at n_max = {}, propagator at {}",
                state.n_max(),
                self.n_max
            )));
        }
        let leak = state.top_layer_population();
        if leak > INITIAL_LEAK_LIMIT {
            return Err(Error::TruncationLeak { population: leak, limit: INITIAL_LEAK_LIMIT });
        }
        Ok(())
    }

    pub fn propagate(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        Ok(self.propagate_many(state, &[t])?.pop().expect("one time requested"))
    }

    /// Evolves `state` to each of `times`, reusing one eigenbasis projection.
    pub fn propagate_many(&self, state: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
        self.check_input(state)?;
        let projected: Vec<(DVector<f64>, DVector<f64>)> = self
            .blocks
            .iter()
            .map(|block| {
                let re = DVector::from_iterator(block.members.len(), block.members.iter().map(|&k| state.amplitudes[k].re));
                let im = DVector::from_iterator(block.members.len(), block.members.iter().map(|&k| state.amplitudes[k].im));
                (block.vectors.tr_mul(&re), block.vectors.tr_mul(&im))
            })
            .collect();

        let mut out = Vec::with_capacity(times.len());
        for &t in times {
            let mut amplitudes = alloc::vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
            for (block, (re, im)) in self.blocks.iter().zip(&projected) {
                let size = block.members.len();
                let mut rot_re = DVector::zeros(size);
                let mut rot_im = DVector::zeros(size);
                for k in 0..size {
                    let (s, c) = (-(block.energies[k] * self.omega_ref * t)).sin_cos();
                    rot_re[k] = c * re[k] - s * im[k];
                    rot_im[k] = s * re[k] + c * im[k];
                }
                let new_re = &block.vectors * rot_re;
                let new_im = &block.vectors * rot_im;
                for (slot, &k) in block.members.iter().enumerate() {
                    amplitudes[k] = Complex64::new(new_re[slot], new_im[slot]);
                }
            }
            let evolved = QuantumState { n_max: self.n_max, amplitudes };
            let leak = evolved.top_layer_population();
            if leak > TRUNCATION_LEAK_LIMIT {
                return Err(Error::TruncationLeak { population: leak, limit: TRUNCATION_LEAK_LIMIT });
            }
            out.push(evolved);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::time_grid;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn system(ratio: f64) -> TwoModeSystem {
        TwoModeSystem::new(6.6e-26, [2.0 * core::f64::consts::PI * 1e6; 2], 0.0)
            .unwrap()
            .with_coupling_ratio(ratio)
    }

    #[test]
    fn state_constructors_validate() {
        assert!(QuantumState::fock(3, 0, 2).is_err());
        assert!(QuantumState::new(0, alloc::vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(QuantumState::new(1, alloc::vec![Complex64::new(0.5, 0.0); 4]).is_ok());
        assert!(QuantumState::new(1, alloc::vec![Complex64::new(1.0, 0.0); 4]).is_err());
        assert!(QuantumState::coherent(Complex64::new(3.0, 0.0), Complex64::new(0.0, 0.0), 20).is_err());
    }

    #[test]
    fn coherent_amplitude_expectation() {
        let mu = Complex64::new(1.2, -0.7);
        let state = QuantumState::coherent(mu, Complex64::new(0.0, 0.0), 30).unwrap();
        assert!((state.annihilation_expectation(0) - mu).norm() < 1e-9);
        assert!(state.annihilation_expectation(1).norm() < 1e-12);
        assert!((state.mean_occupation(0) - mu.norm_sqr()).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_fock_state_is_stationary() {
        let prop = QuantumPropagator::new(&system(0.0), 6).unwrap();
        let start = QuantumState::fock(1, 0, 6).unwrap();
        for t in [0.0, 1e-7, 3.3e-3] {
            let out = prop.propagate(&start, t).unwrap();
            assert!((out.overlap(&start).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn norm_is_preserved() {
        let sys = system(1e-2);
        let prop = QuantumPropagator::new(&sys, 12).unwrap();
        let start = QuantumState::fock_superposition(2, 12).unwrap();
        let tex = sys.exchange().unwrap().exchange_time;
        for out in prop.propagate_many(&start, &time_grid(2.0 * tex, 50)).unwrap() {
            assert!((out.norm_sqr() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn superposition_is_handed_over() {
        let sys = system(1e-3);
        let ex = sys.exchange().unwrap();
        let prop = QuantumPropagator::new(&sys, 20).unwrap();
        let out = prop.propagate(&QuantumState::fock_superposition(1, 20).unwrap(), ex.exchange_time).unwrap();
        let mut target = single_mode_fock(0, 20);
        target[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        target[1] = Complex64::from_polar(FRAC_1_SQRT_2, -ex.theta.principal);
        assert!(out.mode_fidelity(1, &target) >= 0.999);
        assert!(out.mode_fidelity(0, &single_mode_fock(0, 20)) >= 0.999);
    }

    #[test]
    fn occupation_follows_rwa_envelope() {
        let sys = system(1e-2);
        let swap = sys.swap_rate().unwrap();
        let tex = sys.exchange().unwrap().exchange_time;
        let prop = QuantumPropagator::new(&sys, 10).unwrap();
        let start = QuantumState::fock(1, 0, 10).unwrap();
        let times = time_grid(2.0 * tex, 400);
        let states = prop.propagate_many(&start, &times).unwrap();
        for (t, s) in times.iter().zip(&states) {
            let envelope = (0.5 * swap * t).cos().powi(2);
            assert!((s.mean_occupation(0) - envelope).abs() < 1e-3);
        }
    }

    #[test]
    fn leaky_inputs_are_rejected() {
        let prop = QuantumPropagator::new(&system(1e-3), 4).unwrap();
        let top = QuantumState::fock(4, 0, 4).unwrap();
        assert!(matches!(prop.propagate(&top, 0.0), Err(Error::TruncationLeak { .. })));
        let other = QuantumState::fock(0, 0, 5).unwrap();
        assert!(prop.propagate(&other, 0.0).is_err());
    }

    #[test]
    fn strong_coupling_leak_is_reported() {
        // Counter-rotating terms pump |0,0> toward |1,1>, |2,2>, ... which a
        // three-level truncation cannot hold.
        let prop = QuantumPropagator::new(&system(0.9), 3).unwrap();
        let start = QuantumState::fock(0, 0, 3).unwrap();
        let tex = system(0.9).exchange().unwrap().exchange_time;
        let res = prop.propagate_many(&start, &time_grid(tex, 20));
        assert!(matches!(res, Err(Error::TruncationLeak { .. })), "{res:?}");
    }
}
