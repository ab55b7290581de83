use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::coupling::CouplingMatrix;
use super::TwoModeSystem;
use crate::{Error, Result};

/// Phase-space point: displacements yᵢ (m) and momenta pᵢ (kg·m/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalState {
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
}

impl ClassicalState {
    pub fn new(positions: Vec<f64>, momenta: Vec<f64>) -> Result<Self> {
        if positions.len() != momenta.len() {
            return Err(Error::InvalidState(format!(
                "{} positions but {} momenta",
                positions.len(),
                momenta.len()
            )));
        }
        if !positions.iter().chain(&momenta).all(|v| v.is_finite()) {
            return Err(Error::InvalidState("non-finite phase-space coordinate".into()));
        }
        Ok(ClassicalState { positions, momenta })
    }

    pub fn at_rest(n: usize) -> Self {
        ClassicalState { positions: alloc::vec![0.0; n], momenta: alloc::vec![0.0; n] }
    }

    pub fn dimension(&self) -> usize {
        self.positions.len()
    }

    pub fn velocities(&self, mass: f64) -> Vec<f64> {
        self.momenta.iter().map(|p| p / mass).collect()
    }
}

/// Closed-form normal-mode propagator for the two-ion Hamiltonian.
///
/// Mode frequencies: ω±² = (ω₁²+ω₂²)/2 ± sqrt(((ω₁²−ω₂²)/2)² + (γ/m)²).
#[derive(Debug, Clone, Copy)]
pub struct TwoModeClassical {
    mass: f64,
    /// (cos θ, sin θ) of the rotation from ion to mode coordinates.
    rotation: (f64, f64),
    mode_omegas: [f64; 2],
}

impl TwoModeClassical {
    pub fn new(system: &TwoModeSystem) -> Result<Self> {
        let m = system.mass;
        let [w1, w2] = system.omegas;
        let (k1, k2) = (w1 * w1, w2 * w2);
        let g = system.gamma / m;
        let mean = 0.5 * (k1 + k2);
        let half_diff = 0.5 * (k1 - k2);
        let root = half_diff.hypot(g);
        let upper = mean + root;
        let lower = mean - root;
        if !(lower > 0.0) {
            return Err(Error::UnstableCoupling { omega_sq: lower });
        }
        let theta = 0.5 * (2.0 * g).atan2(k1 - k2);
        Ok(TwoModeClassical { mass: m, rotation: (theta.cos(), theta.sin()), mode_omegas: [upper.sqrt(), lower.sqrt()] })
    }

    /// (ω₊, ω₋) in rad/s.
    pub fn mode_frequencies(&self) -> [f64; 2] {
        self.mode_omegas
    }

    /// Exact beat half-period π/(ω₊ − ω₋): the time for complete energy
    /// transfer between resonant ions without the rotating-wave approximation.
    pub fn beat_half_period(&self) -> f64 {
        core::f64::consts::PI / (self.mode_omegas[0] - self.mode_omegas[1])
    }

    fn rotate_in(&self, x: [f64; 2]) -> [f64; 2] {
        let (c, s) = self.rotation;
        [c * x[0] + s * x[1], -s * x[0] + c * x[1]]
    }

    fn rotate_out(&self, q: [f64; 2]) -> [f64; 2] {
        let (c, s) = self.rotation;
        [c * q[0] - s * q[1], s * q[0] + c * q[1]]
    }

    pub fn evolve(&self, state: &ClassicalState, t: f64) -> Result<ClassicalState> {
        if state.dimension() != 2 {
            return Err(Error::IonCount { expected: 2, found: state.dimension() });
        }
        let q0 = self.rotate_in([state.positions[0], state.positions[1]]);
        let p0 = self.rotate_in([state.momenta[0], state.momenta[1]]);
        let mut q = [0.0; 2];
        let mut p = [0.0; 2];
        for k in 0..2 {
            let w = self.mode_omegas[k];
            let (s, c) = (w * t).sin_cos();
            let mw = self.mass * w;
            q[k] = q0[k] * c + p0[k] / mw * s;
            p[k] = -q0[k] * mw * s + p0[k] * c;
        }
        let y = self.rotate_out(q);
        let p = self.rotate_out(p);
        Ok(ClassicalState { positions: y.to_vec(), momenta: p.to_vec() })
    }
}

/// Normal-mode propagator for N equal-mass ions with an arbitrary symmetric
/// coupling matrix, from an eigen-decomposition of the stiffness matrix.
#[derive(Debug, Clone)]
pub struct NormalModes {
    mass: f64,
    omegas: Vec<f64>,
    coupling: CouplingMatrix,
    mode_vectors: DMatrix<f64>,
    mode_omegas: Vec<f64>,
}

impl NormalModes {
    pub fn new(mass: f64, omegas: &[f64], coupling: &CouplingMatrix) -> Result<Self> {
        let n = omegas.len();
        if coupling.len() != n {
            return Err(Error::IonCount { expected: n, found: coupling.len() });
        }
        if !(mass > 0.0) {
            return Err(Error::domain("mass must be positive"));
        }
        let stiffness = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                omegas[i] * omegas[i]
            } else {
                coupling.get(i, j) / mass
            }
        });
        let eigen = SymmetricEigen::new(stiffness);
        let mut mode_omegas = Vec::with_capacity(n);
        for &w2 in eigen.eigenvalues.iter() {
            if !(w2 > 0.0) {
                return Err(Error::UnstableCoupling { omega_sq: w2 });
            }
            mode_omegas.push(w2.sqrt());
        }
        Ok(NormalModes {
            mass,
            omegas: omegas.to_vec(),
            coupling: coupling.clone(),
            mode_vectors: eigen.eigenvectors,
            mode_omegas,
        })
    }

    pub fn mode_frequencies(&self) -> &[f64] {
        &self.mode_omegas
    }

    pub fn energy(&self, state: &ClassicalState) -> f64 {
        let m = self.mass;
        let n = self.omegas.len();
        let mut e = 0.0;
        for i in 0..n {
            let (y, p, w) = (state.positions[i], state.momenta[i], self.omegas[i]);
            e += p * p / (2.0 * m) + 0.5 * m * w * w * y * y;
            for j in (i + 1)..n {
                e += self.coupling.get(i, j) * y * state.positions[j];
            }
        }
        e
    }

    pub fn evolve(&self, state: &ClassicalState, t: f64) -> Result<ClassicalState> {
        let n = self.omegas.len();
        if state.dimension() != n {
            return Err(Error::IonCount { expected: n, found: state.dimension() });
        }
        let v = &self.mode_vectors;
        let q0 = v.transpose() * DVector::from_column_slice(&state.positions);
        let p0 = v.transpose() * DVector::from_column_slice(&state.momenta);
        let mut q = DVector::zeros(n);
        let mut p = DVector::zeros(n);
        for k in 0..n {
            let w = self.mode_omegas[k];
            let mw = self.mass * w;
            let (s, c) = (w * t).sin_cos();
            q[k] = q0[k] * c + p0[k] / mw * s;
            p[k] = -q0[k] * mw * s + p0[k] * c;
        }
        let y = v * q;
        let p = v * p;
        Ok(ClassicalState { positions: y.iter().copied().collect(), momenta: p.iter().copied().collect() })
    }
}
