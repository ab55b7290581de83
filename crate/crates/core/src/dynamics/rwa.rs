//! Rotating-wave (beam-splitter) evolution of two resonant modes.
//!
//! Under `H = ħω(a†a + b†b) + ħ(Ω/2)(a†b + ab†)` with Ω = γ/(mω) the
//! creation operators transform as
//! `a† → e^{−iωt}(cos(Ωt/2) a† − i sin(Ωt/2) b†)` and
//! `b† → e^{−iωt}(−i sin(Ωt/2) a† + cos(Ωt/2) b†)`.
//! The free rotation is kept (lab frame), which is what makes a complete swap
//! at t_ex carry the phase e^{−iΘ} with Θ = π(mω²/γ + 1/2).
//! Each total-excitation sector is mapped by expanding these substitutions in
//! closed form, so the evolution is exact and unitary sector by sector.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use super::quantum::{QuantumState, TRUNCATION_LEAK_LIMIT};
use super::TwoModeSystem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RwaPropagator {
    omega: f64,
    swap_rate: f64,
}

impl RwaPropagator {
    pub fn new(system: &TwoModeSystem) -> Result<Self> {
        let omega = system.require_resonant()?;
        Ok(RwaPropagator { omega, swap_rate: system.gamma / (system.mass * omega) })
    }

    /// Ω = γ/(mω), rad/s.
    pub fn swap_rate(&self) -> f64 {
        self.swap_rate
    }

    /// Free-rotation angle ωt reduced to [0, 2π).
    fn free_angle(&self, t: f64) -> f64 {
        wrap_turn(self.omega * t)
    }

    /// Maps coherent amplitudes (μ₁, μ₂) to their values at time `t`.
    pub fn transform_amplitudes(&self, mu: [Complex64; 2], t: f64) -> [Complex64; 2] {
        let half = 0.5 * self.swap_rate * t;
        let (s, c) = half.sin_cos();
        let rot = Complex64::from_polar(1.0, -self.free_angle(t));
        let minus_is = Complex64::new(0.0, -s);
        [rot * (mu[0] * c + mu[1] * minus_is), rot * (mu[0] * minus_is + mu[1] * c)]
    }

    pub fn propagate(&self, state: &QuantumState, t: f64) -> Result<QuantumState> {
        let n_max = state.n_max();
        let d = n_max + 1;
        let top = 2 * n_max;
        let binom = pascal(top);
        let log_fact = log_factorials(top);

        let half = 0.5 * self.swap_rate * t;
        let (s, c) = half.sin_cos();
        let angle = self.free_angle(t);
        // (−i)^k for k mod 4
        let minus_i_pow = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let c_pow: Vec<f64> = (0..=top).map(|k| c.powi(k as i32)).collect();
        let s_pow: Vec<f64> = (0..=top).map(|k| s.powi(k as i32)).collect();

        let mut out = alloc::vec![Complex64::new(0.0, 0.0); d * d];
        for n1 in 0..d {
            for n2 in 0..d {
                let amp = state.amplitude(n1, n2);
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                let total = n1 + n2;
                let phase = Complex64::from_polar(1.0, -wrap_turn(total as f64 * angle));
                let amp = amp * phase;
                // a†^n1 b†^n2 → Σ_p Σ_q C(n1,p) C(n2,q) c^{p+n2−q} (−is)^{n1−p+q} a†^{p+q} b†^{N−p−q}
                let mut sector = alloc::vec![Complex64::new(0.0, 0.0); total + 1];
                for p in 0..=n1 {
                    for q in 0..=n2 {
                        let sin_power = n1 - p + q;
                        let weight = binom[n1][p] * binom[n2][q] * c_pow[p + n2 - q] * s_pow[sin_power];
                        sector[p + q] += minus_i_pow[sin_power % 4] * weight;
                    }
                }
                for (j, coeff) in sector.into_iter().enumerate() {
                    let norm = (0.5 * (log_fact[j] + log_fact[total - j] - log_fact[n1] - log_fact[n2])).exp();
                    let value = amp * coeff * norm;
                    if j <= n_max && total - j <= n_max {
                        out[j * d + (total - j)] += value;
                    }
                }
            }
        }
        // Contributions from different inputs interfere, so the leak is
        // measured on the norm that stays inside the box.
        let kept: f64 = out.iter().map(|c| c.norm_sqr()).sum();
        let lost = (state.norm_sqr() - kept).max(0.0);
        if lost > TRUNCATION_LEAK_LIMIT {
            return Err(Error::TruncationLeak { population: lost, limit: TRUNCATION_LEAK_LIMIT });
        }
        Ok(QuantumState::from_raw(n_max, out))
    }

    pub fn propagate_many(&self, state: &QuantumState, times: &[f64]) -> Result<Vec<QuantumState>> {
        times.iter().map(|&t| self.propagate(state, t)).collect()
    }
}

/// Reduces an angle to [0, 2π).
fn wrap_turn(x: f64) -> f64 {
    let tau = 2.0 * PI;
    x - tau * (x / tau).floor()
}

fn pascal(n: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut row = alloc::vec![1.0; k + 1];
        for j in 1..k {
            row[j] = rows[k - 1][j - 1] + rows[k - 1][j];
        }
        rows.push(row);
    }
    rows
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut out = alloc::vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}
