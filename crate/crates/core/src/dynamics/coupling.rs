//! Pairwise coupling for N individually trapped ions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::electrostatics::{geometry_alpha, pair_coupling};
use crate::physmodel::{SystemConfig, ValidationReport, MUCH_GREATER_FACTOR};
use crate::{Error, Result};

/// Symmetric, zero-diagonal matrix of couplings γᵢⱼ in N/m.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        CouplingMatrix { n, values: alloc::vec![0.0; n * n] }
    }

    pub fn pair(gamma: f64) -> Self {
        let mut m = Self::zeros(2);
        m.set(0, 1, gamma);
        m
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Sets γᵢⱼ = γⱼᵢ. Diagonal writes are ignored.
    pub fn set(&mut self, i: usize, j: usize, gamma: f64) {
        if i == j {
            return;
        }
        self.values[i * self.n + j] = gamma;
        self.values[j * self.n + i] = gamma;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairWarning {
    pub i: usize,
    pub j: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NIonCoupling {
    pub matrix: CouplingMatrix,
    pub pair_warnings: Vec<PairWarning>,
    pub validity: ValidationReport,
}

/// γᵢⱼ from the two-ion closed form applied to every pair of heights. The
/// closed form has no dependence on separation, so every pair carries a note
/// about what was extrapolated.
pub fn build_n_ion_coupling(cfg: &SystemConfig) -> Result<NIonCoupling> {
    let n = cfg.ion_count();
    if n < 2 {
        return Err(Error::IonCount { expected: 2, found: n });
    }
    let validity = cfg.require_valid()?;
    let geom = &cfg.geometry;
    let alpha = geometry_alpha(geom.wire_height, geom.wire_radius)?;
    let mut matrix = CouplingMatrix::zeros(n);
    let mut pair_warnings = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let gamma = pair_coupling(cfg.charge(), geom, alpha, geom.ion_heights[i], geom.ion_heights[j]);
            matrix.set(i, j, gamma);
            let message = match geom.separation(i, j) {
                None => Some(String::from("separation not given; coupling assumes H << d < L")),
                Some(d) if d < MUCH_GREATER_FACTOR * geom.wire_height => Some(format!(
                    "d = {d} m is within {MUCH_GREATER_FACTOR}·H; no separation falloff is modeled"
                )),
                Some(d) if d >= geom.wire_length => {
                    Some(format!("d = {d} m is not shorter than the wire (L = {} m)", geom.wire_length))
                }
                Some(_) => None,
            };
            if let Some(message) = message {
                pair_warnings.push(PairWarning { i, j, message });
            }
        }
    }
    Ok(NIonCoupling { matrix, pair_warnings, validity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::electrostatics::coupling_constant;
    use crate::ModeSpec;
    use alloc::vec;

    fn three_ions(heights: Vec<f64>) -> SystemConfig {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.ion_heights = heights;
        cfg.modes = ModeSpec::from_hz(&[1e6, 1e6, 1e6]);
        cfg
    }

    #[test]
    fn two_ions_reduce_to_coupling_constant() {
        let cfg = SystemConfig::ca40_baseline();
        let nion = build_n_ion_coupling(&cfg).unwrap();
        assert_eq!(nion.matrix.get(0, 1), coupling_constant(&cfg).unwrap().gamma);
        assert_eq!(nion.matrix.get(0, 0), 0.0);
    }

    #[test]
    fn equal_heights_give_equal_couplings() {
        let nion = build_n_ion_coupling(&three_ions(vec![150e-6; 3])).unwrap();
        let g = nion.matrix.get(0, 1);
        assert_eq!(g, nion.matrix.get(0, 2));
        assert_eq!(g, nion.matrix.get(1, 2));
        assert_eq!(nion.pair_warnings.len(), 3);
    }

    #[test]
    fn symmetric_with_zero_diagonal() {
        let nion = build_n_ion_coupling(&three_ions(vec![100e-6, 150e-6, 170e-6])).unwrap();
        for i in 0..3 {
            assert_eq!(nion.matrix.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(nion.matrix.get(i, j), nion.matrix.get(j, i));
            }
        }
    }

    #[test]
    fn pair_warnings_follow_separations() {
        let mut cfg = three_ions(vec![150e-6; 3]);
        cfg.geometry.ion_separations = vec![1e-3, 5e-3, 20e-3];
        let nion = build_n_ion_coupling(&cfg).unwrap();
        // (0,1) is at 5·H, (1,2) beyond the wire length.
        let pairs: Vec<_> = nion.pair_warnings.iter().map(|w| (w.i, w.j)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn rejects_single_ion_and_bad_heights() {
        let mut cfg = SystemConfig::ca40_baseline();
        cfg.geometry.ion_heights = vec![150e-6];
        cfg.modes = ModeSpec::from_hz(&[1e6]);
        assert!(matches!(build_n_ion_coupling(&cfg), Err(Error::IonCount { .. })));
        let cfg = three_ions(vec![150e-6, 200e-6, 100e-6]);
        assert!(build_n_ion_coupling(&cfg).is_err());
    }
}
