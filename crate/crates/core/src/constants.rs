//! Fixed physical constants (CODATA 2018 exact/recommended values).

use core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// C
    pub elementary_charge: f64,
    /// F/m
    pub vacuum_permittivity: f64,
    /// J s
    pub planck_h: f64,
    /// J s
    pub planck_hbar: f64,
    /// J/K
    pub boltzmann_k: f64,
    /// kg
    pub atomic_mass_unit: f64,
}

pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const PLANCK_H: f64 = 6.626_070_15e-34;
pub const PLANCK_HBAR: f64 = PLANCK_H / (2.0 * PI);
pub const BOLTZMANN_K: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        elementary_charge: ELEMENTARY_CHARGE,
        vacuum_permittivity: VACUUM_PERMITTIVITY,
        planck_h: PLANCK_H,
        planck_hbar: PLANCK_HBAR,
        boltzmann_k: BOLTZMANN_K,
        atomic_mass_unit: ATOMIC_MASS_UNIT,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_positive_and_consistent() {
        let c = PhysicalConstants::default();
        for v in [
            c.elementary_charge,
            c.vacuum_permittivity,
            c.planck_h,
            c.planck_hbar,
            c.boltzmann_k,
            c.atomic_mass_unit,
        ] {
            assert!(v > 0.0);
        }
        let rel = (c.planck_hbar - c.planck_h / (2.0 * PI)).abs() / c.planck_hbar;
        assert!(rel < 1e-12);
    }
}
