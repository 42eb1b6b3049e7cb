//! CODATA physical constants in SI units, frozen in a single table.
//!
//! Every quantity in the crate is SI; units are part of the name or the
//! documentation of each field.

/// Fundamental constants used throughout the crate (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J·s).
    pub hbar: f64,
    /// Speed of light in vacuum (m/s).
    pub c: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Vacuum permeability (H/m).
    pub mu0: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Bohr magneton (J/T).
    pub mu_b: f64,
    /// Elementary charge (C).
    pub e: f64,
    /// Bohr radius (m).
    pub a0: f64,
    /// Electron mass (kg).
    pub m_e: f64,
}

/// Speed of light in vacuum (m/s), exact.
pub const C: f64 = 299_792_458.0;
/// Vacuum permeability (H/m), CODATA 2018.
pub const MU0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity (F/m), from 1/(μ₀c²).
pub const EPS0: f64 = 1.0 / (MU0 * C * C);
/// Reduced Planck constant (J·s), exact.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J·s), exact.
pub const H_PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant (J/K), exact.
pub const K_B: f64 = 1.380_649e-23;
/// Bohr magneton (J/T), CODATA 2018.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Elementary charge (C), exact.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr radius (m), CODATA 2018.
pub const A0: f64 = 5.291_772_109_03e-11;
/// Electron mass (kg), CODATA 2018.
pub const M_ELECTRON: f64 = 9.109_383_701_5e-31;
/// Atomic mass unit (kg), CODATA 2018.
pub const AMU: f64 = 1.660_539_066_60e-27;

impl PhysicalConstants {
    /// The frozen CODATA table.
    pub const fn codata() -> Self {
        Self {
            hbar: HBAR,
            c: C,
            eps0: EPS0,
            mu0: MU0,
            k_b: K_B,
            mu_b: MU_B,
            e: E_CHARGE,
            a0: A0,
            m_e: M_ELECTRON,
        }
    }

    /// Relative defect of c²·ε₀·μ₀ = 1; should be at machine precision.
    pub fn light_speed_defect(&self) -> f64 {
        (self.c * self.c * self.eps0 * self.mu0 - 1.0).abs()
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn light_speed_relation_holds() {
        let k = PhysicalConstants::codata();
        assert!(k.light_speed_defect() < 1e-12);
    }

    #[test]
    fn all_constants_positive() {
        let k = PhysicalConstants::codata();
        for v in [k.hbar, k.c, k.eps0, k.mu0, k.k_b, k.mu_b, k.e, k.a0, k.m_e] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn bohr_magneton_over_planck_anchor() {
        // μ_B/h in Hz/T, compared to the conventional 1.3996e10 value.
        let ratio = MU_B / H_PLANCK;
        assert!((ratio / 1.3996e10 - 1.0).abs() < 1e-4);
    }
}
