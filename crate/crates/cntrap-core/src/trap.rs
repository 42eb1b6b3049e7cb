//! Side-guide magnetic trap: a straight current-carrying wire plus a
//! perpendicular homogeneous bias field produce a line of vanishing
//! transverse field at distance y₀ from the wire axis; an offset field
//! along the wire lifts the zero and sets the Zeeman splitting.
//!
//! All distances in this module are measured from the wire AXIS. Callers
//! that report distances from the nanotube surface convert with the shell
//! radius before calling in.

use thiserror::Error;

use crate::constants as k;

/// Side-guide configuration: wire current, bias field, offset field.
///
/// `y0` and the field gradient at the trap center are derived quantities;
/// they are exposed as methods rather than stored so the struct cannot go
/// out of sync.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig {
    /// Wire current I (A).
    pub current: f64,
    /// Bias field B_b (T), perpendicular to the wire.
    pub bias_field: f64,
    /// Offset field B_o (T), along the wire.
    pub offset_field: f64,
}

#[derive(Debug, Error)]
pub enum TrapError {
    #[error("state with g_F·m_F = {0:.3} is not low-field seeking")]
    NotTrappable(f64),
    #[error("non-positive distance y = {0:.3e} m from the wire axis")]
    BadDistance(f64),
    #[error("non-positive parameter: {0}")]
    BadParameter(&'static str),
}

impl TrapConfig {
    /// Configuration with the bias field chosen so the trap center sits at
    /// axis distance `y0` (m): B_b = μ₀I/(2πy₀).
    pub fn from_trap_distance(current: f64, y0: f64, offset_field: f64) -> Result<Self, TrapError> {
        if current <= 0.0 {
            return Err(TrapError::BadParameter("current"));
        }
        if y0 <= 0.0 {
            return Err(TrapError::BadDistance(y0));
        }
        if offset_field <= 0.0 {
            return Err(TrapError::BadParameter("offset_field"));
        }
        Ok(Self {
            current,
            bias_field: k::MU0 * current / (2.0 * std::f64::consts::PI * y0),
            offset_field,
        })
    }

    /// Trap-center distance from the wire axis, y₀ = μ₀I/(2πB_b).
    pub fn trap_distance(&self) -> f64 {
        k::MU0 * self.current / (2.0 * std::f64::consts::PI * self.bias_field)
    }

    /// Transverse field gradient at the trap center,
    /// b′ = −2πB_b²/(μ₀I) = −μ₀I/(2πy₀²).
    pub fn gradient(&self) -> f64 {
        -2.0 * std::f64::consts::PI * self.bias_field * self.bias_field / (k::MU0 * self.current)
    }

    /// Wire field magnitude μ₀I/(2πy) at axis distance y.
    pub fn wire_field(&self, y: f64) -> f64 {
        k::MU0 * self.current / (2.0 * std::f64::consts::PI * y)
    }
}

/// Atomic data entering the trap and noise models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomSpec {
    /// Atomic mass (kg).
    pub mass: f64,
    /// Hyperfine Landé factor g_F.
    pub g_f: f64,
    /// Magnetic quantum number m_F of the trapped state.
    pub m_f: i32,
    /// Electron spin g-factor (≈ 2).
    pub g_s: f64,
    /// Zeeman transition frequency f₀ (Hz) between adjacent sublevels.
    pub f0: f64,
    /// Wavelength of the strongest electric-dipole line (m).
    pub lambda_d2: f64,
    /// Dipole moment of that line (C·m).
    pub dipole_d2: f64,
    /// |⟨f|S_x|i⟩| for the spin-flip transition.
    pub s_x: f64,
    /// |⟨f|S_y|i⟩| for the spin-flip transition.
    pub s_y: f64,
}

impl AtomSpec {
    /// ⁸⁷Rb in |F=2, m_F=2⟩ with the D₂ line data and a 70 kHz sublevel
    /// splitting.
    pub fn rb87() -> Self {
        Self {
            mass: 86.909_180_527 * k::AMU,
            g_f: 0.5,
            m_f: 2,
            g_s: 2.0,
            f0: 70e3,
            lambda_d2: 780e-9,
            dipole_d2: 4.227 * k::E_CHARGE * k::A0,
            s_x: 0.25,
            s_y: 0.25,
        }
    }

    /// g_F·m_F; positive for low-field seekers.
    pub fn gf_mf(&self) -> f64 {
        self.g_f * self.m_f as f64
    }

    /// Offset field reproducing the configured splitting:
    /// B_o = hf₀/(g_F μ_B), the inverse of [`transition_frequency`].
    pub fn offset_field_for_f0(&self) -> f64 {
        k::H_PLANCK * self.f0 / (self.g_f * k::MU_B)
    }
}

/// Exact field magnitude |B_T|(y) = √(B_o² + (μ₀I/(2πy) − B_b)²) at axis
/// distance y.
pub fn field_magnitude(cfg: &TrapConfig, y: f64) -> Result<f64, TrapError> {
    if y <= 0.0 {
        return Err(TrapError::BadDistance(y));
    }
    let dev = cfg.wire_field(y) - cfg.bias_field;
    Ok((cfg.offset_field * cfg.offset_field + dev * dev).sqrt())
}

/// Harmonic diagnostic: the root expanded to second order in the field
/// deviation, |B_T| ≈ B_o + (μ₀I/(2πy) − B_b)²/(2B_o). Valid while the
/// deviation stays small against the offset field.
pub fn field_magnitude_harmonic(cfg: &TrapConfig, y: f64) -> Result<f64, TrapError> {
    if y <= 0.0 {
        return Err(TrapError::BadDistance(y));
    }
    let dev = cfg.wire_field(y) - cfg.bias_field;
    Ok(cfg.offset_field + dev * dev / (2.0 * cfg.offset_field))
}

/// Zeeman interaction potential V(y) = g_F μ_B m_F |B_T|(y) of a low-field
/// seeker at axis distance y.
pub fn zeeman_potential(cfg: &TrapConfig, atom: &AtomSpec, y: f64) -> Result<f64, TrapError> {
    let gm = atom.gf_mf();
    if gm <= 0.0 {
        return Err(TrapError::NotTrappable(gm));
    }
    Ok(gm * k::MU_B * field_magnitude(cfg, y)?)
}

/// Sublevel transition frequency f₀ = g_F μ_B B_o/h for the configured
/// offset field (adjacent m_F levels split by g_F μ_B B_o).
pub fn transition_frequency(cfg: &TrapConfig, atom: &AtomSpec) -> f64 {
    atom.g_f * k::MU_B * cfg.offset_field / k::H_PLANCK
}

/// Radial oscillation frequency of the harmonic magnetic well,
/// ω_r = √(g_F μ_B m_F/(M B_o)) · μ₀I/(2πy₀²)  (rad/s).
///
/// This is the curvature of the magnetic potential alone; the tunneling
/// module recomputes the curvature of the total potential, which is softer
/// once the dispersion attraction is added.
pub fn trap_frequency_magnetic(cfg: &TrapConfig, atom: &AtomSpec) -> Result<f64, TrapError> {
    let gm = atom.gf_mf();
    if gm <= 0.0 {
        return Err(TrapError::NotTrappable(gm));
    }
    let y0 = cfg.trap_distance();
    Ok((gm * k::MU_B / (atom.mass * cfg.offset_field)).sqrt() * k::MU0 * cfg.current
        / (2.0 * std::f64::consts::PI * y0 * y0))
}
