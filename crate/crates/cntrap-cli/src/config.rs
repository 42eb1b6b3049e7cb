//! Flat sectioned key-value run configuration.
//!
//! The file format is deliberately minimal and diff-friendly:
//!
//! ```text
//! [trap]
//! current_uA = 20
//! y0_nm = 150
//! f0_kHz = 70
//! ```
//!
//! Units are encoded in the key names. Exactly one of (`y0_nm`, `bias_mT`)
//! and one of (`f0_kHz`, `offset_mT`) may be given; the partner quantity is
//! derived. Every emitted CSV carries the fully-resolved configuration as
//! `# key = value` comment lines, and that echo re-parses to the identical
//! resolved configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use cntrap_core::constants as k;
use cntrap_core::material::{ConductivityMode, NanotubeSpec, SheetModel, SIGMA_REFERENCE};
use cntrap_core::trap::AtomSpec;

#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Sweep axis scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Log,
    Linear,
}

/// Fully-resolved run configuration; every field has a definite value.
/// Field names mirror the config keys, units included, hence the mixed
/// case.
#[allow(non_snake_case)]
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedConfig {
    // [nanotube]
    pub a: u32,
    pub b: u32,
    pub radius_nm: f64,
    pub cell_length_nm: f64,
    pub hopping_eV: f64,
    pub relaxation_energy_meV: f64,
    pub electron_temperature_K: f64,
    pub conductivity_mode: String,
    pub sigma0_per_ohm_m: f64,
    pub sheet_casimir_thickness_A: f64,
    // [trap]
    pub current_uA: f64,
    pub y0_nm: f64,
    pub bias_mT: f64,
    pub f0_kHz: f64,
    pub offset_mT: f64,
    // [atom]
    pub mass_amu: f64,
    pub g_f: f64,
    pub m_f: i32,
    pub g_s: f64,
    pub lambda_nm: f64,
    pub dipole_ea0: f64,
    pub s_x: f64,
    pub s_y: f64,
    // [environment]
    pub temperature_K: f64,
    // [sweep]
    pub start_nm: f64,
    pub stop_nm: f64,
    pub points: usize,
    pub scale: SweepScale,
    pub omega_start_rad_s: f64,
    pub omega_stop_rad_s: f64,
    pub omega_points: usize,
    // [output]
    pub precision: usize,
}

impl Default for ResolvedConfig {
    fn default() -> Self {
        let f0 = 70.0; // kHz
        let y0 = 150.0; // nm
        let current = 20.0; // μA
        let atom = AtomSpec::rb87();
        let bias = k::MU0 * current * 1e-6 / (2.0 * std::f64::consts::PI * (y0 * 1e-9 + 3.52e-10));
        let offset = k::H_PLANCK * f0 * 1e3 / (0.5 * k::MU_B);
        let omega0 = 2.0 * std::f64::consts::PI * f0 * 1e3;
        Self {
            a: 9,
            b: 0,
            radius_nm: 0.352,
            cell_length_nm: 0.213,
            hopping_eV: 4.32e-19 / k::E_CHARGE,
            relaxation_energy_meV: 4.8e-21 / k::E_CHARGE * 1e3,
            electron_temperature_K: 380.0,
            conductivity_mode: "calibrated".into(),
            sigma0_per_ohm_m: SIGMA_REFERENCE,
            sheet_casimir_thickness_A: 6.0,
            current_uA: current,
            y0_nm: y0,
            bias_mT: bias * 1e3,
            f0_kHz: f0,
            offset_mT: offset * 1e3,
            mass_amu: atom.mass / k::AMU,
            g_f: atom.g_f,
            m_f: atom.m_f,
            g_s: atom.g_s,
            lambda_nm: atom.lambda_d2 * 1e9,
            dipole_ea0: atom.dipole_d2 / (k::E_CHARGE * k::A0),
            s_x: atom.s_x,
            s_y: atom.s_y,
            temperature_K: 380.0,
            start_nm: 1.0,
            stop_nm: 200.0,
            points: 60,
            scale: SweepScale::Log,
            omega_start_rad_s: omega0,
            omega_stop_rad_s: omega0,
            omega_points: 1,
            precision: 9,
        }
    }
}

/// Raw `section.key -> value` map from a config file or CSV header echo.
fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        // accept both bare lines and the '# '-prefixed CSV echo
        let line = raw.trim().trim_start_matches('#').trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("line {}: expected `key = value`", lineno + 1)))?;
        if section.is_empty() {
            return Err(err(format!("line {}: key outside any [section]", lineno + 1)));
        }
        out.insert(
            format!("{section}.{}", key.trim()),
            value.trim().to_string(),
        );
    }
    Ok(out)
}

fn take_f64(
    map: &mut BTreeMap<String, String>,
    key: &str,
    positive: bool,
) -> Result<Option<f64>, ConfigError> {
    match map.remove(key) {
        None => Ok(None),
        Some(v) => {
            let x: f64 = v
                .parse()
                .map_err(|_| err(format!("{key}: not a number: {v}")))?;
            if positive && x <= 0.0 {
                return Err(err(format!("{key}: must be positive, got {x}")));
            }
            Ok(Some(x))
        }
    }
}

/// Parses and resolves a configuration; `text` may be a config file or the
/// comment echo of an emitted CSV.
pub fn resolve(text: &str) -> Result<ResolvedConfig, ConfigError> {
    let mut map = parse_pairs(text)?;
    let mut cfg = ResolvedConfig::default();

    if let Some(v) = map.remove("nanotube.a") {
        cfg.a = v.parse().map_err(|_| err("nanotube.a: not an integer"))?;
    }
    if let Some(v) = map.remove("nanotube.b") {
        cfg.b = v.parse().map_err(|_| err("nanotube.b: not an integer"))?;
    }
    macro_rules! set_positive {
        ($($key:literal => $field:ident),+ $(,)?) => {
            $(if let Some(x) = take_f64(&mut map, $key, true)? {
                cfg.$field = x;
            })+
        };
    }
    set_positive!(
        "nanotube.radius_nm" => radius_nm,
        "nanotube.cell_length_nm" => cell_length_nm,
        "nanotube.hopping_eV" => hopping_eV,
        "nanotube.relaxation_energy_meV" => relaxation_energy_meV,
        "nanotube.electron_temperature_K" => electron_temperature_K,
        "nanotube.sigma0_per_ohm_m" => sigma0_per_ohm_m,
        "nanotube.sheet_casimir_thickness_A" => sheet_casimir_thickness_A,
        "trap.current_uA" => current_uA,
        "atom.mass_amu" => mass_amu,
        "atom.g_s" => g_s,
        "atom.lambda_nm" => lambda_nm,
        "atom.dipole_ea0" => dipole_ea0,
        "environment.temperature_K" => temperature_K,
    );
    if let Some(x) = take_f64(&mut map, "atom.g_f", false)? {
        cfg.g_f = x;
    }
    if let Some(v) = map.remove("atom.m_f") {
        cfg.m_f = v.parse().map_err(|_| err("atom.m_f: not an integer"))?;
    }
    if let Some(x) = take_f64(&mut map, "atom.s_x", true)? {
        cfg.s_x = x;
    }
    if let Some(x) = take_f64(&mut map, "atom.s_y", true)? {
        cfg.s_y = x;
    }
    if let Some(v) = map.remove("nanotube.conductivity_mode") {
        match v.as_str() {
            "calibrated" | "tight-binding" => cfg.conductivity_mode = v,
            other => return Err(err(format!("nanotube.conductivity_mode: unknown mode {other}"))),
        }
    }

    // exactly one of (y0_nm, bias_mT); the other is derived
    let y0 = take_f64(&mut map, "trap.y0_nm", true)?;
    let bias = take_f64(&mut map, "trap.bias_mT", true)?;
    let wire = |y0_nm: f64, cfg: &ResolvedConfig| {
        k::MU0 * cfg.current_uA * 1e-6
            / (2.0 * std::f64::consts::PI * (y0_nm * 1e-9 + cfg.radius_nm * 1e-9))
    };
    match (y0, bias) {
        (Some(_), Some(_)) => {
            return Err(err("trap: give exactly one of y0_nm and bias_mT, not both"))
        }
        (Some(y), None) => {
            cfg.y0_nm = y;
            cfg.bias_mT = wire(y, &cfg) * 1e3;
        }
        (None, Some(bm)) => {
            cfg.bias_mT = bm;
            cfg.y0_nm =
                (k::MU0 * cfg.current_uA * 1e-6 / (2.0 * std::f64::consts::PI * bm * 1e-3)
                    - cfg.radius_nm * 1e-9)
                    * 1e9;
        }
        (None, None) => {
            cfg.bias_mT = wire(cfg.y0_nm, &cfg) * 1e3;
        }
    }

    // exactly one of (f0_kHz, offset_mT)
    let f0 = take_f64(&mut map, "trap.f0_kHz", true)?;
    let offset = take_f64(&mut map, "trap.offset_mT", true)?;
    match (f0, offset) {
        (Some(_), Some(_)) => {
            return Err(err("trap: give exactly one of f0_kHz and offset_mT, not both"))
        }
        (Some(f), None) => {
            cfg.f0_kHz = f;
            cfg.offset_mT = k::H_PLANCK * f * 1e3 / (cfg.g_f * k::MU_B) * 1e3;
        }
        (None, Some(bo)) => {
            cfg.offset_mT = bo;
            cfg.f0_kHz = cfg.g_f * k::MU_B * bo * 1e-3 / k::H_PLANCK * 1e-3;
        }
        (None, None) => {
            cfg.offset_mT = k::H_PLANCK * cfg.f0_kHz * 1e3 / (cfg.g_f * k::MU_B) * 1e3;
        }
    }

    set_positive!(
        "sweep.start_nm" => start_nm,
        "sweep.stop_nm" => stop_nm,
        "sweep.omega_start_rad_s" => omega_start_rad_s,
        "sweep.omega_stop_rad_s" => omega_stop_rad_s,
    );
    if let Some(v) = map.remove("sweep.points") {
        cfg.points = v.parse().map_err(|_| err("sweep.points: not an integer"))?;
    }
    if let Some(v) = map.remove("sweep.omega_points") {
        cfg.omega_points = v
            .parse()
            .map_err(|_| err("sweep.omega_points: not an integer"))?;
    }
    if let Some(v) = map.remove("sweep.scale") {
        cfg.scale = match v.as_str() {
            "log" => SweepScale::Log,
            "linear" => SweepScale::Linear,
            other => return Err(err(format!("sweep.scale: unknown scale {other}"))),
        };
    }
    if let Some(v) = map.remove("output.precision") {
        cfg.precision = v
            .parse()
            .map_err(|_| err("output.precision: not an integer"))?;
        if cfg.precision < 9 {
            return Err(err("output.precision: at least 9 significant digits required"));
        }
    }

    if let Some((key, _)) = map.into_iter().next() {
        return Err(err(format!("unknown key: {key}")));
    }
    if cfg.points == 0 {
        return Err(err("sweep.points: empty sweep range"));
    }
    if cfg.omega_points == 0 {
        return Err(err("sweep.omega_points: empty sweep range"));
    }
    if cfg.stop_nm < cfg.start_nm {
        return Err(err("sweep: stop_nm must be ≥ start_nm"));
    }
    if cfg.omega_stop_rad_s < cfg.omega_start_rad_s {
        return Err(err("sweep: omega_stop_rad_s must be ≥ omega_start_rad_s"));
    }
    Ok(cfg)
}

impl ResolvedConfig {
    /// Nanotube model for the core crate.
    pub fn nanotube(&self) -> NanotubeSpec {
        let mut spec = NanotubeSpec::nine_zero();
        spec.a = self.a;
        spec.b = self.b;
        spec.r_cn = self.radius_nm * 1e-9;
        spec.ell = self.cell_length_nm * 1e-9;
        spec.t0 = self.hopping_eV * k::E_CHARGE;
        spec.hbar_over_tau = self.relaxation_energy_meV * 1e-3 * k::E_CHARGE;
        spec.t_el = self.electron_temperature_K;
        spec.mode = match self.conductivity_mode.as_str() {
            "tight-binding" => ConductivityMode::TightBinding,
            _ => ConductivityMode::Calibrated {
                sigma0: self.sigma0_per_ohm_m,
            },
        };
        spec.sheet_casimir = SheetModel::Thickness(self.sheet_casimir_thickness_A * 1e-10);
        spec
    }

    /// Atom model for the core crate.
    pub fn atom(&self) -> AtomSpec {
        AtomSpec {
            mass: self.mass_amu * k::AMU,
            g_f: self.g_f,
            m_f: self.m_f,
            g_s: self.g_s,
            f0: self.f0_kHz * 1e3,
            lambda_d2: self.lambda_nm * 1e-9,
            dipole_d2: self.dipole_ea0 * k::E_CHARGE * k::A0,
            s_x: self.s_x,
            s_y: self.s_y,
        }
    }

    /// Sweep distances (m, surface) in the configured scale.
    pub fn sweep_distances(&self) -> Vec<f64> {
        let (a, b, n) = (self.start_nm * 1e-9, self.stop_nm * 1e-9, self.points);
        if n == 1 {
            return vec![a];
        }
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                match self.scale {
                    SweepScale::Log => a * (b / a).powf(f),
                    SweepScale::Linear => a + (b - a) * f,
                }
            })
            .collect()
    }

    /// Angular-frequency grid (rad/s), logarithmic.
    pub fn omega_grid(&self) -> Vec<f64> {
        let (a, b, n) = (self.omega_start_rad_s, self.omega_stop_rad_s, self.omega_points);
        if n == 1 || a == b {
            return vec![a];
        }
        (0..n)
            .map(|i| a * (b / a).powf(i as f64 / (n - 1) as f64))
            .collect()
    }

    /// The resolved configuration as `# `-prefixed comment lines; parsing
    /// this echo with [`resolve`] reproduces the configuration exactly.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# [nanotube]");
        let _ = writeln!(s, "# a = {}", self.a);
        let _ = writeln!(s, "# b = {}", self.b);
        let _ = writeln!(s, "# radius_nm = {:e}", self.radius_nm);
        let _ = writeln!(s, "# cell_length_nm = {:e}", self.cell_length_nm);
        let _ = writeln!(s, "# hopping_eV = {:e}", self.hopping_eV);
        let _ = writeln!(s, "# relaxation_energy_meV = {:e}", self.relaxation_energy_meV);
        let _ = writeln!(s, "# electron_temperature_K = {:e}", self.electron_temperature_K);
        let _ = writeln!(s, "# conductivity_mode = {}", self.conductivity_mode);
        let _ = writeln!(s, "# sigma0_per_ohm_m = {:e}", self.sigma0_per_ohm_m);
        let _ = writeln!(s, "# sheet_casimir_thickness_A = {:e}", self.sheet_casimir_thickness_A);
        let _ = writeln!(s, "# [trap]");
        let _ = writeln!(s, "# current_uA = {:e}", self.current_uA);
        let _ = writeln!(s, "# y0_nm = {:e}", self.y0_nm);
        let _ = writeln!(s, "# f0_kHz = {:e}", self.f0_kHz);
        let _ = writeln!(s, "# [atom]");
        let _ = writeln!(s, "# mass_amu = {:e}", self.mass_amu);
        let _ = writeln!(s, "# g_f = {:e}", self.g_f);
        let _ = writeln!(s, "# m_f = {}", self.m_f);
        let _ = writeln!(s, "# g_s = {:e}", self.g_s);
        let _ = writeln!(s, "# lambda_nm = {:e}", self.lambda_nm);
        let _ = writeln!(s, "# dipole_ea0 = {:e}", self.dipole_ea0);
        let _ = writeln!(s, "# s_x = {:e}", self.s_x);
        let _ = writeln!(s, "# s_y = {:e}", self.s_y);
        let _ = writeln!(s, "# [environment]");
        let _ = writeln!(s, "# temperature_K = {:e}", self.temperature_K);
        let _ = writeln!(s, "# [sweep]");
        let _ = writeln!(s, "# start_nm = {:e}", self.start_nm);
        let _ = writeln!(s, "# stop_nm = {:e}", self.stop_nm);
        let _ = writeln!(s, "# points = {}", self.points);
        let _ = writeln!(
            s,
            "# scale = {}",
            match self.scale {
                SweepScale::Log => "log",
                SweepScale::Linear => "linear",
            }
        );
        let _ = writeln!(s, "# omega_start_rad_s = {:e}", self.omega_start_rad_s);
        let _ = writeln!(s, "# omega_stop_rad_s = {:e}", self.omega_stop_rad_s);
        let _ = writeln!(s, "# omega_points = {}", self.omega_points);
        let _ = writeln!(s, "# [output]");
        let _ = writeln!(s, "# precision = {}", self.precision);
        s
    }
}
