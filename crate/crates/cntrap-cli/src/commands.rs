//! The five batch commands: CSV emission plus gnuplot companions.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use cntrap_core::casimir::{CpTable, PolarizabilityModel};
use cntrap_core::material;
use cntrap_core::spinflip;
use cntrap_core::trap::TrapConfig;
use cntrap_core::tunneling::{self, TunnelError};

use crate::config::ResolvedConfig;

/// Command failure classified for the exit-code contract: configuration
/// problems exit 2, numeric/runtime problems exit 3.
#[derive(Debug, thiserror::Error)]
pub enum CmdError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Numeric(_) => 3,
        }
    }
}

fn numeric(e: impl std::fmt::Display) -> CmdError {
    CmdError::Numeric(e.to_string())
}

/// Formats one value with the configured number of significant digits.
fn fmt(x: f64, sig: usize) -> String {
    format!("{:.*e}", sig - 1, x)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CmdError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(numeric)?;
    }
    fs::write(path, contents).map_err(numeric)
}

/// Wavelength/conductivity table: one row per frequency.
pub fn cmd_conductivity(cfg: &ResolvedConfig, out: &Path) -> Result<PathBuf, CmdError> {
    let spec = cfg.nanotube();
    let sig = cfg.precision;
    let mut body = cfg.echo();
    body.push_str("omega_rad_s,sigma_bulk_re,sigma_bulk_im,sigma_sheet_re,sigma_sheet_im,eps_re,eps_im\n");
    for omega in cfg.omega_grid() {
        let s = material::sigma_axial(&spec, omega).map_err(numeric)?;
        let _ = writeln!(
            body,
            "{},{},{},{},{},{},{}",
            fmt(omega, sig),
            fmt(s.sigma_bulk_equiv.re, sig),
            fmt(s.sigma_bulk_equiv.im, sig),
            fmt(s.sigma_sheet.re, sig),
            fmt(s.sigma_sheet.im, sig),
            fmt(s.eps_r.re, sig),
            fmt(s.eps_r.im, sig),
        );
    }
    let csv = out.join("conductivity.csv");
    write_file(&csv, &body)?;
    write_file(
        &out.join("conductivity.gp"),
        "set datafile separator ','\n\
         set logscale x\n\
         set xlabel 'omega (rad/s)'\n\
         set ylabel 'sigma (S/m)'\n\
         plot 'conductivity.csv' using 1:2 with lines title 'Re sigma', \\\n\
              'conductivity.csv' using 1:3 with lines title 'Im sigma'\n",
    )?;
    Ok(csv)
}

/// Spin-flip lifetime against trapping distance.
pub fn cmd_spinflip_sweep(cfg: &ResolvedConfig, out: &Path) -> Result<PathBuf, CmdError> {
    let spec = cfg.nanotube();
    let atom = cfg.atom();
    let sig = cfg.precision;
    let distances = cfg.sweep_distances();
    let rows: Vec<(f64, Result<spinflip::SpinFlipResult, String>)> = distances
        .par_iter()
        .map(|&y0| {
            let res = spinflip::spin_flip_rate(&spec, &atom, y0, cfg.temperature_K)
                .map_err(|e| e.to_string());
            (y0, res)
        })
        .collect();
    let mut body = cfg.echo();
    body.push_str("y0_nm,gamma0_hz,n_th,gamma_tot_hz,tau_sf_s,error\n");
    let mut failures = 0usize;
    for (y0, res) in &rows {
        match res {
            Ok(r) => {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},",
                    fmt(y0 * 1e9, sig),
                    fmt(r.gamma0, sig),
                    fmt(r.n_th, sig),
                    fmt(r.gamma_tot, sig),
                    fmt(r.tau_sf, sig),
                );
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(body, "{},,,,,\"{}\"", fmt(y0 * 1e9, sig), e);
            }
        }
    }
    if failures == rows.len() {
        return Err(CmdError::Numeric("all sweep rows failed".into()));
    }
    let csv = out.join("spinflip.csv");
    write_file(&csv, &body)?;
    write_file(
        &out.join("spinflip.gp"),
        "set datafile separator ','\n\
         set logscale xy\n\
         set xlabel 'y0 (nm)'\n\
         set ylabel 'tau_SF (s)'\n\
         plot 'spinflip.csv' using 1:5 with lines title 'spin-flip lifetime'\n",
    )?;
    Ok(csv)
}

fn cp_table_for(
    cfg: &ResolvedConfig,
    y0_values: &[f64],
) -> Result<CpTable, CmdError> {
    let spec = cfg.nanotube();
    let model = PolarizabilityModel::from_atom(&cfg.atom());
    let min_y0 = y0_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_y0 = y0_values.iter().cloned().fold(0.0f64, f64::max);
    let lo = (0.02 * min_y0).max(1e-9) * 0.99;
    let hi = 3.0 * max_y0 * 1.01;
    CpTable::build(&spec, &model, lo, hi, 48).map_err(numeric)
}

/// Potential decomposition around one or more trap distances; one CSV per
/// distance with the barrier metrics appended as comment lines.
pub fn cmd_potential_profile(
    cfg: &ResolvedConfig,
    out: &Path,
    y0_nm: &[f64],
) -> Result<Vec<PathBuf>, CmdError> {
    if y0_nm.is_empty() {
        return Err(CmdError::Config("no trap distances requested".into()));
    }
    let spec = cfg.nanotube();
    let atom = cfg.atom();
    let sig = cfg.precision;
    let y0_m: Vec<f64> = y0_nm.iter().map(|y| y * 1e-9).collect();
    let table = cp_table_for(cfg, &y0_m)?;
    let mut written = Vec::new();
    for (&y0nm, &y0) in y0_nm.iter().zip(&y0_m) {
        let trap = TrapConfig::from_trap_distance(
            cfg.current_uA * 1e-6,
            y0 + spec.r_cn,
            cfg.offset_mT * 1e-3,
        )
        .map_err(numeric)?;
        let mut body = cfg.echo();
        body.push_str("y_nm,v_mag_J,u_cp_J,v_tot_J\n");
        match tunneling::build_profile(&trap, &atom, &spec, Some(&table), 800) {
            Ok(p) => {
                for i in 0..p.y_surface.len() {
                    let _ = writeln!(
                        body,
                        "{},{},{},{}",
                        fmt(p.y_surface[i] * 1e9, sig),
                        fmt(p.v_mag[i], sig),
                        fmt(p.u_cp[i], sig),
                        fmt(p.v_tot[i], sig),
                    );
                }
                let _ = writeln!(body, "# minimum_y_nm = {}", fmt(p.y_min * 1e9, sig));
                let _ = writeln!(body, "# minimum_J = {}", fmt(p.v_min, sig));
                let _ = writeln!(body, "# omega_r_rad_s = {}", fmt(p.omega_r, sig));
                let _ = writeln!(
                    body,
                    "# omega_r_magnetic_rad_s = {}",
                    fmt(p.omega_r_magnetic, sig)
                );
                match p.barrier {
                    Some(b) => {
                        let _ = writeln!(body, "# barrier = present");
                        let _ = writeln!(body, "# barrier_height_J = {}", fmt(b.height, sig));
                        let _ = writeln!(body, "# barrier_width_nm = {}", fmt(b.width * 1e9, sig));
                        let _ = writeln!(body, "# barrier_peak_nm = {}", fmt(b.y_peak * 1e9, sig));
                    }
                    None => {
                        let _ = writeln!(body, "# barrier = absent");
                    }
                }
            }
            Err(TunnelError::NoMinimum) => {
                let _ = writeln!(body, "# minimum = absent (trap destroyed)");
                let _ = writeln!(body, "# barrier = absent");
            }
            Err(e) => return Err(numeric(e)),
        }
        let csv = out.join(format!("profile_{}nm.csv", y0nm.round() as i64));
        write_file(&csv, &body)?;
        written.push(csv);
    }
    let mut gp = String::from(
        "set datafile separator ','\n\
         set xlabel 'y (nm)'\n\
         set ylabel 'V (J)'\n",
    );
    let plots: Vec<String> = written
        .iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            format!("'{name}' using 1:4 with lines title '{name}'")
        })
        .collect();
    let _ = writeln!(gp, "plot {}", plots.join(", \\\n     "));
    write_file(&out.join("profiles.gp"), &gp)?;
    Ok(written)
}

/// Tunneling lifetime against trap distance.
pub fn cmd_tunneling_sweep(cfg: &ResolvedConfig, out: &Path) -> Result<PathBuf, CmdError> {
    let spec = cfg.nanotube();
    let atom = cfg.atom();
    let sig = cfg.precision;
    let distances = cfg.sweep_distances();
    let table = cp_table_for(cfg, &distances)?;
    let rows: Vec<(f64, Result<tunneling::TunnelResult, String>)> = distances
        .par_iter()
        .map(|&y0| {
            let res = TrapConfig::from_trap_distance(
                cfg.current_uA * 1e-6,
                y0 + spec.r_cn,
                cfg.offset_mT * 1e-3,
            )
            .map_err(|e| e.to_string())
            .and_then(|trap| {
                tunneling::build_profile(&trap, &atom, &spec, Some(&table), 800)
                    .and_then(|p| tunneling::wkb_lifetime(&p, &atom))
                    .map_err(|e| e.to_string())
            });
            (y0, res)
        })
        .collect();
    let mut body = cfg.echo();
    body.push_str("y0_nm,barrier_present,transmission,omega_r_rad_s,tau_cp_s,error\n");
    let mut failures = 0usize;
    for (y0, res) in &rows {
        match res {
            Ok(r) => {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},",
                    fmt(y0 * 1e9, sig),
                    r.barrier_present,
                    fmt(r.transmission, sig),
                    fmt(r.omega_r, sig),
                    fmt(r.tau_cp, sig),
                );
            }
            Err(e) => {
                failures += 1;
                let _ = writeln!(body, "{},,,,,\"{}\"", fmt(y0 * 1e9, sig), e);
            }
        }
    }
    if failures == rows.len() {
        return Err(CmdError::Numeric("all sweep rows failed".into()));
    }
    let csv = out.join("tunneling.csv");
    write_file(&csv, &body)?;
    write_file(
        &out.join("tunneling.gp"),
        "set datafile separator ','\n\
         set logscale y\n\
         set xlabel 'y0 (nm)'\n\
         set ylabel 'tau_CP (s)'\n\
         plot 'tunneling.csv' using 1:5 with lines title 'tunneling lifetime'\n",
    )?;
    Ok(csv)
}

/// Text report for one working point: conductivity anchor plus the two
/// lifetimes side by side.
pub fn cmd_summary(cfg: &ResolvedConfig, y0_nm: f64) -> Result<String, CmdError> {
    let spec = cfg.nanotube();
    let atom = cfg.atom();
    let sig = cfg.precision;
    let y0 = y0_nm * 1e-9;
    let omega0 = 2.0 * std::f64::consts::PI * cfg.f0_kHz * 1e3;

    let cond = material::sigma_axial(&spec, omega0).map_err(numeric)?;
    let sf = spinflip::spin_flip_rate(&spec, &atom, y0, cfg.temperature_K).map_err(numeric)?;
    let table = cp_table_for(cfg, &[y0])?;
    let trap = TrapConfig::from_trap_distance(
        cfg.current_uA * 1e-6,
        y0 + spec.r_cn,
        cfg.offset_mT * 1e-3,
    )
    .map_err(numeric)?;

    let mut s = String::new();
    let _ = writeln!(s, "working point: y0 = {} nm", fmt(y0_nm, sig));
    let _ = writeln!(
        s,
        "conductivity(omega0): {} + {}i (ohm m)^-1",
        fmt(cond.sigma_bulk_equiv.re, sig),
        fmt(cond.sigma_bulk_equiv.im, sig)
    );
    let _ = writeln!(
        s,
        "permittivity(omega0): {} + {}i",
        fmt(cond.eps_r.re, sig),
        fmt(cond.eps_r.im, sig)
    );
    let _ = writeln!(s, "thermal occupation n_th: {}", fmt(sf.n_th, sig));
    let _ = writeln!(s, "spin-flip lifetime tau_SF: {} s", fmt(sf.tau_sf, sig));
    match tunneling::build_profile(&trap, &atom, &spec, Some(&table), 800) {
        Ok(p) => {
            let _ = writeln!(s, "well minimum: {} nm", fmt(p.y_min * 1e9, sig));
            let _ = writeln!(s, "omega_r (total curvature): {} rad/s", fmt(p.omega_r, sig));
            let _ = writeln!(
                s,
                "omega_r (magnetic harmonic): {} rad/s",
                fmt(p.omega_r_magnetic, sig)
            );
            match p.barrier {
                Some(b) => {
                    let _ = writeln!(s, "barrier height: {} J", fmt(b.height, sig));
                    let _ = writeln!(s, "barrier width: {} nm", fmt(b.width * 1e9, sig));
                }
                None => {
                    let _ = writeln!(s, "barrier: absent");
                }
            }
            let t = tunneling::wkb_lifetime(&p, &atom).map_err(numeric)?;
            let _ = writeln!(s, "transmission T: {}", fmt(t.transmission, sig));
            let _ = writeln!(s, "tunneling lifetime tau_CP: {} s", fmt(t.tau_cp, sig));
            let _ = writeln!(
                s,
                "lifetimes side by side: tau_SF = {} s, tau_CP = {} s",
                fmt(sf.tau_sf, sig),
                fmt(t.tau_cp, sig)
            );
        }
        Err(TunnelError::NoMinimum) => {
            let _ = writeln!(s, "well minimum: absent (trap destroyed)");
        }
        Err(e) => return Err(numeric(e)),
    }
    Ok(s)
}
