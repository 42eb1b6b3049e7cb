//! Batch front end: sweeps and reports over the nanotube-trap pipeline.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CmdError;
use config::ResolvedConfig;

#[derive(Parser)]
#[command(name = "cntrap", version, about = "Nanotube microtrap feasibility sweeps")]
struct Cli {
    /// Configuration file (flat sectioned key = value; defaults when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for CSVs and plot scripts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads for sweeps (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Conductivity model override.
    #[arg(long, global = true, value_parser = ["tight-binding", "calibrated"])]
    mode: Option<String>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Conductivity and permittivity over a frequency grid.
    Conductivity {
        /// Grid start (rad/s); overrides the config.
        #[arg(long)]
        omega_start: Option<f64>,
        /// Grid stop (rad/s); overrides the config.
        #[arg(long)]
        omega_stop: Option<f64>,
        /// Grid points; overrides the config.
        #[arg(long)]
        omega_points: Option<usize>,
    },
    /// Spin-flip lifetime vs trapping distance.
    SpinflipSweep {
        #[arg(long)]
        start_nm: Option<f64>,
        #[arg(long)]
        stop_nm: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Potential decomposition at selected trap distances.
    PotentialProfile {
        /// Trap distances (nm), comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [100.0, 150.0, 200.0])]
        y0_nm: Vec<f64>,
    },
    /// WKB tunneling lifetime vs trapping distance.
    TunnelingSweep {
        #[arg(long)]
        start_nm: Option<f64>,
        #[arg(long)]
        stop_nm: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// One-point text report.
    Summary {
        /// Trap distance (nm); defaults to the configured one.
        #[arg(long)]
        y0_nm: Option<f64>,
    },
}

fn load_config(cli: &Cli) -> Result<ResolvedConfig, CmdError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| CmdError::Config(format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = config::resolve(&text).map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(mode) = &cli.mode {
        cfg.conductivity_mode = mode.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CmdError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CmdError::Config(e.to_string()))?;
    }
    let mut cfg = load_config(&cli)?;
    match &cli.cmd {
        Cmd::Conductivity {
            omega_start,
            omega_stop,
            omega_points,
        } => {
            if let Some(x) = omega_start {
                cfg.omega_start_rad_s = *x;
            }
            if let Some(x) = omega_stop {
                cfg.omega_stop_rad_s = *x;
            }
            if let Some(n) = omega_points {
                if *n == 0 {
                    return Err(CmdError::Config("empty frequency grid".into()));
                }
                cfg.omega_points = *n;
            }
            if cfg.omega_stop_rad_s < cfg.omega_start_rad_s {
                return Err(CmdError::Config("omega_stop below omega_start".into()));
            }
            let path = commands::cmd_conductivity(&cfg, &cli.out)?;
            println!("wrote {}", path.display());
        }
        Cmd::SpinflipSweep {
            start_nm,
            stop_nm,
            points,
        }
        | Cmd::TunnelingSweep {
            start_nm,
            stop_nm,
            points,
        } => {
            if let Some(x) = start_nm {
                cfg.start_nm = *x;
            }
            if let Some(x) = stop_nm {
                cfg.stop_nm = *x;
            }
            if let Some(n) = points {
                if *n == 0 {
                    return Err(CmdError::Config("empty sweep range".into()));
                }
                cfg.points = *n;
            }
            if cfg.stop_nm < cfg.start_nm {
                return Err(CmdError::Config("stop_nm below start_nm".into()));
            }
            let path = match &cli.cmd {
                Cmd::SpinflipSweep { .. } => commands::cmd_spinflip_sweep(&cfg, &cli.out)?,
                _ => commands::cmd_tunneling_sweep(&cfg, &cli.out)?,
            };
            println!("wrote {}", path.display());
        }
        Cmd::PotentialProfile { y0_nm } => {
            let paths = commands::cmd_potential_profile(&cfg, &cli.out, y0_nm)?;
            for p in paths {
                println!("wrote {}", p.display());
            }
        }
        Cmd::Summary { y0_nm } => {
            let y0 = y0_nm.unwrap_or(cfg.y0_nm);
            print!("{}", commands::cmd_summary(&cfg, y0)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
