//! `ggc`: compensation shifts, residual budgets, integration curves and
//! verification-shot counts for a dual-species UFF mission, as CSV.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ggc_core::compensation::uniform_chi_grid;
use ggc_core::report::{sweep_rows, write_curve_csv, write_ledger_csv, write_sweep_csv};
use ggc_core::{ggc_residual_budget, integration_curve, shifts_sweep, verification_shots, Curve, OrbitalPhase};

use config::{ConfigError, MissionConfig};

/// Seconds per month (1/12 of a Julian year).
const MONTH: f64 = 365.25 * 86_400.0 / 12.0;

#[derive(Parser)]
#[command(name = "ggc", version, about = "Gravity-gradient compensation for space-borne UFF tests")]
struct Cli {
    /// Mission config file, or `table1` for the built-in preset.
    config: String,

    /// Output directory for CSV files.
    #[arg(short, long, global = true, env = "GGC_OUTPUT_DIR")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compensation shifts and laser settings over one orbit (shifts.csv).
    Shifts {
        #[arg(long)]
        chi_steps: Option<usize>,
    },
    /// Residual systematic ledger at one orbital phase (budget.csv).
    Budget {
        /// Orbital phase, rad.
        #[arg(long, default_value_t = 0.0)]
        chi: f64,
        /// Evaluate without compensation shifts.
        #[arg(long)]
        uncompensated: bool,
    },
    /// Demodulated systematic and statistical curves (integration.csv).
    Integrate {
        #[arg(long)]
        months: Option<f64>,
        #[arg(long)]
        max_rows: Option<usize>,
    },
    /// Verification shots needed to pin the mean co-location.
    VerifyShots {
        /// Position target, m.
        #[arg(long, default_value_t = 1e-9)]
        target_r: f64,
        /// Velocity target, m/s.
        #[arg(long, default_value_t = 1e-6)]
        target_v: f64,
    },
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Model(#[from] ggc_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Io { .. } => 1,
            AppError::Config(_) => 2,
            AppError::Model(e) if e.is_solver_failure() => 3,
            // the solved shifts exist but no laser setting realizes them
            AppError::Model(ggc_core::Error::DegenerateWaveVector(_)) => 3,
            AppError::Model(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ggc: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), AppError> {
    let cfg = MissionConfig::load(&cli.config)?;
    let mission = cfg.mission()?;
    let out_dir = cli.output.clone().or_else(|| cfg.run.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));

    match cli.command {
        Command::Shifts { chi_steps } => {
            let n = chi_steps.unwrap_or(cfg.run.chi_steps);
            if n == 0 {
                return Err(ConfigError::Invalid("--chi-steps must be positive".into()).into());
            }
            let sp = &mission.species[0];
            let frame = mission.frame(OrbitalPhase::default());
            let sols = shifts_sweep(&frame, &sp.pulses(), &uniform_chi_grid(n))?;
            let rows = sweep_rows(&sols, sp.k_eff())?;
            let path = emit(&out_dir, "shifts.csv", |w| write_sweep_csv(w, &rows))?;
            let tilt = rows.iter().map(|r| r.theta2.abs().max(r.theta3.abs())).fold(0.0, f64::max);
            let df = rows.iter().map(|r| r.df2.abs().max(r.df3.abs())).fold(0.0, f64::max);
            eprintln!("{} rows for {}: max tilt {:.1} urad, max |df| {:.1} GHz -> {}", rows.len(), sp.name, tilt * 1e6, df * 1e-9, path.display());
        }
        Command::Budget { chi, uncompensated } => {
            let ledger = ggc_residual_budget(&mission, OrbitalPhase::new(chi), !uncompensated)?;
            let path = emit(&out_dir, "budget.csv", |w| write_ledger_csv(w, &ledger))?;
            eprintln!(
                "total {:.3e} m/s^2 (quadrature {:.3e}) -> {}",
                ledger.total_linear(),
                ledger.total_quadrature(),
                path.display()
            );
        }
        Command::Integrate { months, max_rows } => {
            let months = months.unwrap_or(cfg.run.months);
            if !(months > 0.0 && months.is_finite()) {
                return Err(ConfigError::Invalid("--months must be positive".into()).into());
            }
            let rows = max_rows.unwrap_or(cfg.run.max_rows);
            let curve = integration_curve(&mission, months * MONTH)?;
            let path = emit(&out_dir, "integration.csv", |w| write_curve_csv(w, &curve.rows(rows)))?;
            for threshold in [1e-15, 1e-16, 1e-17, 1e-18] {
                match curve.settling_time(Curve::Compensated, threshold) {
                    Some(t) => eprintln!("below {threshold:e} after {:.1} h", t / 3600.0),
                    None => eprintln!("not below {threshold:e} within {months} months"),
                }
            }
            eprintln!("{} cycles -> {}", curve.len(), path.display());
        }
        Command::VerifyShots { target_r, target_v } => {
            let s = &cfg.source;
            let nu = verification_shots(s.sigma_r, s.sigma_v, s.atoms, target_r, target_v)?;
            println!("{nu}");
        }
    }
    Ok(())
}

fn emit(dir: &Path, name: &str, write: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<PathBuf, AppError> {
    let path = dir.join(name);
    let io = |source| AppError::Io { path: path.clone(), source };
    std::fs::create_dir_all(dir).map_err(|source| AppError::Io { path: dir.into(), source })?;
    let mut w = BufWriter::new(File::create(&path).map_err(io)?);
    write(&mut w).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(path)
}
