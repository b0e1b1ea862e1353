//! `parastab` — stability analysis of a softening (quadratic) oscillator
//! whose mass varies periodically in time: trajectories, Floquet maps,
//! parametric-resonance tongues, homoclinic-tangling thresholds and
//! safe-basin erosion diagrams, all driven by one JSON configuration.

mod commands;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::RunConfig;
use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration, parameters or output location (exit 2).
    Config(String),
    /// The numerics failed at runtime (exit 3).
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numeric(_) => ExitCode::from(3),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "parastab",
    version,
    about = "Stability toolkit for an escape oscillator with periodically varying mass",
    long_about = "Analyses of x'' + beta x' + x - x^2 = F sin(omega_f t) with mass \
                  m(t) = 1/delta_hat + gamma sin(omega_m t): single trajectories, Floquet \
                  classification maps, parametric-resonance tongue boundaries, homoclinic \
                  (Melnikov) erosion thresholds, safe-basin rasters and integrity curves. \
                  Every run is reproducible from a JSON config; flags override file values."
)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; flag values take precedence over it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for generated files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for grid sweeps (0 = one per core). Falls back to
    /// the PARASTAB_WORKERS environment variable, then the config file.
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Reserved for future stochastic features; accepted and ignored —
    /// every analysis is deterministic.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,
    /// Print the effective configuration as JSON and exit without
    /// running the subcommand.
    #[arg(long, global = true)]
    dump_config: bool,
    /// Inverse mean mass (> 0).
    #[arg(long, global = true, value_name = "X")]
    delta_hat: Option<f64>,
    /// Mass-modulation amplitude (|gamma| * delta_hat < 1).
    #[arg(long, global = true, value_name = "X")]
    gamma: Option<f64>,
    /// Viscous damping coefficient (>= 0).
    #[arg(long, global = true, value_name = "X")]
    beta: Option<f64>,
    /// Mass-modulation angular frequency (> 0).
    #[arg(long, global = true, value_name = "X")]
    omega_m: Option<f64>,
    /// External forcing amplitude (>= 0).
    #[arg(long, global = true, value_name = "X")]
    f_amp: Option<f64>,
    /// External forcing angular frequency (> 0).
    #[arg(long, global = true, value_name = "X")]
    omega_f: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write a full-precision t,x,y CSV.
    Trajectory(TrajectoryArgs),
    /// Trace the odd-harmonic tongue boundaries over a gamma grid.
    Tongues(TonguesArgs),
    /// Classify the origin's stability over a (gamma, delta_hat) grid.
    FloquetMap(FloquetMapArgs),
    /// Print the homoclinic-distance decomposition at one phase.
    Melnikov(MelnikovArgs),
    /// Tabulate the erosion forcing threshold over gamma and omega_f.
    Thresholds(ThresholdsArgs),
    /// Rasterize the safe basin as PGM and CSV.
    Basin(BasinArgs),
    /// Sweep the forcing amplitude and tabulate normalized safe area.
    Integrity(IntegrityArgs),
    /// Run the numerical cross-check suites and report pass/fail.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Right-hand side: full, linearized-origin or linearized-saddle.
    #[arg(long)]
    rhs: Option<String>,
    /// Initial position.
    #[arg(long)]
    x0: Option<f64>,
    /// Initial velocity.
    #[arg(long)]
    y0: Option<f64>,
    /// Integration end time (starts at t = 0).
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args)]
struct TonguesArgs {
    /// Trace boundaries for tongue indices 1..=k_max.
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    /// Hill-determinant truncation order.
    #[arg(long)]
    truncation: Option<usize>,
    /// Root tolerance in delta_hat.
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the damped first-tongue boundary rows.
    #[arg(long)]
    overlay_damped: bool,
    /// Also write an SVG chart.
    #[arg(long)]
    svg: bool,
}

#[derive(Args)]
struct FloquetMapArgs {
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    #[arg(long)]
    delta_min: Option<f64>,
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_steps: Option<usize>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args)]
struct MelnikovArgs {
    /// Phase at which the distance function is evaluated.
    #[arg(long)]
    t0: Option<f64>,
    /// Cross-check the closed form against the quadrature oracle.
    #[arg(long)]
    quadrature: bool,
    #[arg(long)]
    quad_tol: Option<f64>,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long)]
    gamma_min: Option<f64>,
    #[arg(long)]
    gamma_max: Option<f64>,
    #[arg(long)]
    gamma_steps: Option<usize>,
    /// Forcing frequencies, one column group per value.
    #[arg(long, value_delimiter = ',')]
    omega_f_values: Option<Vec<f64>>,
    /// Validate each threshold against the quadrature oracle (slower).
    #[arg(long)]
    quadrature_check: bool,
}

/// Raster window, resolution and per-cell integration settings, shared
/// by `basin` and `integrity`.
#[derive(Args)]
struct BasinGridArgs {
    #[arg(long)]
    x_min: Option<f64>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    y_min: Option<f64>,
    #[arg(long)]
    y_max: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Integration horizon in forcing periods (mass periods when F = 0).
    #[arg(long)]
    horizon_periods: Option<u32>,
    /// |x| beyond which a trajectory counts as escaped.
    #[arg(long)]
    escape_x: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args)]
struct BasinArgs {
    #[command(flatten)]
    grid: BasinGridArgs,
}

#[derive(Args)]
struct IntegrityArgs {
    #[arg(long)]
    f_min: Option<f64>,
    #[arg(long)]
    f_max: Option<f64>,
    #[arg(long)]
    f_steps: Option<usize>,
    /// Mass-modulation amplitudes, one curve per value.
    #[arg(long, value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    /// Also write an SVG chart overlaying all curves.
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    grid: BasinGridArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Hill-determinant truncation for the slope/coexistence suites.
    #[arg(long)]
    truncation: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut cfg = match &cli.common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    apply_common(&mut cfg, &cli.common)?;
    apply_command(&mut cfg, &cli.command);

    if cli.common.dump_config {
        print!("{}", cfg.to_json());
        return Ok(ExitCode::SUCCESS);
    }

    match &cli.command {
        Command::Trajectory(_) => commands::trajectory(&cfg)?,
        Command::Tongues(_) => commands::tongues(&cfg)?,
        Command::FloquetMap(_) => commands::floquet_map(&cfg)?,
        Command::Melnikov(_) => commands::melnikov(&cfg)?,
        Command::Thresholds(_) => commands::thresholds(&cfg)?,
        Command::Basin(_) => commands::basin(&cfg)?,
        Command::Integrity(_) => commands::integrity(&cfg)?,
        Command::Verify(_) => {
            let all_passed = commands::verify(&cfg)?;
            return Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_common(cfg: &mut RunConfig, common: &CommonArgs) -> Result<(), CliError> {
    if let Some(v) = common.delta_hat {
        cfg.delta_hat = v;
    }
    if let Some(v) = common.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = common.beta {
        cfg.beta = v;
    }
    if let Some(v) = common.omega_m {
        cfg.omega_m = v;
    }
    if let Some(v) = common.f_amp {
        cfg.f_amp = v;
    }
    if let Some(v) = common.omega_f {
        cfg.omega_f = v;
    }
    if let Some(dir) = &common.out {
        cfg.out_dir = dir.to_string_lossy().into_owned();
    }
    // --workers beats PARASTAB_WORKERS beats the config file.
    if let Some(w) = common.workers {
        cfg.workers = w;
    } else if let Ok(raw) = std::env::var("PARASTAB_WORKERS") {
        cfg.workers = raw.parse().map_err(|_| {
            CliError::Config(format!("PARASTAB_WORKERS must be a non-negative integer, got {raw:?}"))
        })?;
    }
    Ok(())
}

fn apply_command(cfg: &mut RunConfig, command: &Command) {
    match command {
        Command::Trajectory(a) => {
            let t = &mut cfg.trajectory;
            if let Some(v) = &a.rhs {
                t.rhs = v.clone();
            }
            if let Some(v) = a.x0 {
                t.x0 = v;
            }
            if let Some(v) = a.y0 {
                t.y0 = v;
            }
            if let Some(v) = a.t_end {
                t.t_end = v;
            }
            if let Some(v) = a.rel_tol {
                t.rel_tol = v;
            }
            if let Some(v) = a.abs_tol {
                t.abs_tol = v;
            }
        }
        Command::Tongues(a) => {
            let t = &mut cfg.tongues;
            if let Some(v) = a.k_max {
                t.k_max = v;
            }
            if let Some(v) = a.gamma_min {
                t.gamma_min = v;
            }
            if let Some(v) = a.gamma_max {
                t.gamma_max = v;
            }
            if let Some(v) = a.gamma_steps {
                t.gamma_steps = v;
            }
            if let Some(v) = a.truncation {
                t.truncation = v;
            }
            if let Some(v) = a.tol {
                t.tol = v;
            }
            if a.overlay_damped {
                t.overlay_damped = true;
            }
            if a.svg {
                t.svg = true;
            }
        }
        Command::FloquetMap(a) => {
            let m = &mut cfg.floquet_map;
            if let Some(v) = a.gamma_min {
                m.gamma_min = v;
            }
            if let Some(v) = a.gamma_max {
                m.gamma_max = v;
            }
            if let Some(v) = a.gamma_steps {
                m.gamma_steps = v;
            }
            if let Some(v) = a.delta_min {
                m.delta_min = v;
            }
            if let Some(v) = a.delta_max {
                m.delta_max = v;
            }
            if let Some(v) = a.delta_steps {
                m.delta_steps = v;
            }
            if let Some(v) = a.rel_tol {
                m.rel_tol = v;
            }
            if let Some(v) = a.abs_tol {
                m.abs_tol = v;
            }
        }
        Command::Melnikov(a) => {
            let m = &mut cfg.melnikov;
            if let Some(v) = a.t0 {
                m.t0 = v;
            }
            if a.quadrature {
                m.quadrature = true;
            }
            if let Some(v) = a.quad_tol {
                m.quad_tol = v;
            }
        }
        Command::Thresholds(a) => {
            let t = &mut cfg.thresholds;
            if let Some(v) = a.gamma_min {
                t.gamma_min = v;
            }
            if let Some(v) = a.gamma_max {
                t.gamma_max = v;
            }
            if let Some(v) = a.gamma_steps {
                t.gamma_steps = v;
            }
            if let Some(v) = &a.omega_f_values {
                t.omega_f_values = v.clone();
            }
            if a.quadrature_check {
                t.quadrature_check = true;
            }
        }
        Command::Basin(a) => apply_basin_grid(&mut cfg.basin, &a.grid),
        Command::Integrity(a) => {
            let i = &mut cfg.integrity;
            if let Some(v) = a.f_min {
                i.f_min = v;
            }
            if let Some(v) = a.f_max {
                i.f_max = v;
            }
            if let Some(v) = a.f_steps {
                i.f_steps = v;
            }
            if let Some(v) = &a.gammas {
                i.gammas = v.clone();
            }
            if a.svg {
                i.svg = true;
            }
            apply_basin_grid(&mut cfg.basin, &a.grid);
        }
        Command::Verify(a) => {
            if let Some(v) = a.truncation {
                cfg.verify.truncation = v;
            }
        }
    }
}

fn apply_basin_grid(b: &mut config::BasinConfig, g: &BasinGridArgs) {
    if let Some(v) = g.x_min {
        b.x_min = v;
    }
    if let Some(v) = g.x_max {
        b.x_max = v;
    }
    if let Some(v) = g.y_min {
        b.y_min = v;
    }
    if let Some(v) = g.y_max {
        b.y_max = v;
    }
    if let Some(v) = g.nx {
        b.nx = v;
    }
    if let Some(v) = g.ny {
        b.ny = v;
    }
    if let Some(v) = g.horizon_periods {
        b.horizon_periods = v;
    }
    if let Some(v) = g.escape_x {
        b.escape_x = v;
    }
    if let Some(v) = g.rel_tol {
        b.rel_tol = v;
    }
    if let Some(v) = g.abs_tol {
        b.abs_tol = v;
    }
}
