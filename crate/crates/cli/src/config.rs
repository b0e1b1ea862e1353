//! Run configuration: a single JSON document describing the oscillator
//! parameters plus one section per subcommand. `--dump-config` emits the
//! effective configuration after all flag overrides; feeding that file
//! back through `--config` reproduces the run exactly.

use crate::CliError;
use parastab_core::OscillatorParams;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Inverse mean mass.
    pub delta_hat: f64,
    /// Mass-modulation amplitude.
    pub gamma: f64,
    /// Viscous damping coefficient.
    pub beta: f64,
    /// Mass-modulation angular frequency.
    pub omega_m: f64,
    /// External forcing amplitude.
    pub f_amp: f64,
    /// External forcing angular frequency.
    pub omega_f: f64,
    /// Worker threads for grid sweeps; 0 uses one thread per core.
    pub workers: usize,
    /// Directory receiving CSV/PGM/SVG artifacts.
    pub out_dir: String,
    pub trajectory: TrajectoryConfig,
    pub tongues: TonguesConfig,
    pub floquet_map: FloquetMapConfig,
    pub melnikov: MelnikovConfig,
    pub thresholds: ThresholdsConfig,
    pub basin: BasinConfig,
    pub integrity: IntegrityConfig,
    pub verify: VerifyConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            delta_hat: 1.0,
            gamma: 0.0,
            beta: 0.0,
            omega_m: 1.0,
            f_amp: 0.0,
            omega_f: 1.0,
            workers: 0,
            out_dir: ".".to_string(),
            trajectory: TrajectoryConfig::default(),
            tongues: TonguesConfig::default(),
            floquet_map: FloquetMapConfig::default(),
            melnikov: MelnikovConfig::default(),
            thresholds: ThresholdsConfig::default(),
            basin: BasinConfig::default(),
            integrity: IntegrityConfig::default(),
            verify: VerifyConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Oscillator parameters from the flat keys, with invariant checks.
    pub fn oscillator(&self) -> Result<OscillatorParams, CliError> {
        OscillatorParams::new(
            self.delta_hat,
            self.gamma,
            self.beta,
            self.omega_m,
            self.f_amp,
            self.omega_f,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// As [`oscillator`](Self::oscillator) but with a different gamma.
    pub fn oscillator_with_gamma(&self, gamma: f64) -> Result<OscillatorParams, CliError> {
        OscillatorParams::new(
            self.delta_hat,
            gamma,
            self.beta,
            self.omega_m,
            self.f_amp,
            self.omega_f,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// Which right-hand side to integrate: `full`, `linearized-origin`
    /// or `linearized-saddle`.
    pub rhs: String,
    pub x0: f64,
    pub y0: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            rhs: "full".to_string(),
            x0: 1.0,
            y0: 0.0,
            t_end: 20.0 * TAU,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TonguesConfig {
    /// Highest tongue index traced (boundaries for k = 1..=k_max).
    pub k_max: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    /// Hill-determinant truncation order.
    pub truncation: usize,
    /// Root tolerance in delta_hat.
    pub tol: f64,
    /// Also emit the damped first-tongue boundary for the configured beta.
    pub overlay_damped: bool,
    /// Emit an SVG line chart next to the CSV.
    pub svg: bool,
}

impl Default for TonguesConfig {
    fn default() -> Self {
        TonguesConfig {
            k_max: 3,
            gamma_min: 0.0,
            gamma_max: 0.1,
            gamma_steps: 41,
            truncation: 25,
            tol: 1e-12,
            overlay_damped: false,
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FloquetMapConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_steps: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for FloquetMapConfig {
    fn default() -> Self {
        FloquetMapConfig {
            gamma_min: 0.0,
            gamma_max: 0.4,
            gamma_steps: 41,
            delta_min: 0.05,
            delta_max: 2.5,
            delta_steps: 50,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MelnikovConfig {
    /// Phase at which the distance function is reported.
    pub t0: f64,
    /// Cross-check the closed form against the quadrature oracle.
    pub quadrature: bool,
    pub quad_tol: f64,
}

impl Default for MelnikovConfig {
    fn default() -> Self {
        MelnikovConfig {
            t0: 0.0,
            quadrature: false,
            quad_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdsConfig {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub gamma_steps: usize,
    pub omega_f_values: Vec<f64>,
    /// Validate each threshold against the quadrature oracle (slower).
    pub quadrature_check: bool,
}

impl Default for ThresholdsConfig {
    fn default() -> Self {
        ThresholdsConfig {
            gamma_min: 0.0,
            gamma_max: 0.08,
            gamma_steps: 41,
            omega_f_values: vec![0.85, 1.0, 1.15],
            quadrature_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasinConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
    /// Integration horizon in forcing periods (mass periods when F = 0).
    pub horizon_periods: u32,
    /// |x| beyond which a trajectory counts as escaped.
    pub escape_x: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for BasinConfig {
    fn default() -> Self {
        BasinConfig {
            x_min: -1.0,
            x_max: 2.0,
            y_min: -1.5,
            y_max: 1.5,
            nx: 301,
            ny: 301,
            horizon_periods: 32,
            escape_x: 10.0,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrityConfig {
    pub f_min: f64,
    pub f_max: f64,
    pub f_steps: usize,
    /// One integrity curve is computed per entry.
    pub gammas: Vec<f64>,
    /// Emit an SVG chart overlaying all curves.
    pub svg: bool,
}

impl Default for IntegrityConfig {
    fn default() -> Self {
        IntegrityConfig {
            f_min: 0.0,
            f_max: 0.2,
            f_steps: 41,
            gammas: vec![0.0, 0.05],
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Hill-determinant truncation used by the slope and coexistence
    /// suites; below ~2k+6 the slope check reports `UNSUPPORTED`.
    pub truncation: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { truncation: 25 }
    }
}

/// Evenly spaced grid including both endpoints; a single step collapses
/// to the lower endpoint.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![min];
    }
    let mut grid: Vec<f64> = (0..steps)
        .map(|i| min + (max - min) * i as f64 / (steps - 1) as f64)
        .collect();
    // Pin the last point to the exact endpoint.
    grid[steps - 1] = max;
    grid
}
