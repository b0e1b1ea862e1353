//! Safe-basin rasters and erosion (integrity) curves.
//!
//! A grid of initial conditions is integrated forward over a fixed
//! horizon; cells whose trajectory crosses the escape threshold are
//! classed as escaped, the rest as safe. The safe area as a function of
//! forcing amplitude, normalized by the unforced unmodulated baseline,
//! is the integrity curve whose steep drop locates the erosion cliff.

use crate::ode::{integrate_until_escape, IntegratorSettings};
use crate::params::{OscillatorParams, State};
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt;

/// Rectangular lattice of initial conditions plus the escape criterion.
///
/// The lattice includes both endpoints of each range: column ix sits at
/// `x0 + ix * (x1 - x0) / (nx - 1)` and similarly for rows.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinGridSpec {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Integration horizon in periods of the forcing (or of the mass
    /// modulation when the forcing amplitude is zero).
    pub horizon_periods: u32,
    /// |x| beyond which a trajectory counts as escaped from the well.
    pub escape_x: f64,
}

impl Default for BasinGridSpec {
    fn default() -> Self {
        BasinGridSpec {
            x_range: (-1.0, 2.0),
            y_range: (-1.5, 1.5),
            nx: 301,
            ny: 301,
            horizon_periods: 32,
            escape_x: 10.0,
        }
    }
}

impl BasinGridSpec {
    fn assert_valid(&self) {
        assert!(
            self.x_range.0 < self.x_range.1 && self.x_range.0.is_finite() && self.x_range.1.is_finite(),
            "x_range must be a finite non-degenerate interval"
        );
        assert!(
            self.y_range.0 < self.y_range.1 && self.y_range.0.is_finite() && self.y_range.1.is_finite(),
            "y_range must be a finite non-degenerate interval"
        );
        assert!(self.nx >= 2 && self.ny >= 2, "grid needs at least 2x2 points");
        assert!(self.horizon_periods >= 1, "horizon must cover at least one period");
        assert!(self.escape_x > 1.0, "escape threshold must lie beyond the saddle");
    }

    pub fn x_at(&self, ix: usize) -> f64 {
        debug_assert!(ix < self.nx);
        self.x_range.0 + (self.x_range.1 - self.x_range.0) * ix as f64 / (self.nx - 1) as f64
    }

    pub fn y_at(&self, iy: usize) -> f64 {
        debug_assert!(iy < self.ny);
        self.y_range.0 + (self.y_range.1 - self.y_range.0) * iy as f64 / (self.ny - 1) as f64
    }

    /// Area of the sampling window in phase space.
    pub fn window_area(&self) -> f64 {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
    }

    /// Horizon expressed in integration time for the given parameters.
    pub fn horizon_time(&self, params: OscillatorParams) -> f64 {
        let rate = if params.f_amp() > 0.0 {
            params.omega_f()
        } else {
            params.omega_m()
        };
        self.horizon_periods as f64 * TAU / rate
    }
}

/// Fate of one initial condition within the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellClass {
    Safe,
    Escaped,
}

impl fmt::Display for CellClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellClass::Safe => "safe",
            CellClass::Escaped => "escaped",
        })
    }
}

fn classify_cell(
    params: OscillatorParams,
    x0: f64,
    y0: f64,
    horizon: f64,
    escape_x: f64,
    settings: &IntegratorSettings,
) -> (CellClass, bool) {
    match integrate_until_escape(params, State::new(0.0, x0, y0), horizon, escape_x, settings) {
        Ok(outcome) => {
            let class = if outcome.escaped {
                CellClass::Escaped
            } else {
                CellClass::Safe
            };
            (class, false)
        }
        // A trajectory the integrator cannot follow (step underflow on a
        // near-singular excursion) is by construction leaving the safe
        // region; count it as escaped but keep the tally visible.
        Err(_) => (CellClass::Escaped, true),
    }
}

/// Fate of a single initial condition over the spec's horizon.
pub fn classify_initial_condition(
    params: OscillatorParams,
    x0: f64,
    y0: f64,
    spec: &BasinGridSpec,
    settings: &IntegratorSettings,
) -> CellClass {
    spec.assert_valid();
    let horizon = spec.horizon_time(params);
    classify_cell(params, x0, y0, horizon, spec.escape_x, settings).0
}

/// Classified lattice; cells are stored row-major with x fastest and y
/// ascending, i.e. `cells[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinRaster {
    pub params: OscillatorParams,
    pub spec: BasinGridSpec,
    cells: Vec<CellClass>,
    /// Number of cells classed escaped because integration failed rather
    /// than because the trajectory crossed the threshold.
    pub integration_failures: usize,
}

impl BasinRaster {
    pub fn cells(&self) -> &[CellClass] {
        &self.cells
    }

    pub fn cell(&self, ix: usize, iy: usize) -> CellClass {
        assert!(ix < self.spec.nx && iy < self.spec.ny);
        self.cells[iy * self.spec.nx + ix]
    }

    pub fn safe_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|&&c| c == CellClass::Safe)
            .count()
    }

    /// Safe area estimate: safe lattice fraction times window area.
    pub fn safe_area(&self) -> f64 {
        self.safe_count() as f64 / self.cells.len() as f64 * self.spec.window_area()
    }
}

/// Classifies the whole lattice, splitting cells across the current rayon
/// worker pool. Work is keyed by cell index, so the result is identical
/// for any worker count.
pub fn basin_raster(
    params: OscillatorParams,
    spec: &BasinGridSpec,
    settings: &IntegratorSettings,
) -> BasinRaster {
    spec.assert_valid();
    let horizon = spec.horizon_time(params);
    let results: Vec<(CellClass, bool)> = (0..spec.nx * spec.ny)
        .into_par_iter()
        .map(|idx| {
            let ix = idx % spec.nx;
            let iy = idx / spec.nx;
            classify_cell(
                params,
                spec.x_at(ix),
                spec.y_at(iy),
                horizon,
                spec.escape_x,
                settings,
            )
        })
        .collect();
    let integration_failures = results.iter().filter(|&&(_, failed)| failed).count();
    BasinRaster {
        params,
        spec: spec.clone(),
        cells: results.into_iter().map(|(c, _)| c).collect(),
        integration_failures,
    }
}

/// Safe-basin area for one parameter set.
pub fn safe_basin_area(
    params: OscillatorParams,
    spec: &BasinGridSpec,
    settings: &IntegratorSettings,
) -> f64 {
    basin_raster(params, spec, settings).safe_area()
}

/// Basin integrity against forcing amplitude, normalized by the
/// unforced, unmodulated (F = 0, gamma = 0) baseline area.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrityCurve {
    pub baseline_area: f64,
    /// (forcing amplitude, normalized safe area), in the input order.
    pub points: Vec<(f64, f64)>,
}

impl IntegrityCurve {
    /// First forcing amplitude at which the normalized area drops below
    /// one half, located by linear interpolation between neighbouring
    /// samples; `None` while the basin stays above half its size.
    pub fn cliff(&self) -> Option<f64> {
        for (i, &(f, a)) in self.points.iter().enumerate() {
            if a < 0.5 {
                if i == 0 {
                    return Some(f);
                }
                let (f_prev, a_prev) = self.points[i - 1];
                return Some(f_prev + (a_prev - 0.5) * (f - f_prev) / (a_prev - a));
            }
        }
        None
    }
}

/// Sweeps the forcing amplitude over `f_values` (ascending, finite,
/// non-negative) and returns the normalized integrity curve.
pub fn integrity_curve(
    params: OscillatorParams,
    f_values: &[f64],
    spec: &BasinGridSpec,
    settings: &IntegratorSettings,
) -> IntegrityCurve {
    assert!(
        f_values.windows(2).all(|w| w[0] < w[1]),
        "forcing amplitudes must be strictly ascending"
    );
    assert!(
        f_values.iter().all(|f| f.is_finite() && *f >= 0.0),
        "forcing amplitudes must be finite and non-negative"
    );
    let baseline_params = OscillatorParams::new(
        params.delta_hat(),
        0.0,
        params.beta(),
        params.omega_m(),
        0.0,
        params.omega_f(),
    )
    .expect("baseline parameters are valid whenever the originals are");
    let baseline_area = safe_basin_area(baseline_params, spec, settings);
    assert!(
        baseline_area > 0.0,
        "baseline basin is empty; the sampling window misses the well"
    );
    let points = f_values
        .iter()
        .map(|&f| {
            let p = params
                .with_f_amp(f)
                .expect("validated forcing amplitude");
            (f, safe_basin_area(p, spec, settings) / baseline_area)
        })
        .collect();
    IntegrityCurve {
        baseline_area,
        points,
    }
}

/// Runs `f` inside a rayon pool with the requested number of worker
/// threads; 0 keeps the global default pool.
pub fn with_worker_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return f();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool")
        .install(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(
        delta_hat: f64,
        gamma: f64,
        beta: f64,
        f_amp: f64,
    ) -> OscillatorParams {
        OscillatorParams::new(delta_hat, gamma, beta, 1.0, f_amp, 1.0).unwrap()
    }

    fn small_spec(n: usize, periods: u32) -> BasinGridSpec {
        BasinGridSpec {
            nx: n,
            ny: n,
            horizon_periods: periods,
            ..BasinGridSpec::default()
        }
    }

    #[test]
    fn grid_coordinates_cover_the_window() {
        let spec = BasinGridSpec::default();
        assert_eq!(spec.x_at(0), -1.0);
        assert_eq!(spec.x_at(300), 2.0);
        assert_eq!(spec.y_at(0), -1.5);
        assert_eq!(spec.y_at(300), 1.5);
        assert_eq!(spec.window_area(), 9.0);
    }

    #[test]
    fn horizon_uses_forcing_period_when_forced() {
        let spec = small_spec(11, 4);
        let forced = OscillatorParams::new(1.0, 0.0, 0.0, 0.5, 0.1, 2.0).unwrap();
        assert_eq!(spec.horizon_time(forced), 4.0 * TAU / 2.0);
        let unforced = OscillatorParams::new(1.0, 0.0, 0.0, 0.5, 0.0, 2.0).unwrap();
        assert_eq!(spec.horizon_time(unforced), 4.0 * TAU / 0.5);
    }

    #[test]
    fn classification_examples() {
        let spec = small_spec(11, 8);
        let settings = IntegratorSettings::default();
        // Rest at the centre never leaves.
        assert_eq!(
            classify_initial_condition(params(1.0, 0.0, 0.01, 0.0), 0.0, 0.0, &spec, &settings),
            CellClass::Safe
        );
        // Inside the conservative loop.
        assert_eq!(
            classify_initial_condition(params(1.0, 0.0, 0.0, 0.0), -0.4, 0.0, &spec, &settings),
            CellClass::Safe
        );
        // Outside the loop with positive velocity: over the hill and out.
        assert_eq!(
            classify_initial_condition(params(1.0, 0.0, 0.0, 0.0), 1.5, 0.5, &spec, &settings),
            CellClass::Escaped
        );
    }

    #[test]
    fn conservative_safe_area_matches_loop_area() {
        // With beta = gamma = F = 0 the safe set is the homoclinic loop
        // interior, whose exact area is 6/5 sqrt(delta_hat).
        let spec = small_spec(61, 16);
        let area = safe_basin_area(params(1.0, 0.0, 0.0, 0.0), &spec, &IntegratorSettings::default());
        assert!(
            (area - 1.2).abs() < 0.15,
            "raster area {area} vs loop area 1.2"
        );
    }

    #[test]
    fn raster_is_deterministic_across_worker_counts() {
        let spec = small_spec(21, 4);
        let p = params(1.0, 0.0, 0.1, 0.06);
        let settings = IntegratorSettings::default();
        let one = with_worker_pool(1, || basin_raster(p, &spec, &settings));
        let four = with_worker_pool(4, || basin_raster(p, &spec, &settings));
        assert_eq!(one.cells(), four.cells());
        assert_eq!(one.integration_failures, four.integration_failures);
    }

    #[test]
    fn raster_indexing_and_counts_are_consistent() {
        let spec = small_spec(15, 4);
        let p = params(1.0, 0.0, 0.1, 0.05);
        let raster = basin_raster(p, &spec, &IntegratorSettings::default());
        let mut safe = 0;
        for iy in 0..spec.ny {
            for ix in 0..spec.nx {
                if raster.cell(ix, iy) == CellClass::Safe {
                    safe += 1;
                }
            }
        }
        assert_eq!(safe, raster.safe_count());
        assert!(raster.safe_count() > 0, "the well centre should be safe");
        assert!(
            raster.safe_count() < spec.nx * spec.ny,
            "far corners should escape"
        );
    }

    #[test]
    fn integrity_curve_starts_at_unity_without_modulation() {
        let spec = small_spec(31, 4);
        let p = params(1.0, 0.0, 0.1, 0.0);
        let curve = integrity_curve(p, &[0.0, 0.05], &spec, &IntegratorSettings::default());
        assert!(curve.baseline_area > 0.0);
        // F = 0 with gamma = 0 repeats the baseline computation exactly.
        assert_eq!(curve.points[0], (0.0, 1.0));
        // Weak forcing perturbs the boundary by at most a few cells in
        // either direction.
        let (_, a) = curve.points[1];
        assert!(a.is_finite() && a > 0.5 && a < 1.5, "normalized area {a}");
    }

    #[test]
    fn cliff_interpolates_the_half_area_crossing() {
        let curve = IntegrityCurve {
            baseline_area: 1.0,
            points: vec![(0.0, 1.0), (0.1, 0.8), (0.2, 0.2)],
        };
        let cliff = curve.cliff().unwrap();
        assert!((cliff - 0.15).abs() < 1e-12, "cliff {cliff}");

        let no_cliff = IntegrityCurve {
            baseline_area: 1.0,
            points: vec![(0.0, 1.0), (0.1, 0.9)],
        };
        assert_eq!(no_cliff.cliff(), None);

        let instant = IntegrityCurve {
            baseline_area: 1.0,
            points: vec![(0.05, 0.3)],
        };
        assert_eq!(instant.cliff(), Some(0.05));
    }
}
