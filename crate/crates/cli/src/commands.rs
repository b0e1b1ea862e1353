//! One function per subcommand. Each validates its section of the
//! configuration (exit 2 on violation), runs the corresponding library
//! operation (exit 3 on numerical failure) and writes artifacts into the
//! output directory.

use crate::config::{linspace, RunConfig};
use crate::output::{
    ensure_dir, fmt_full, fmt_g, svg_line_chart, write_lines, write_pgm, write_text,
};
use crate::CliError;
use parastab_core::basin::{basin_raster, integrity_curve, with_worker_pool, BasinGridSpec};
use parastab_core::floquet::monodromy_origin;
use parastab_core::hill::{damped_first_tongue, solve_transition_curve, DeterminantFamily};
use parastab_core::melnikov::{
    default_quadrature_window, erosion_shift_sign, forcing_threshold, melnikov_closed,
    melnikov_quadrature,
};
use parastab_core::verify;
use parastab_core::{integrate, IntegratorSettings, RhsKind, State};
use std::path::{Path, PathBuf};

fn config_check(ok: bool, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Config(message.to_string()))
    }
}

fn grid_check(name: &str, min: f64, max: f64, steps: usize) -> Result<(), CliError> {
    config_check(
        min.is_finite() && max.is_finite() && (steps <= 1 || max > min) && steps >= 1,
        &format!("{name} grid needs finite bounds, max > min and at least one step"),
    )
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf, CliError> {
    let dir = Path::new(&cfg.out_dir);
    ensure_dir(dir)?;
    Ok(dir.join(name))
}

pub fn trajectory(cfg: &RunConfig) -> Result<(), CliError> {
    let t = &cfg.trajectory;
    let params = cfg.oscillator()?;
    let kind: RhsKind = t.rhs.parse().map_err(CliError::Config)?;
    config_check(
        t.t_end.is_finite() && t.t_end > 0.0,
        "trajectory t_end must be positive and finite",
    )?;
    config_check(
        t.x0.is_finite() && t.y0.is_finite(),
        "trajectory initial condition must be finite",
    )?;
    let settings = IntegratorSettings::with_tolerances(t.rel_tol, t.abs_tol);
    let traj = integrate(
        |time, v| kind.eval(params, time, v),
        State::new(0.0, t.x0, t.y0),
        t.t_end,
        &settings,
    )
    .map_err(|e| CliError::Numeric(e.to_string()))?;

    let mut lines = Vec::with_capacity(traj.states().len() + 1);
    lines.push("t,x,y".to_string());
    for s in traj.states() {
        lines.push(format!("{},{},{}", fmt_full(s.t), fmt_full(s.x), fmt_full(s.y)));
    }
    let path = out_path(cfg, "trajectory.csv")?;
    write_lines(&path, &lines)?;
    println!(
        "wrote {} ({} samples of the {} system over t = 0..{})",
        path.display(),
        traj.states().len(),
        kind,
        fmt_g(t.t_end)
    );
    Ok(())
}

pub fn tongues(cfg: &RunConfig) -> Result<(), CliError> {
    let t = &cfg.tongues;
    config_check(t.k_max >= 1, "tongues k_max must be at least 1")?;
    config_check(t.gamma_min >= 0.0, "tongues gamma_min must be non-negative")?;
    grid_check("tongues gamma", t.gamma_min, t.gamma_max, t.gamma_steps)?;
    config_check(t.tol > 0.0, "tongues tol must be positive")?;
    config_check(
        t.truncation >= 2 * t.k_max + 6,
        &format!(
            "tongues truncation {} too small for k_max {} (need at least {})",
            t.truncation,
            t.k_max,
            2 * t.k_max + 6
        ),
    )?;
    let gammas = linspace(t.gamma_min, t.gamma_max, t.gamma_steps);

    let mut lines = vec!["family,k,gamma,delta_hat".to_string()];
    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    let mut failures = 0usize;
    for k in 1..=t.k_max {
        for family in [DeterminantFamily::OddCosine, DeterminantFamily::OddSine] {
            let mut pts = Vec::with_capacity(gammas.len());
            for &g in &gammas {
                match solve_transition_curve(family, k, g, cfg.omega_m, t.truncation, t.tol) {
                    Ok(d) => {
                        lines.push(format!("{family},{k},{},{}", fmt_g(g), fmt_g(d)));
                        pts.push((g, d));
                    }
                    Err(e) => {
                        // Gap marker: the delta_hat field is left empty so
                        // the row count still covers the whole grid.
                        failures += 1;
                        eprintln!("warning: {e}");
                        lines.push(format!("{family},{k},{},", fmt_g(g)));
                        pts.push((g, f64::NAN));
                    }
                }
            }
            series.push((format!("{family} k={k}"), pts));
        }
    }
    if t.overlay_damped {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for &g in &gammas {
            if let Some((lo, hi)) = damped_first_tongue(g, cfg.beta, cfg.omega_m) {
                lines.push(format!("damped-lower,1,{},{}", fmt_g(g), fmt_g(lo)));
                lines.push(format!("damped-upper,1,{},{}", fmt_g(g), fmt_g(hi)));
                lower.push((g, lo));
                upper.push((g, hi));
            }
        }
        series.push(("damped lower".to_string(), lower));
        series.push(("damped upper".to_string(), upper));
    }

    let path = out_path(cfg, "tongues.csv")?;
    write_lines(&path, &lines)?;
    println!("wrote {} ({} boundary rows)", path.display(), lines.len() - 1);
    if t.svg {
        let svg = svg_line_chart("Parametric resonance tongues", "gamma", "delta_hat", &series);
        let svg_path = out_path(cfg, "tongues.svg")?;
        write_text(&svg_path, &svg)?;
        println!("wrote {}", svg_path.display());
    }
    if failures > 0 {
        return Err(CliError::Numeric(format!(
            "{failures} grid points had no bracketed root; gaps marked in the CSV"
        )));
    }
    Ok(())
}

pub fn floquet_map(cfg: &RunConfig) -> Result<(), CliError> {
    let m = &cfg.floquet_map;
    grid_check("floquet-map gamma", m.gamma_min, m.gamma_max, m.gamma_steps)?;
    grid_check("floquet-map delta", m.delta_min, m.delta_max, m.delta_steps)?;
    config_check(m.gamma_min >= 0.0, "floquet-map gamma_min must be non-negative")?;
    config_check(m.delta_min > 0.0, "floquet-map delta_min must be positive")?;
    config_check(
        m.gamma_max * m.delta_max < 1.0,
        "floquet-map grid corner violates mass positivity (gamma_max * delta_max must stay below 1)",
    )?;
    let settings = IntegratorSettings::with_tolerances(m.rel_tol, m.abs_tol);
    let gammas = linspace(m.gamma_min, m.gamma_max, m.gamma_steps);
    let deltas = linspace(m.delta_min, m.delta_max, m.delta_steps);

    let mut lines = vec!["gamma,delta_hat,max_abs_multiplier,class".to_string()];
    for &g in &gammas {
        for &d in &deltas {
            let params =
                parastab_core::OscillatorParams::new(d, g, cfg.beta, cfg.omega_m, 0.0, cfg.omega_f)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            let mono =
                monodromy_origin(params, &settings).map_err(|e| CliError::Numeric(e.to_string()))?;
            lines.push(format!(
                "{},{},{},{}",
                fmt_g(g),
                fmt_g(d),
                fmt_g(mono.max_abs_multiplier()),
                mono.classification
            ));
        }
    }
    let path = out_path(cfg, "floquet-map.csv")?;
    write_lines(&path, &lines)?;
    println!(
        "wrote {} ({} x {} grid)",
        path.display(),
        gammas.len(),
        deltas.len()
    );
    Ok(())
}

pub fn melnikov(cfg: &RunConfig) -> Result<(), CliError> {
    let m = &cfg.melnikov;
    config_check(m.t0.is_finite(), "melnikov t0 must be finite")?;
    let params = cfg.oscillator()?;
    let ev = melnikov_closed(params, m.t0);
    println!(
        "Homoclinic distance at t0 = {} (delta_hat={}, gamma={}, beta={}, omega_m={}, F={}, omega_f={})",
        fmt_g(ev.t0),
        fmt_g(cfg.delta_hat),
        fmt_g(cfg.gamma),
        fmt_g(cfg.beta),
        fmt_g(cfg.omega_m),
        fmt_g(cfg.f_amp),
        fmt_g(cfg.omega_f)
    );
    println!("  forcing term : {}", fmt_g(ev.forcing_term));
    println!("  damping term : {}", fmt_g(ev.damping_term));
    println!("  mass term    : {}", fmt_g(ev.mass_term));
    println!("  M(t0)        : {}", fmt_g(ev.value));
    println!(
        "  mass-modulation shift: {}",
        erosion_shift_sign(cfg.delta_hat, cfg.omega_m)
    );
    if m.quadrature {
        config_check(m.quad_tol > 0.0, "melnikov quad_tol must be positive")?;
        let q = melnikov_quadrature(
            params,
            m.t0,
            default_quadrature_window(cfg.delta_hat),
            m.quad_tol,
        )
        .map_err(|e| CliError::Numeric(e.to_string()))?;
        println!(
            "  quadrature   : {} (deviation {})",
            fmt_g(q),
            fmt_g((q - ev.value).abs())
        );
    }
    Ok(())
}

pub fn thresholds(cfg: &RunConfig) -> Result<(), CliError> {
    let t = &cfg.thresholds;
    config_check(t.gamma_min >= 0.0, "thresholds gamma_min must be non-negative")?;
    grid_check("thresholds gamma", t.gamma_min, t.gamma_max, t.gamma_steps)?;
    config_check(!t.omega_f_values.is_empty(), "thresholds needs at least one omega_f")?;
    config_check(
        t.omega_f_values.iter().all(|w| w.is_finite() && *w > 0.0),
        "thresholds omega_f values must be positive and finite",
    )?;
    let gammas = linspace(t.gamma_min, t.gamma_max, t.gamma_steps);

    let mut lines = vec!["gamma,omega_f,f_threshold".to_string()];
    for &g in &gammas {
        for &wf in &t.omega_f_values {
            let params =
                parastab_core::OscillatorParams::new(cfg.delta_hat, g, cfg.beta, cfg.omega_m, 0.0, wf)
                    .map_err(|e| CliError::Config(e.to_string()))?;
            let f = forcing_threshold(params, t.quadrature_check)
                .map_err(|e| CliError::Numeric(e.to_string()))?;
            lines.push(format!("{},{},{}", fmt_g(g), fmt_g(wf), fmt_g(f)));
        }
    }
    let path = out_path(cfg, "thresholds.csv")?;
    write_lines(&path, &lines)?;
    println!("wrote {} ({} rows)", path.display(), lines.len() - 1);
    Ok(())
}

fn basin_spec(cfg: &RunConfig) -> Result<(BasinGridSpec, IntegratorSettings), CliError> {
    let b = &cfg.basin;
    config_check(
        b.x_min.is_finite() && b.x_max.is_finite() && b.x_min < b.x_max,
        "basin x window must be a finite non-degenerate interval",
    )?;
    config_check(
        b.y_min.is_finite() && b.y_max.is_finite() && b.y_min < b.y_max,
        "basin y window must be a finite non-degenerate interval",
    )?;
    config_check(b.nx >= 2 && b.ny >= 2, "basin grid needs at least 2x2 points")?;
    config_check(b.horizon_periods >= 1, "basin horizon must cover at least one period")?;
    config_check(
        b.escape_x > 1.0 && b.escape_x.is_finite(),
        "basin escape_x must lie beyond the saddle at x = 1",
    )?;
    let spec = BasinGridSpec {
        x_range: (b.x_min, b.x_max),
        y_range: (b.y_min, b.y_max),
        nx: b.nx,
        ny: b.ny,
        horizon_periods: b.horizon_periods,
        escape_x: b.escape_x,
    };
    Ok((spec, IntegratorSettings::with_tolerances(b.rel_tol, b.abs_tol)))
}

pub fn basin(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.oscillator()?;
    let (spec, settings) = basin_spec(cfg)?;
    let raster = with_worker_pool(cfg.workers, || basin_raster(params, &spec, &settings));

    let pgm_path = out_path(cfg, "basin.pgm")?;
    write_pgm(&pgm_path, &raster)?;
    let mut lines = Vec::with_capacity(spec.nx * spec.ny + 1);
    lines.push("x0,y0,class".to_string());
    for iy in 0..spec.ny {
        for ix in 0..spec.nx {
            lines.push(format!(
                "{},{},{}",
                fmt_g(spec.x_at(ix)),
                fmt_g(spec.y_at(iy)),
                raster.cell(ix, iy)
            ));
        }
    }
    let csv_path = out_path(cfg, "basin.csv")?;
    write_lines(&csv_path, &lines)?;
    println!(
        "wrote {} and {} ({}x{} cells, {} safe, area {}, {} integration failures)",
        pgm_path.display(),
        csv_path.display(),
        spec.nx,
        spec.ny,
        raster.safe_count(),
        fmt_g(raster.safe_area()),
        raster.integration_failures
    );
    Ok(())
}

pub fn integrity(cfg: &RunConfig) -> Result<(), CliError> {
    let i = &cfg.integrity;
    config_check(i.f_min >= 0.0, "integrity f_min must be non-negative")?;
    config_check(i.f_steps >= 2, "integrity needs at least two forcing amplitudes")?;
    grid_check("integrity F", i.f_min, i.f_max, i.f_steps)?;
    config_check(!i.gammas.is_empty(), "integrity needs at least one gamma")?;
    let (spec, settings) = basin_spec(cfg)?;
    let f_values = linspace(i.f_min, i.f_max, i.f_steps);

    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for &g in &i.gammas {
        let params = cfg.oscillator_with_gamma(g)?;
        let curve =
            with_worker_pool(cfg.workers, || integrity_curve(params, &f_values, &spec, &settings));
        let mut lines = vec!["F,normalized_area".to_string()];
        for &(f, a) in &curve.points {
            lines.push(format!("{},{}", fmt_g(f), fmt_g(a)));
        }
        let path = out_path(cfg, &format!("integrity-g{}.csv", fmt_g(g)))?;
        write_lines(&path, &lines)?;
        let cliff = curve
            .cliff()
            .map(fmt_g)
            .unwrap_or_else(|| "none".to_string());
        println!(
            "wrote {} (baseline area {}, cliff {})",
            path.display(),
            fmt_g(curve.baseline_area),
            cliff
        );
        series.push((format!("gamma={}", fmt_g(g)), curve.points.clone()));
    }
    if i.svg {
        let svg = svg_line_chart("Safe-basin integrity", "F", "normalized area", &series);
        let path = out_path(cfg, "integrity.svg")?;
        write_text(&path, &svg)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Runs the cross-check suites; `Ok(true)` when nothing failed
/// (`UNSUPPORTED` counts as not failed).
pub fn verify(cfg: &RunConfig) -> Result<bool, CliError> {
    config_check(cfg.verify.truncation >= 2, "verify truncation must be at least 2")?;
    let reports = verify::run_all(cfg.verify.truncation);
    let mut passed = 0usize;
    let mut failed = 0usize;
    for r in &reports {
        println!("[{}] {}: {}", r.status, r.name, r.detail);
        match r.status {
            parastab_core::verify::CheckStatus::Pass => passed += 1,
            parastab_core::verify::CheckStatus::Fail => failed += 1,
            parastab_core::verify::CheckStatus::Unsupported => {}
        }
    }
    println!(
        "{passed} passed, {failed} failed, {} unsupported",
        reports.len() - passed - failed
    );
    Ok(failed == 0)
}
