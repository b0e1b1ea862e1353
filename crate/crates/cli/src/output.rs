//! Artifact writers: CSV, portable graymap and a minimal hand-emitted
//! SVG line chart. All formatting is fixed so identical runs produce
//! byte-identical files.

use crate::CliError;
use parastab_core::basin::{BasinRaster, CellClass};
use std::fmt::Write as _;
use std::path::Path;

/// Shortest round-trip decimal representation (Rust's `Display` for
/// `f64`); used for every CSV except full-precision trajectories.
pub fn fmt_g(v: f64) -> String {
    // + 0.0 folds negative zero into plain zero.
    format!("{}", v + 0.0)
}

/// Full double precision, 17 significant digits.
pub fn fmt_full(v: f64) -> String {
    format!("{:.16e}", v + 0.0)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

pub fn write_lines(path: &Path, lines: &[String]) -> Result<(), CliError> {
    let mut text = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        text.push_str(line);
        text.push('\n');
    }
    write_text(path, &text)
}

/// P2 (plain text) graymap: 255 = safe, 0 = escaped. Rows run from the
/// top of the phase-space window downwards, so the image matches a chart
/// with y increasing upwards. Lines stay within the format's 70-column
/// recommendation.
pub fn write_pgm(path: &Path, raster: &BasinRaster) -> Result<(), CliError> {
    let nx = raster.spec.nx;
    let ny = raster.spec.ny;
    let mut text = String::with_capacity(nx * ny * 4 + 32);
    let _ = writeln!(text, "P2");
    let _ = writeln!(text, "{nx} {ny}");
    let _ = writeln!(text, "255");
    for iy in (0..ny).rev() {
        for ix in 0..nx {
            let value = match raster.cell(ix, iy) {
                CellClass::Safe => "255",
                CellClass::Escaped => "0",
            };
            text.push_str(value);
            text.push(if ix % 17 == 16 || ix == nx - 1 { '\n' } else { ' ' });
        }
    }
    write_text(path, &text)
}

const SVG_WIDTH: f64 = 640.0;
const SVG_HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// Minimal single-panel line chart: axes with min/mid/max tick labels
/// and one polyline per named series. Points with non-finite
/// coordinates split the polyline, leaving a gap.
pub fn svg_line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
) -> String {
    let finite: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, pts)| pts.iter().copied())
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1) = bounds(finite.iter().map(|p| p.0));
    let (mut y0, mut y1) = bounds(finite.iter().map(|p| p.1));
    pad_range(&mut x0, &mut x1);
    pad_range(&mut y0, &mut y1);

    let plot_w = SVG_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = SVG_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = move |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = move |y: f64| MARGIN_TOP + plot_h - (y - y0) / (y1 - y0) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SVG_WIDTH}\" height=\"{SVG_HEIGHT}\" \
         viewBox=\"0 0 {SVG_WIDTH} {SVG_HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        escape_xml(title)
    );
    // Axes.
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    );
    let _ = writeln!(
        svg,
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{}\" stroke=\"black\"/>",
        MARGIN_TOP + plot_h
    );
    // Tick labels at min, midpoint and max of each axis.
    for frac in [0.0, 0.5, 1.0] {
        let xv = x0 + (x1 - x0) * frac;
        let yv = y0 + (y1 - y0) * frac;
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            sx(xv),
            MARGIN_TOP + plot_h + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
            MARGIN_LEFT - 6.0,
            sy(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        MARGIN_LEFT + plot_w / 2.0,
        SVG_HEIGHT - 14.0,
        escape_xml(x_label)
    );
    let _ = writeln!(
        svg,
        "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_xml(y_label)
    );
    // Series polylines plus a legend entry each.
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for run in pts.split(|(x, y)| !x.is_finite() || !y.is_finite()) {
            if run.len() < 2 {
                continue;
            }
            let coords: Vec<String> = run
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
                coords.join(" ")
            );
        }
        let ly = MARGIN_TOP + 14.0 * i as f64 + 6.0;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let _ = writeln!(
            svg,
            "  <line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            lx + 18.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{}\" y=\"{}\">{}</text>",
            lx + 24.0,
            ly + 4.0,
            escape_xml(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn pad_range(lo: &mut f64, hi: &mut f64) {
    let span = *hi - *lo;
    if span > 0.0 {
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    } else {
        *lo -= 0.5;
        *hi += 0.5;
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
