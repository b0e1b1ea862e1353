//! Melnikov analysis of the perturbed homoclinic loop.
//!
//! For small damping, forcing and mass modulation the distance between
//! the stable and unstable manifolds of the saddle is proportional to the
//! Melnikov function M(t0). Its zeros signal homoclinic tangency and the
//! onset of transverse intersections, the precursor of basin erosion.
//!
//! Two evaluation paths are provided: a closed form (integrals done
//! analytically) and direct adaptive quadrature of the first-order
//! perturbation integrand. They are derived independently, so their
//! agreement is a strong end-to-end check of both.

use crate::params::OscillatorParams;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MelnikovError {
    #[error("adaptive quadrature did not converge to tol={tol} at t0={t0}")]
    QuadratureNotConverged { t0: f64, tol: f64 },
    #[error(
        "mass modulation is neutral at omega_m^2 = delta_hat = {delta_hat}; \
         its Melnikov contribution vanishes identically and no finite gamma threshold exists"
    )]
    NeutralFrequency { delta_hat: f64 },
    #[error(
        "closed form {closed} and quadrature {quadrature} disagree at t0={t0} \
         beyond the oracle tolerance"
    )]
    QuadratureMismatch {
        t0: f64,
        closed: f64,
        quadrature: f64,
    },
}

/// Homoclinic loop of the unperturbed (gamma = beta = F = 0) oscillator
/// with mean-mass stiffness `delta_hat`, parametrized by time with the
/// loop bottom at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomoclinicOrbit {
    pub delta_hat: f64,
}

impl HomoclinicOrbit {
    pub fn new(delta_hat: f64) -> Self {
        assert!(
            delta_hat > 0.0 && delta_hat.is_finite(),
            "delta_hat must be positive"
        );
        HomoclinicOrbit { delta_hat }
    }

    /// Point (x, y) on the loop at time t. Written with half-angle
    /// sech/tanh factors so large |t| underflows gracefully to the saddle
    /// (1, 0) instead of producing inf/inf.
    pub fn point(&self, t: f64) -> (f64, f64) {
        let sd = self.delta_hat.sqrt();
        let half = 0.5 * sd * t;
        let sech = 1.0 / half.cosh();
        let sech2 = sech * sech;
        let x = 1.0 - 1.5 * sech2;
        let y = 1.5 * sd * half.tanh() * sech2;
        (x, y)
    }
}

/// Convenience free-function form of [`HomoclinicOrbit::point`].
pub fn homoclinic_point(delta_hat: f64, t: f64) -> (f64, f64) {
    HomoclinicOrbit::new(delta_hat).point(t)
}

/// Melnikov function value at phase t0, split into its three physical
/// contributions; `value` is their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MelnikovEvaluation {
    pub t0: f64,
    pub value: f64,
    pub forcing_term: f64,
    pub damping_term: f64,
    pub mass_term: f64,
}

/// Closed-form Melnikov function:
///
///   M(t0) =  6 pi F wf^2 cos(wf t0) / sinh(pi wf / sqrt(dh))
///          - (6/5) beta dh^(3/2)
///          - (3/5) gamma (pi wm^2 / dh) (dh^2 - wm^4) cos(wm t0) / sinh(pi wm / sqrt(dh))
///
/// with dh = delta_hat, wf = omega_f, wm = omega_m. The mass term changes
/// sign at wm^2 = dh, where modulation decouples from the loop at first
/// order.
pub fn melnikov_closed(params: OscillatorParams, t0: f64) -> MelnikovEvaluation {
    let dh = params.delta_hat;
    let sd = dh.sqrt();
    let wf = params.omega_f;
    let wm = params.omega_m;
    let forcing_term =
        6.0 * PI * params.f_amp * wf * wf * (wf * t0).cos() / (PI * wf / sd).sinh();
    let damping_term = -1.2 * params.beta * dh * sd;
    let mass_term = -0.6 * params.gamma * (PI * wm * wm / dh) * (dh * dh - wm.powi(4))
        * (wm * t0).cos()
        / (PI * wm / sd).sinh();
    MelnikovEvaluation {
        t0,
        value: forcing_term + damping_term + mass_term,
        forcing_term,
        damping_term,
        mass_term,
    }
}

/// Window half-width after which the homoclinic integrand has decayed to
/// the order of 1e-17 of its peak.
pub fn default_quadrature_window(delta_hat: f64) -> f64 {
    40.0 / delta_hat.sqrt()
}

/// First-order perturbation integrand: expanding the full equations of
/// motion in (beta, gamma, F) about the frozen-mass loop gives
///
///   g(x, y, t) = dh F sin(wf t) - dh beta y - dh gamma wm cos(wm t) y
///              + gamma dh^2 sin(wm t) (x - x^2),
///
/// and M(t0) is the integral of y_h(t) g(x_h(t), y_h(t), t + t0).
fn perturbation_integrand(params: OscillatorParams, orbit: &HomoclinicOrbit, t0: f64, t: f64) -> f64 {
    let dh = params.delta_hat;
    let (x, y) = orbit.point(t);
    let ts = t + t0;
    let g = dh * params.f_amp * (params.omega_f * ts).sin()
        - dh * params.beta * y
        - dh * params.gamma * params.omega_m * (params.omega_m * ts).cos() * y
        + params.gamma * dh * dh * (params.omega_m * ts).sin() * (x - x * x);
    y * g
}

/// Direct quadrature of the Melnikov integral over [-window, window]
/// using adaptive Simpson refinement until the local error estimate drops
/// below `tol` (absolute).
pub fn melnikov_quadrature(
    params: OscillatorParams,
    t0: f64,
    window: f64,
    tol: f64,
) -> Result<f64, MelnikovError> {
    assert!(window > 0.0 && window.is_finite(), "window must be positive");
    assert!(tol > 0.0 && tol.is_finite(), "tol must be positive");
    let orbit = HomoclinicOrbit::new(params.delta_hat);
    let f = |t: f64| perturbation_integrand(params, &orbit, t0, t);

    // Seed panels at roughly half an oscillation of the fastest angular
    // rate so the adaptive refinement never sees a deceptively smooth
    // coarse sample of an oscillatory stretch.
    let fastest = params
        .omega_f
        .max(params.omega_m)
        .max(params.delta_hat.sqrt());
    let panels = ((2.0 * window * fastest / PI).ceil() as usize).clamp(16, 4096);
    let mut total = 0.0;
    let panel_tol = tol / panels as f64;
    for i in 0..panels {
        let a = -window + 2.0 * window * i as f64 / panels as f64;
        let b = -window + 2.0 * window * (i + 1) as f64 / panels as f64;
        let fa = f(a);
        let fm = f(0.5 * (a + b));
        let fb = f(b);
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        total += adaptive_simpson(&f, a, b, fa, fm, fb, whole, panel_tol, 48).ok_or(
            MelnikovError::QuadratureNotConverged { t0, tol },
        )?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)] // recursion carries memoized endpoint evaluations
fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Option<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) <= 8.0 * f64::EPSILON * m.abs().max(1.0) {
        return Some(left + right + delta / 15.0);
    }
    if depth == 0 {
        return None;
    }
    let lv = adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
    let rv = adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
    Some(lv + rv)
}

/// Direction in which mass modulation moves the erosion onset relative to
/// the modulation-free oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    /// Onset moves to smaller forcing amplitudes.
    Advance,
    /// First-order mass contribution vanishes (omega_m^2 = delta_hat).
    Neutral,
    /// Onset moves to larger forcing amplitudes.
    Delay,
}

impl std::fmt::Display for ShiftSign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ShiftSign::Advance => "advance",
            ShiftSign::Neutral => "neutral",
            ShiftSign::Delay => "delay",
        })
    }
}

/// Sign rule for the erosion shift: slow modulation (omega_m^2 <
/// delta_hat) delays erosion, fast modulation advances it, following the
/// sign of delta_hat^2 - omega_m^4 in the Melnikov mass term.
pub fn erosion_shift_sign(delta_hat: f64, omega_m: f64) -> ShiftSign {
    let d = delta_hat.powi(2) - omega_m.powi(4);
    if d > 0.0 {
        ShiftSign::Delay
    } else if d < 0.0 {
        ShiftSign::Advance
    } else {
        ShiftSign::Neutral
    }
}

/// Modulation amplitude at which the peak mass contribution balances the
/// damping term, so the Melnikov function regains zeros without forcing:
///
///   gamma* = 2 dh^(5/2) beta sinh(pi wm / sqrt(dh)) / (pi wm^2 |wm^4 - dh^2|).
///
/// Errors with [`MelnikovError::NeutralFrequency`] when omega_m^2 equals
/// delta_hat exactly. The returned value is a first-order estimate and
/// may exceed the mass-positivity bound 1/delta_hat for extreme inputs.
pub fn gamma_threshold(delta_hat: f64, beta: f64, omega_m: f64) -> Result<f64, MelnikovError> {
    if omega_m * omega_m == delta_hat {
        return Err(MelnikovError::NeutralFrequency { delta_hat });
    }
    let sd = delta_hat.sqrt();
    let num = 2.0 * delta_hat * delta_hat * sd * beta * (PI * omega_m / sd).sinh();
    let den = PI * omega_m * omega_m * (omega_m.powi(4) - delta_hat.powi(2)).abs();
    Ok(num / den)
}

/// Smallest forcing amplitude F at which the Melnikov function develops a
/// zero in t0 (homoclinic tangency).
///
/// For incommensurate omega_f/omega_m the phases of the forcing and mass
/// cosines can align arbitrarily well, so the supremum over t0 separates
/// into the sum of the individual amplitudes. For rational ratios p/q
/// (detected up to q = 64) the supremum is taken honestly over one common
/// period by dense scanning plus golden-section refinement, and the
/// threshold is found by bisection in F.
///
/// With `quadrature_check` set, the closed form is cross-validated
/// against direct quadrature at four phases at the computed threshold;
/// disagreement beyond 1e-6 * (1 + |M|) is reported as
/// [`MelnikovError::QuadratureMismatch`].
pub fn forcing_threshold(
    params: OscillatorParams,
    quadrature_check: bool,
) -> Result<f64, MelnikovError> {
    let dh = params.delta_hat;
    let sd = dh.sqrt();
    let wf = params.omega_f;
    let wm = params.omega_m;
    // M(t0) = a_coef * F * cos(wf t0) + mass_coef * cos(wm t0) + damp.
    let a_coef = 6.0 * PI * wf * wf / (PI * wf / sd).sinh();
    let damp = -1.2 * params.beta * dh * sd;
    let mass_coef =
        -0.6 * params.gamma * (PI * wm * wm / dh) * (dh * dh - wm.powi(4)) / (PI * wm / sd).sinh();
    let mass_amp = mass_coef.abs();

    let threshold = if damp + mass_amp >= 0.0 {
        // Mass modulation alone already produces tangencies.
        0.0
    } else {
        let f_aligned = (-damp - mass_amp) / a_coef;
        match rational_ratio(wf / wm) {
            None => f_aligned,
            Some((_, q)) => {
                let sup = |f_amp: f64| {
                    sup_over_phase(a_coef * f_amp, wf, mass_coef, wm, q)
                        + damp
                };
                if sup(f_aligned) >= 0.0 {
                    f_aligned
                } else {
                    let f_anti = (-damp + mass_amp) / a_coef;
                    bisect_increasing(sup, f_aligned, f_anti)
                }
            }
        }
    };

    if quadrature_check && threshold.is_finite() {
        let checked = params
            .with_f_amp(threshold)
            .expect("threshold is a valid forcing amplitude");
        let window = default_quadrature_window(dh);
        for i in 0..4 {
            let t0 = i as f64 * PI / (2.0 * wf);
            let closed = melnikov_closed(checked, t0).value;
            let quad = melnikov_quadrature(checked, t0, window, 1e-10)?;
            if (closed - quad).abs() > 1e-6 * (1.0 + closed.abs()) {
                return Err(MelnikovError::QuadratureMismatch {
                    t0,
                    closed,
                    quadrature: quad,
                });
            }
        }
    }
    Ok(threshold)
}

/// Best rational approximation p/q to `r` with q <= 64, accepted only if
/// it matches to 1e-9; computed by the continued-fraction convergents.
fn rational_ratio(r: f64) -> Option<(u64, u64)> {
    if !r.is_finite() || r <= 0.0 {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (1u64, 0u64, 0u64, 1u64);
    let mut x = r;
    for _ in 0..40 {
        let a = x.floor();
        if a >= u64::MAX as f64 {
            return None;
        }
        let a_int = a as u64;
        let p2 = a_int.checked_mul(p0)?.checked_add(p1)?;
        let q2 = a_int.checked_mul(q0)?.checked_add(q1)?;
        if q2 > 64 {
            return None;
        }
        p1 = p0;
        q1 = q0;
        p0 = p2;
        q0 = q2;
        if p0 > 0 && (r - p0 as f64 / q0 as f64).abs() <= 1e-9 * r.max(1.0) {
            return Some((p0, q0));
        }
        let frac = x - a;
        if frac < 1e-12 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

/// Supremum over t0 of A cos(wf t0) + B cos(wm t0) for commensurate
/// frequencies with common period 2 pi q / wm: dense scan, then
/// golden-section refinement of every scanned local maximum.
fn sup_over_phase(a: f64, wf: f64, b: f64, wm: f64, q: u64) -> f64 {
    let h = |t0: f64| a * (wf * t0).cos() + b * (wm * t0).cos();
    let period = TAU * q as f64 / wm;
    let n = (1024 * q as usize).min(1 << 20);
    let step = period / n as f64;
    let values: Vec<f64> = (0..n).map(|i| h(i as f64 * step)).collect();
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let prev = values[(i + n - 1) % n];
        let next = values[(i + 1) % n];
        if values[i] >= prev && values[i] >= next {
            let centre = i as f64 * step;
            let refined = golden_max(&h, centre - step, centre + step);
            if refined > best {
                best = refined;
            }
        }
    }
    best
}

/// Golden-section search for the maximum of f on [a, b]; returns the
/// maximal value.
fn golden_max(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(0.5 * (lo + hi)))
}

/// Bisection for the root of an increasing function g with g(lo) <= 0 <=
/// g(hi), polished by one secant step on the final bracket.
fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo);
    if glo >= 0.0 {
        return lo;
    }
    let mut ghi = g(hi);
    if ghi <= 0.0 {
        return hi;
    }
    for _ in 0..100 {
        if hi - lo <= 1e-13 * hi.abs().max(1e-300) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm < 0.0 {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    if ghi > glo {
        let s = lo - glo * (hi - lo) / (ghi - glo);
        if s >= lo && s <= hi {
            return s;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(
        delta_hat: f64,
        gamma: f64,
        beta: f64,
        omega_m: f64,
        f_amp: f64,
        omega_f: f64,
    ) -> OscillatorParams {
        OscillatorParams::new(delta_hat, gamma, beta, omega_m, f_amp, omega_f).unwrap()
    }

    #[test]
    fn homoclinic_loop_geometry() {
        // Bottom of the loop and the saddle limits.
        assert_eq!(homoclinic_point(1.0, 0.0), (-0.5, 0.0));
        let (x, y) = homoclinic_point(1.0, 800.0);
        assert_eq!((x, y), (1.0, 0.0));
        let (x, y) = homoclinic_point(0.09, -5000.0);
        assert_eq!((x, y), (1.0, 0.0));
        // Symmetry: x even, y odd in t.
        let (xp, yp) = homoclinic_point(0.7, 1.3);
        let (xm, ym) = homoclinic_point(0.7, -1.3);
        assert_eq!(xp, xm);
        assert_eq!(yp, -ym);
    }

    #[test]
    fn homoclinic_velocity_is_position_derivative() {
        let orbit = HomoclinicOrbit::new(1.7);
        let h = 1e-6;
        for &t in &[0.3, 1.0, 2.5] {
            let (_, y) = orbit.point(t);
            let (xp, _) = orbit.point(t + h);
            let (xm, _) = orbit.point(t - h);
            assert_relative_eq!(y, (xp - xm) / (2.0 * h), epsilon = 1e-8);
        }
    }

    #[test]
    fn homoclinic_loop_lies_on_separatrix_energy() {
        // y^2/2 + dh (x^2/2 - x^3/3) = dh/6 along the loop.
        let dh = 0.6;
        let orbit = HomoclinicOrbit::new(dh);
        for &t in &[0.0, 0.5, 1.0, 3.0, 7.0] {
            let (x, y) = orbit.point(t);
            let e = 0.5 * y * y + dh * (0.5 * x * x - x * x * x / 3.0);
            assert_relative_eq!(e, dh / 6.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_form_terms() {
        // Pure damping: constant negative value.
        let p = params(0.7, 0.0, 0.02, 1.0, 0.0, 1.0);
        let m = melnikov_closed(p, 1.3);
        assert_relative_eq!(m.value, -1.2 * 0.02 * 0.7f64.powf(1.5), epsilon = 1e-15);
        assert_eq!(m.forcing_term, 0.0);
        assert_eq!(m.mass_term, 0.0);

        // Neutral mass frequency: the term vanishes exactly, including at
        // non-unit stiffness.
        let p = params(4.0, 0.2, 0.0, 2.0, 0.0, 1.0);
        for &t0 in &[0.0, 0.4, 2.0] {
            assert_eq!(melnikov_closed(p, t0).mass_term, 0.0);
            assert_eq!(melnikov_closed(p, t0).value, 0.0);
        }

        // Component sum identity.
        let p = params(0.25, 0.04, 0.01, 1.0, 0.05, 0.85);
        let m = melnikov_closed(p, 0.7);
        assert_eq!(m.value, m.forcing_term + m.damping_term + m.mass_term);
    }

    #[test]
    fn closed_form_is_periodic_in_phase() {
        let p = params(0.5, 0.1, 0.01, 1.0, 0.08, 1.0);
        // omega_f = omega_m = 1: common period 2 pi.
        for &t0 in &[0.0, 0.9, 2.2] {
            assert_relative_eq!(
                melnikov_closed(p, t0).value,
                melnikov_closed(p, t0 + TAU).value,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn quadrature_matches_pure_damping() {
        let p = params(0.7, 0.0, 0.02, 1.0, 0.0, 1.0);
        let q = melnikov_quadrature(p, 0.0, default_quadrature_window(0.7), 1e-12).unwrap();
        assert_relative_eq!(q, -1.2 * 0.02 * 0.7f64.powf(1.5), epsilon = 1e-10);
    }

    #[test]
    fn quadrature_sees_neutral_mass_frequency() {
        let p = params(1.0, 0.2, 0.0, 1.0, 0.0, 1.0);
        for &t0 in &[0.0, 0.5, 2.0] {
            let q = melnikov_quadrature(p, t0, default_quadrature_window(1.0), 1e-12).unwrap();
            assert!(q.abs() < 1e-9, "expected neutral quadrature, got {q}");
        }
    }

    #[test]
    fn quadrature_agrees_with_closed_form() {
        let cases = [
            params(0.25, 0.0, 0.01, 1.0, 0.03, 1.0),
            params(0.25, 0.04, 0.01, 1.0, 0.05, 0.85),
            params(1.5, 0.2, 0.05, 0.7, 0.1, 1.3),
        ];
        for p in cases {
            for &t0 in &[0.0, 1.1] {
                let closed = melnikov_closed(p, t0).value;
                let quad =
                    melnikov_quadrature(p, t0, default_quadrature_window(p.delta_hat()), 1e-10)
                        .unwrap();
                assert!(
                    (closed - quad).abs() <= 1e-6 * (1.0 + closed.abs()),
                    "closed {closed} vs quadrature {quad}"
                );
            }
        }
    }

    #[test]
    fn melnikov_is_affine_in_amplitudes() {
        let base = params(0.4, 0.1, 0.03, 0.9, 0.06, 1.1);
        let v = |f_amp: f64| {
            melnikov_closed(base.with_f_amp(f_amp).unwrap(), 0.8).value
        };
        assert_relative_eq!(v(0.2) - v(0.1), v(0.1) - v(0.0), epsilon = 1e-14);
        let w = |gamma: f64| {
            melnikov_closed(base.with_gamma(gamma).unwrap(), 0.8).value
        };
        assert_relative_eq!(w(0.2) - w(0.1), w(0.1) - w(0.0), epsilon = 1e-14);
    }

    #[test]
    fn gamma_threshold_reference_values() {
        let g = gamma_threshold(0.25, 0.01, 1.0).unwrap();
        assert!((g - 0.05681).abs() < 1e-4, "gamma threshold {g}");
        // Proportional to beta.
        let ratio = gamma_threshold(1.0, 0.02, std::f64::consts::PI).unwrap() / 0.02;
        let ratio2 = gamma_threshold(1.0, 0.07, std::f64::consts::PI).unwrap() / 0.07;
        assert_relative_eq!(ratio, ratio2, max_relative = 1e-12);
        assert!((ratio - 6.467).abs() < 5e-3, "beta ratio {ratio}");
    }

    #[test]
    fn gamma_threshold_neutral_frequency_errors() {
        assert_eq!(
            gamma_threshold(1.0, 0.01, 1.0).unwrap_err(),
            MelnikovError::NeutralFrequency { delta_hat: 1.0 }
        );
        assert_eq!(
            gamma_threshold(4.0, 0.01, 2.0).unwrap_err(),
            MelnikovError::NeutralFrequency { delta_hat: 4.0 }
        );
        // beta = 0 needs no modulation at all.
        assert_eq!(gamma_threshold(0.25, 0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn forcing_threshold_without_modulation() {
        // gamma = 0: M = A F cos(wf t0) + damp; threshold = -damp / A.
        let p = params(0.25, 0.0, 0.01, 1.0, 0.0, 1.0);
        let f = forcing_threshold(p, false).unwrap();
        let expected = 1.2 * 0.01 * 0.25 * 0.5 * (TAU).sinh() / (6.0 * PI);
        assert_relative_eq!(f, expected, max_relative = 1e-12);
        // At the threshold the best-phase Melnikov value is zero.
        let at = melnikov_closed(p.with_f_amp(f).unwrap(), 0.0).value;
        assert!(at.abs() < 1e-15, "tangency residual {at}");
    }

    #[test]
    fn forcing_threshold_with_modulation_reference() {
        // Reduction linear in gamma while the damping budget lasts.
        let expected = |gamma: f64, wf: f64| {
            let budget = 0.0015 * TAU.sinh() - 2.25 * PI * gamma;
            (budget * (TAU * wf).sinh() / (6.0 * PI * wf * wf * TAU.sinh())).max(0.0)
        };
        for &gamma in &[0.0, 0.02, 0.04] {
            for &wf in &[0.85, 1.0, 1.15] {
                let p = params(0.25, gamma, 0.01, 1.0, 0.0, wf);
                let f = forcing_threshold(p, false).unwrap();
                assert_relative_eq!(f, expected(gamma, wf), max_relative = 1e-9);
            }
        }
        // Beyond the budget the threshold saturates at zero.
        let p = params(0.25, 0.057, 0.01, 1.0, 0.0, 1.0);
        assert_eq!(forcing_threshold(p, false).unwrap(), 0.0);
    }

    #[test]
    fn forcing_threshold_quadrature_check_passes() {
        let p = params(0.25, 0.02, 0.01, 1.0, 0.0, 1.0);
        let unchecked = forcing_threshold(p, false).unwrap();
        let checked = forcing_threshold(p, true).unwrap();
        assert_eq!(unchecked, checked);
    }

    #[test]
    fn forcing_threshold_irrational_ratio_uses_aligned_bound() {
        // wf/wm = sqrt(2): no rational approximation with q <= 64 within
        // 1e-9, so the amplitudes add.
        let wf = std::f64::consts::SQRT_2;
        let p = params(0.25, 0.02, 0.01, 1.0, 0.0, wf);
        let f = forcing_threshold(p, false).unwrap();
        let a_coef = 6.0 * PI * wf * wf / (PI * wf / 0.5).sinh();
        let damp = -1.2 * 0.01 * 0.25 * 0.5;
        let mass_amp = (0.6 * 0.02 * (PI / 0.25) * (0.0625f64 - 1.0) / (PI / 0.5).sinh()).abs();
        assert_relative_eq!(f, (-damp - mass_amp) / a_coef, max_relative = 1e-12);
    }

    #[test]
    fn rational_ratio_detection() {
        assert_eq!(rational_ratio(0.85), Some((17, 20)));
        assert_eq!(rational_ratio(1.0), Some((1, 1)));
        assert_eq!(rational_ratio(1.15), Some((23, 20)));
        assert_eq!(rational_ratio(2.5), Some((5, 2)));
        assert_eq!(rational_ratio(std::f64::consts::SQRT_2), None);
        assert_eq!(rational_ratio(1.0 / 97.0), None);
    }

    #[test]
    fn erosion_shift_sign_rule() {
        assert_eq!(erosion_shift_sign(1.0, 0.85), ShiftSign::Delay);
        assert_eq!(erosion_shift_sign(1.0, 1.15), ShiftSign::Advance);
        assert_eq!(erosion_shift_sign(1.0, 1.0), ShiftSign::Neutral);
        assert_eq!(erosion_shift_sign(4.0, 2.0), ShiftSign::Neutral);
        // Sign is set by delta_hat^2 - omega_m^4.
        for &(dh, wm) in &[(0.5f64, 0.6f64), (2.0, 1.2), (0.3, 1.0), (1.7, 1.5)] {
            let expected = match (dh * dh).partial_cmp(&wm.powi(4)).unwrap() {
                std::cmp::Ordering::Greater => ShiftSign::Delay,
                std::cmp::Ordering::Less => ShiftSign::Advance,
                std::cmp::Ordering::Equal => ShiftSign::Neutral,
            };
            assert_eq!(erosion_shift_sign(dh, wm), expected);
        }
    }
}
