//! Floquet analysis of the periodic linearizations: fundamental matrix
//! over one coefficient period, multipliers, and stability class.
//!
//! The linearized systems have 2*pi-periodic coefficients in the
//! mass-normalized clock, so the monodromy matrix is the fundamental
//! solution V(2*pi) with V(0) = I. Its eigenvalues (the Floquet
//! multipliers) decide stability: any multiplier outside the unit circle
//! means the equilibrium of the time-varying linear system is unstable.

use crate::model::{rhs_linearized_origin, rhs_linearized_saddle};
use crate::ode::{drive, IntegratorSettings, OdeError, StepFlow};
use crate::params::OscillatorParams;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Stability class read off the multiplier moduli.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Unstable,
    Marginal,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Stable => "stable",
            Classification::Unstable => "unstable",
            Classification::Marginal => "marginal",
        })
    }
}

/// Fundamental matrix over one period with its spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyResult {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
    pub trace: f64,
    pub det: f64,
    pub multipliers: [Complex64; 2],
    pub classification: Classification,
}

impl MonodromyResult {
    /// Largest multiplier modulus; > 1 signals instability.
    pub fn max_abs_multiplier(&self) -> f64 {
        self.multipliers[0].norm().max(self.multipliers[1].norm())
    }
}

/// Default dead-band separating genuinely marginal multipliers from
/// integration rounding.
pub const DEFAULT_CLASSIFY_MARGIN: f64 = 1e-8;

/// Classifies by the larger multiplier modulus with a +/- `margin`
/// dead band around the unit circle.
pub fn classify(result: &MonodromyResult, margin: f64) -> Classification {
    debug_assert!(margin >= 0.0);
    let rho = result.max_abs_multiplier();
    if rho > 1.0 + margin {
        Classification::Unstable
    } else if rho < 1.0 - margin {
        Classification::Stable
    } else {
        Classification::Marginal
    }
}

/// Eigenvalues of a 2x2 matrix from its trace and determinant via the
/// quadratic formula, with a branch-stable real path (the larger-modulus
/// root is formed without cancellation, the other by Vieta).
fn multipliers_from_trace_det(trace: f64, det: f64) -> [Complex64; 2] {
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        let big = if trace >= 0.0 { half + s } else { half - s };
        let small = if big != 0.0 { det / big } else { half - s };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let s = (-disc).sqrt();
        [Complex64::new(half, s), Complex64::new(half, -s)]
    }
}

fn monodromy_of(
    params: OscillatorParams,
    rhs: impl Fn(OscillatorParams, f64, (f64, f64)) -> (f64, f64),
    settings: &IntegratorSettings,
) -> Result<MonodromyResult, OdeError> {
    // Integrate both columns of V' = A(t) V at once as a 4-dim system;
    // y = [v11, v21, v12, v22] holds the two column vectors.
    let f = |t: f64, y: &[f64; 4]| -> [f64; 4] {
        let c1 = rhs(params, t, (y[0], y[1]));
        let c2 = rhs(params, t, (y[2], y[3]));
        [c1.0, c1.1, c2.0, c2.1]
    };
    let mut v = [1.0, 0.0, 0.0, 1.0];
    drive(f, 0.0, v, TAU, settings, |rec| {
        v = *rec.y1;
        StepFlow::Continue
    })?;
    let (m11, m21, m12, m22) = (v[0], v[1], v[2], v[3]);
    let trace = m11 + m22;
    let det = m11 * m22 - m12 * m21;
    let multipliers = multipliers_from_trace_det(trace, det);
    let mut result = MonodromyResult {
        m11,
        m12,
        m21,
        m22,
        trace,
        det,
        multipliers,
        classification: Classification::Marginal,
    };
    result.classification = classify(&result, DEFAULT_CLASSIFY_MARGIN);
    Ok(result)
}

/// Monodromy matrix of the linearization about the centre (0, 0) over
/// one coefficient period [0, 2*pi] in mass-normalized time.
pub fn monodromy_origin(
    params: OscillatorParams,
    settings: &IntegratorSettings,
) -> Result<MonodromyResult, OdeError> {
    monodromy_of(params, rhs_linearized_origin, settings)
}

/// Monodromy matrix of the linearization about the saddle (1, 0).
pub fn monodromy_saddle(
    params: OscillatorParams,
    settings: &IntegratorSettings,
) -> Result<MonodromyResult, OdeError> {
    monodromy_of(params, rhs_linearized_saddle, settings)
}

/// Closed form for det V(2*pi) of the origin (or saddle) linearization,
/// obtained by integrating the trace of the coefficient matrix over one
/// period (the gamma*cos term integrates to an exact zero):
///
///   det = exp( -beta * delta_hat * 2*pi / (omega_m * sqrt(1 - gamma^2 delta_hat^2)) ).
///
/// Serves as an independent oracle for the integrator (Liouville's
/// formula); equals 1 exactly when beta = 0.
pub fn liouville_determinant(params: OscillatorParams) -> f64 {
    let q = params.gamma * params.delta_hat;
    let exponent =
        -params.beta * params.delta_hat * TAU / (params.omega_m * (1.0 - q * q).sqrt());
    exponent.exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(delta_hat: f64, gamma: f64, beta: f64, omega_m: f64) -> OscillatorParams {
        OscillatorParams::new(delta_hat, gamma, beta, omega_m, 0.0, 1.0).unwrap()
    }

    fn tight() -> IntegratorSettings {
        IntegratorSettings::with_tolerances(1e-11, 1e-13)
    }

    #[test]
    fn constant_coefficient_rotation_monodromy() {
        // gamma = beta = 0 freezes the coefficients: x'' + (delta_hat/
        // omega_m^2) x = 0, whose fundamental matrix over 2*pi is a
        // rotation-like matrix with trace 2 cos(2*pi*w), det 1,
        // w = sqrt(delta_hat)/omega_m.
        let p = params(0.3, 0.0, 0.0, 1.0);
        let m = monodromy_origin(p, &tight()).unwrap();
        let w = 0.3f64.sqrt();
        assert_relative_eq!(m.trace, 2.0 * (TAU * w).cos(), epsilon = 1e-9);
        assert_relative_eq!(m.det, 1.0, epsilon = 1e-10);
        assert_relative_eq!(m.m11, (TAU * w).cos(), epsilon = 1e-9);
        assert_relative_eq!(m.m12, (TAU * w).sin() / w, epsilon = 1e-9);
        assert_relative_eq!(m.m21, -w * (TAU * w).sin(), epsilon = 1e-9);
        assert_eq!(m.classification, Classification::Marginal);
    }

    #[test]
    fn damped_constant_coefficients_are_stable() {
        let p = params(0.3, 0.0, 0.05, 1.0);
        let m = monodromy_origin(p, &tight()).unwrap();
        assert!(m.max_abs_multiplier() < 1.0);
        assert_eq!(m.classification, Classification::Stable);
    }

    #[test]
    fn interior_of_first_tongue_is_unstable() {
        // Centre of the first resonance tongue, above the undamped
        // opening threshold.
        let p = params(0.25, 0.06, 0.0, 1.0);
        let m = monodromy_origin(p, &tight()).unwrap();
        assert_eq!(m.classification, Classification::Unstable);
    }

    #[test]
    fn saddle_hyperbolic_monodromy() {
        let p = params(1.0, 0.0, 0.0, 1.0);
        let m = monodromy_saddle(p, &tight()).unwrap();
        assert_relative_eq!(m.trace, 2.0 * TAU.cosh(), max_relative = 1e-9);
        assert_relative_eq!(m.det, 1.0, epsilon = 1e-7);
        assert_eq!(m.classification, Classification::Unstable);
    }

    #[test]
    fn saddle_is_unstable_across_the_parameter_box() {
        for &delta_hat in &[0.1, 0.5, 1.0, 4.0] {
            for &q in &[0.0, 0.5, 0.9] {
                for &beta in &[0.0, 0.1] {
                    let gamma = q / delta_hat;
                    let p = params(delta_hat, gamma, beta, 1.0);
                    let m = monodromy_saddle(p, &IntegratorSettings::default()).unwrap();
                    assert_eq!(
                        m.classification,
                        Classification::Unstable,
                        "saddle not unstable at delta_hat={delta_hat}, q={q}, beta={beta}"
                    );
                }
            }
        }
    }

    #[test]
    fn saddle_survives_near_vanishing_mass() {
        // gamma*delta_hat just below 1: the coefficients peak sharply but
        // integration must still succeed and classify unstable.
        let p = params(1.0, 0.999, 0.0, 1.0);
        let m = monodromy_saddle(p, &IntegratorSettings::default()).unwrap();
        assert_eq!(m.classification, Classification::Unstable);
    }

    #[test]
    fn classify_examples() {
        let mk = |l1: Complex64, l2: Complex64| MonodromyResult {
            m11: 0.0,
            m12: 0.0,
            m21: 0.0,
            m22: 0.0,
            trace: (l1 + l2).re,
            det: (l1 * l2).re,
            multipliers: [l1, l2],
            classification: Classification::Marginal,
        };
        let r = mk(Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0));
        assert_eq!(classify(&r, 1e-8), Classification::Stable);
        let r = mk(Complex64::new(1.2, 0.0), Complex64::new(1.0 / 1.2, 0.0));
        assert_eq!(classify(&r, 1e-8), Classification::Unstable);
        let (s, c) = (0.3f64.sin(), 0.3f64.cos());
        let r = mk(Complex64::new(c, s), Complex64::new(c, -s));
        assert_eq!(classify(&r, 1e-8), Classification::Marginal);
    }

    #[test]
    fn multipliers_match_trace_and_det() {
        for &(t, d) in &[(3.0, 1.0), (-3.0, 1.0), (0.5, 0.9), (0.0, 2.0), (2.0, 1.0)] {
            let [l1, l2] = multipliers_from_trace_det(t, d);
            assert_relative_eq!((l1 + l2).re, t, epsilon = 1e-12);
            assert_relative_eq!((l1 * l2).re, d, max_relative = 1e-12);
            assert_relative_eq!((l1 + l2).im, 0.0, epsilon = 1e-12);
            assert_relative_eq!((l1 * l2).im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn liouville_identity_holds() {
        for &beta in &[0.0, 0.05, 0.1] {
            let p = params(0.25, 0.3, beta, 1.0);
            let m = monodromy_origin(p, &tight()).unwrap();
            assert_relative_eq!(m.det, liouville_determinant(p), epsilon = 1e-9);
        }
        // beta = 0 gives det = 1 exactly in the closed form.
        assert_eq!(liouville_determinant(params(0.5, 0.4, 0.0, 2.0)), 1.0);
    }
}
