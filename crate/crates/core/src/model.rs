//! Right-hand sides of the oscillator and of its periodic linearizations.
//!
//! Two clocks are in play and each function documents its own:
//!
//! * [`rhs_full`] integrates the nonlinear equation in **physical time** t.
//! * [`rhs_linearized_origin`] / [`rhs_linearized_saddle`] use the
//!   **mass-normalized time** (physical time multiplied by omega_m), in
//!   which the periodic coefficients have period exactly 2*pi. Stability
//!   conclusions are unaffected by the rescaling; callers must not mix
//!   clocks.

use crate::params::{OscillatorParams, State};

/// Instantaneous mass m(t) = 1/delta_hat + gamma*sin(omega_m t)
/// (physical time). Strictly positive under the parameter invariants.
pub fn mass(params: OscillatorParams, t: f64) -> f64 {
    1.0 / params.delta_hat + params.gamma * (params.omega_m * t).sin()
}

/// Full nonlinear right-hand side in physical time:
///
///   x' = y,
///   y' = [ -(x - x^2) - (beta + gamma*omega_m*cos(omega_m t)) y
///          + F sin(omega_f t) ] / m(t).
///
/// Equivalent to multiplying through by delta_hat/(1 + gamma*delta_hat*
/// sin(omega_m t)); dividing by the mass is better conditioned near the
/// mass-positivity boundary.
pub fn rhs_full(params: OscillatorParams, s: State) -> (f64, f64) {
    let m = mass(params, s.t);
    let damping = params.beta + params.gamma * params.omega_m * (params.omega_m * s.t).cos();
    let forcing = params.f_amp * (params.omega_f * s.t).sin();
    let stiffness = s.x - s.x * s.x;
    (s.y, (-stiffness - damping * s.y + forcing) / m)
}

/// Linearization about the centre (0, 0), in mass-normalized time
/// (coefficient period 2*pi):
///
///   v1' = v2,
///   v2' = -[delta_hat/omega_m^2] v1 / (1 + gamma*delta_hat*sin t)
///         - delta_hat [beta/omega_m + gamma*cos t] v2
///           / (1 + gamma*delta_hat*sin t).
pub fn rhs_linearized_origin(params: OscillatorParams, t: f64, v: (f64, f64)) -> (f64, f64) {
    let denom = 1.0 + params.gamma * params.delta_hat * t.sin();
    let stiffness = -params.delta_hat / (params.omega_m * params.omega_m) / denom;
    let damping = -params.delta_hat * (params.beta / params.omega_m + params.gamma * t.cos()) / denom;
    (v.1, stiffness * v.0 + damping * v.1)
}

/// Linearization about the saddle (1, 0), in mass-normalized time.
/// Identical to [`rhs_linearized_origin`] except the stiffness term has
/// the opposite sign (the saddle sits on the hilltop of the potential).
pub fn rhs_linearized_saddle(params: OscillatorParams, t: f64, v: (f64, f64)) -> (f64, f64) {
    let denom = 1.0 + params.gamma * params.delta_hat * t.sin();
    let stiffness = params.delta_hat / (params.omega_m * params.omega_m) / denom;
    let damping = -params.delta_hat * (params.beta / params.omega_m + params.gamma * t.cos()) / denom;
    (v.1, stiffness * v.0 + damping * v.1)
}

/// Conserved energy of the frozen, undamped, unforced well
/// x'' + x - x^2 = 0 (unit mass): E = y^2/2 + x^2/2 - x^3/3.
/// The saddle level is E = 1/6; the open homoclinic loop encloses
/// E < 1/6 with x in [-1/2, 1].
pub fn well_energy(x: f64, y: f64) -> f64 {
    0.5 * y * y + 0.5 * x * x - x * x * x / 3.0
}

/// Selects one of the three right-hand sides; handy for front ends that
/// pick the system at run time. `Full` runs in physical time, the
/// linearized variants in mass-normalized time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    Full,
    LinearizedOrigin,
    LinearizedSaddle,
}

impl RhsKind {
    pub fn eval(self, params: OscillatorParams, t: f64, v: (f64, f64)) -> (f64, f64) {
        match self {
            RhsKind::Full => rhs_full(params, State::new(t, v.0, v.1)),
            RhsKind::LinearizedOrigin => rhs_linearized_origin(params, t, v),
            RhsKind::LinearizedSaddle => rhs_linearized_saddle(params, t, v),
        }
    }
}

impl std::fmt::Display for RhsKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RhsKind::Full => "full",
            RhsKind::LinearizedOrigin => "linearized-origin",
            RhsKind::LinearizedSaddle => "linearized-saddle",
        })
    }
}

impl std::str::FromStr for RhsKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(RhsKind::Full),
            "linearized-origin" => Ok(RhsKind::LinearizedOrigin),
            "linearized-saddle" => Ok(RhsKind::LinearizedSaddle),
            other => Err(format!(
                "unknown rhs kind {other:?} (expected full, linearized-origin or linearized-saddle)"
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn params(delta_hat: f64, gamma: f64, beta: f64, omega_m: f64) -> OscillatorParams {
        OscillatorParams::new(delta_hat, gamma, beta, omega_m, 0.0, 1.0).unwrap()
    }

    #[test]
    fn mass_examples() {
        assert_eq!(mass(params(0.5, 0.1, 0.0, 1.0), 0.0), 2.0);
        assert_relative_eq!(
            mass(params(0.5, 0.1, 0.0, 1.0), FRAC_PI_2),
            2.1,
            max_relative = 1e-15
        );
        assert_eq!(mass(params(1.0, 0.0, 0.0, 1.0), 123.456), 1.0);
    }

    #[test]
    fn full_rhs_fixed_points_for_all_gamma_beta() {
        // With F = 0 both equilibria must be exact for every gamma, beta, t:
        // y = 0 kills the velocity terms and x - x^2 vanishes at 0 and 1.
        for &(g, b) in &[(0.0, 0.0), (0.3, 0.0), (0.0, 0.5), (0.45, 0.02)] {
            let p = params(2.0, g, b, 1.3);
            for &t in &[0.0, 0.7, PI, 4.0, 100.0] {
                assert_eq!(rhs_full(p, State::new(t, 0.0, 0.0)), (0.0, 0.0));
                assert_eq!(rhs_full(p, State::new(t, 1.0, 0.0)), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn full_rhs_hand_evaluated_at_t_zero() {
        // At t = 0 the mass is 1/delta_hat and cos(omega_m t) = 1.
        let p = params(1.0, 0.2, 0.01, 1.0);
        let (dx, dy) = rhs_full(p, State::new(0.0, 0.5, 0.1));
        assert_eq!(dx, 0.1);
        assert_relative_eq!(dy, -0.25 - (0.01 + 0.2) * 0.1, max_relative = 1e-15);
    }

    #[test]
    fn linearized_origin_examples() {
        // Constant-coefficient limit: stiffness column is -delta_hat/omega_m^2.
        let p = params(0.3, 0.0, 0.0, 2.0);
        let (a, b) = rhs_linearized_origin(p, 0.9, (1.0, 0.0));
        assert_eq!(a, 0.0);
        assert_relative_eq!(b, -0.3 / 4.0, max_relative = 1e-15);

        assert_eq!(
            rhs_linearized_origin(params(0.7, 0.2, 0.05, 1.1), 2.3, (0.0, 0.0)),
            (0.0, 0.0)
        );

        let p = params(0.25, 0.1, 0.0, 1.0);
        let (a, b) = rhs_linearized_origin(p, 0.0, (0.0, 1.0));
        assert_eq!(a, 1.0);
        assert_relative_eq!(b, -0.025, max_relative = 1e-15);
    }

    #[test]
    fn linearized_saddle_examples() {
        let p = params(0.3, 0.0, 0.0, 2.0);
        let (_, b) = rhs_linearized_saddle(p, 0.0, (1.0, 0.0));
        assert_relative_eq!(b, 0.3 / 4.0, max_relative = 1e-15);

        // At t = pi/2 the denominator is 1 + gamma*delta_hat.
        let p = params(1.0, 0.1, 0.0, 1.0);
        let (a, b) = rhs_linearized_saddle(p, FRAC_PI_2, (1.0, 0.0));
        assert_eq!(a, 0.0);
        assert_relative_eq!(b, 1.0 / 1.1, max_relative = 1e-12);
    }

    #[test]
    fn linearized_rhs_is_linear_in_v() {
        let p = params(0.5, 0.25, 0.03, 0.8);
        let cases = [
            ((1.0, 0.0), (0.0, 1.0), 0.37, -1.4),
            ((0.2, -0.7), (-1.3, 0.45), -2.0, 0.6),
        ];
        for &(u, v, a, b) in &cases {
            for t in [0.0, 0.31, 2.0, 5.9] {
                let lhs = rhs_linearized_origin(p, t, (a * u.0 + b * v.0, a * u.1 + b * v.1));
                let fu = rhs_linearized_origin(p, t, u);
                let fv = rhs_linearized_origin(p, t, v);
                assert_relative_eq!(lhs.0, a * fu.0 + b * fv.0, max_relative = 1e-13, epsilon = 1e-15);
                assert_relative_eq!(lhs.1, a * fu.1 + b * fv.1, max_relative = 1e-13, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn well_energy_levels() {
        assert_eq!(well_energy(0.0, 0.0), 0.0);
        // Saddle level.
        assert_relative_eq!(well_energy(1.0, 0.0), 1.0 / 6.0, max_relative = 1e-15);
        // Left turning point of the homoclinic loop.
        assert_relative_eq!(well_energy(-0.5, 0.0), 1.0 / 6.0, max_relative = 1e-13);
    }
}
