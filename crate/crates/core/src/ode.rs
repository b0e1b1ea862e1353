//! Adaptive Dormand–Prince 5(4) integration with dense output and event
//! location.
//!
//! One embedded explicit pair drives everything in this crate: plain
//! trajectories ([`integrate`]), escape detection for basin scans
//! ([`integrate_until_escape`]), and the 4-dimensional fundamental-matrix
//! systems used by the Floquet module (through the crate-internal
//! [`drive`]). Step-size selection uses the classic PI controller;
//! dense output is cubic Hermite on accepted steps, which matches the
//! order of accuracy needed by event bisection and output sampling.

use crate::model::rhs_full;
use crate::params::{OscillatorParams, State};
use thiserror::Error;

/// Tolerances and step bounds for the adaptive integrator.
///
/// `max_step = f64::INFINITY` disables the step cap; `initial_step = 0`
/// lets the integrator choose a starting step from the local derivative
/// scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            initial_step: 0.0,
        }
    }
}

impl IntegratorSettings {
    /// Convenience constructor for the common case of picking tolerances
    /// and keeping automatic step selection.
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), OdeError> {
        let ok = self.rel_tol.is_finite()
            && self.rel_tol > 0.0
            && self.abs_tol.is_finite()
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && !self.max_step.is_nan()
            && self.initial_step.is_finite()
            && self.initial_step >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(OdeError::InvalidSettings)
        }
    }
}

/// Integration failures.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OdeError {
    #[error("integrator settings violate their invariants (tolerances must be positive, steps non-negative)")]
    InvalidSettings,
    #[error("integration span is empty or reversed: t_end must exceed the initial time")]
    EmptySpan,
    #[error("required step size underflowed at t = {t} (stiffness or a coefficient singularity)")]
    StepSizeUnderflow { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    StepBudgetExceeded { t: f64 },
    #[error("escape threshold must lie beyond the saddle at x = 1, got {0}")]
    BadEscapeThreshold(f64),
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// Difference between the 5th- and embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

// PI step controller constants (standard choices for this pair).
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const MIN_SCALE: f64 = 0.2; // largest allowed shrink factor per step
const MAX_SCALE: f64 = 10.0; // largest allowed growth factor per step
const MAX_STEPS: usize = 50_000_000;

/// One accepted step, handed to the step observer: endpoint times,
/// states and derivatives. Enough for cubic Hermite interpolation
/// anywhere inside the step.
pub(crate) struct StepRecord<'a, const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: &'a [f64; N],
    pub y1: &'a [f64; N],
    pub f0: &'a [f64; N],
    pub f1: &'a [f64; N],
}

impl<const N: usize> StepRecord<'_, N> {
    /// Cubic Hermite interpolant through the step endpoints.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = h00 * self.y0[i] + h10 * h * self.f0[i] + h01 * self.y1[i] + h11 * h * self.f1[i];
        }
        out
    }
}

pub(crate) enum StepFlow {
    Continue,
    Stop,
}

/// Hairer-style automatic initial step: balances the first derivative
/// against an explicit-Euler probe of the second.
fn initial_step_guess<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    t_end: f64,
    settings: &IntegratorSettings,
) -> f64 {
    let span = t_end - t0;
    let hmax = settings.max_step.min(span);
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        let sc = settings.abs_tol + settings.rel_tol * y0[i].abs();
        dnf += (f0[i] / sc) * (f0[i] / sc);
        dny += (y0[i] / sc) * (y0[i] / sc);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(hmax);

    let mut y1 = [0.0; N];
    for i in 0..N {
        y1[i] = y0[i] + h * f0[i];
    }
    let f1 = f(t0 + h, &y1);
    let mut der2 = 0.0;
    for i in 0..N {
        let sc = settings.abs_tol + settings.rel_tol * y0[i].abs();
        der2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(hmax)
}

/// Core adaptive loop. Calls `on_step` after every accepted step; the
/// observer can stop the run early (event located, horizon reached by
/// other means). Returns after reaching `t_end`, an observer stop, or an
/// error.
pub(crate) fn drive<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    settings: &IntegratorSettings,
    mut on_step: impl FnMut(&StepRecord<'_, N>) -> StepFlow,
) -> Result<(), OdeError>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    settings.validate()?;
    if t_end <= t0 || !t0.is_finite() || !t_end.is_finite() {
        return Err(OdeError::EmptySpan);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k0 = f(t, &y); // FSAL carrier
    let mut h = if settings.initial_step > 0.0 {
        settings.initial_step.min(settings.max_step).min(t_end - t0)
    } else {
        initial_step_guess(&f, t0, &y, &k0, t_end, settings)
    };
    let mut facold: f64 = 1e-4;
    let mut rejected = false;

    let mut stages = [[0.0; N]; 7];
    for step in 0..MAX_STEPS {
        if step + 1 == MAX_STEPS {
            return Err(OdeError::StepBudgetExceeded { t });
        }
        let floor = 16.0 * f64::EPSILON * t.abs().max(1.0);
        if h < floor {
            return Err(OdeError::StepSizeUnderflow { t });
        }
        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }

        stages[0] = k0;
        let mut y_stage = [0.0; N];
        for s in 1..6 {
            for i in 0..N {
                let mut acc = 0.0;
                for (j, stage) in stages.iter().enumerate().take(s) {
                    acc += A[s][j] * stage[i];
                }
                y_stage[i] = y[i] + h * acc;
            }
            stages[s] = f(t + C[s] * h, &y_stage);
        }
        // Stage 7's abscissa is the 5th-order solution itself.
        let mut y_new = [0.0; N];
        for i in 0..N {
            let mut acc = 0.0;
            for (j, stage) in stages.iter().enumerate().take(6) {
                acc += A[6][j] * stage[i];
            }
            y_new[i] = y[i] + h * acc;
        }
        let t_new = t + h;
        stages[6] = f(t_new, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, stage) in stages.iter().enumerate() {
                e += E[j] * stage[i];
            }
            e *= h;
            let sc = settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        err = (err / N as f64).sqrt();
        if !err.is_finite() {
            // A stage blew up (NaN/inf): force a strong rejection.
            err = 1e10;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // Accept.
            let rec = StepRecord {
                t0: t,
                t1: t_new,
                y0: &y,
                y1: &y_new,
                f0: &stages[0],
                f1: &stages[6],
            };
            let flow = on_step(&rec);
            t = t_new;
            y = y_new;
            k0 = stages[6];
            if matches!(flow, StepFlow::Stop) || (last && t >= t_end) {
                return Ok(());
            }
            // PI control: the new step uses this step's error and the
            // previous accepted one.
            let fac = (fac11 / facold.powf(BETA) / SAFETY)
                .clamp(1.0 / MAX_SCALE, 1.0 / MIN_SCALE);
            facold = err.max(1e-4);
            let mut h_new = (h / fac).min(settings.max_step);
            if rejected {
                h_new = h_new.min(h);
                rejected = false;
            }
            h = h_new;
        } else {
            // Reject and shrink; never grow right after a rejection.
            h /= (fac11 / SAFETY).min(1.0 / MIN_SCALE);
            rejected = true;
        }
    }
    unreachable!("loop exits via budget check");
}

/// Adaptive solution of a 2-dimensional system from `s0` to `t_end`,
/// keeping every accepted step. The right-hand side receives
/// `(t, (x, y))` and returns `(dx/dt, dy/dt)`.
pub fn integrate<F>(
    rhs: F,
    s0: State,
    t_end: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory, OdeError>
where
    F: Fn(f64, (f64, f64)) -> (f64, f64),
{
    let f = |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let (dx, dy) = rhs(t, (y[0], y[1]));
        [dx, dy]
    };
    let mut states = Vec::new();
    let mut derivs = Vec::new();
    let mut first = true;
    drive(f, s0.t, [s0.x, s0.y], t_end, settings, |rec| {
        if first {
            states.push(State::new(rec.t0, rec.y0[0], rec.y0[1]));
            derivs.push((rec.f0[0], rec.f0[1]));
            first = false;
        }
        states.push(State::new(rec.t1, rec.y1[0], rec.y1[1]));
        derivs.push((rec.f1[0], rec.f1[1]));
        StepFlow::Continue
    })?;
    Ok(Trajectory { states, derivs })
}

/// Time-ordered solution points (one per accepted step, endpoints
/// included) plus the matching derivatives for dense re-sampling.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<State>,
    derivs: Vec<(f64, f64)>,
}

impl Trajectory {
    /// Accepted-step states in strictly increasing time order.
    pub fn states(&self) -> &[State] {
        &self.states
    }

    /// Final state.
    pub fn end(&self) -> State {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Cubic Hermite sample at an arbitrary time inside the solution
    /// span; `None` outside it.
    pub fn sample(&self, t: f64) -> Option<State> {
        let first = self.states.first()?;
        let last = self.states.last()?;
        if t < first.t || t > last.t {
            return None;
        }
        let idx = self
            .states
            .partition_point(|s| s.t <= t)
            .clamp(1, self.states.len() - 1);
        let (s0, s1) = (self.states[idx - 1], self.states[idx]);
        let (f0, f1) = (self.derivs[idx - 1], self.derivs[idx]);
        let rec = StepRecord {
            t0: s0.t,
            t1: s1.t,
            y0: &[s0.x, s0.y],
            y1: &[s1.x, s1.y],
            f0: &[f0.0, f0.1],
            f1: &[f1.0, f1.1],
        };
        let v = rec.interpolate(t);
        Some(State::new(t, v[0], v[1]))
    }

    /// Samples at `n` evenly spaced times across the span (endpoints
    /// included); useful for fixed-rate output.
    pub fn resample(&self, n: usize) -> Vec<State> {
        if n == 0 || self.states.is_empty() {
            return Vec::new();
        }
        let t0 = self.states[0].t;
        let t1 = self.states[self.states.len() - 1].t;
        (0..n)
            .map(|i| {
                let t = if n == 1 {
                    t0
                } else {
                    t0 + (t1 - t0) * i as f64 / (n - 1) as f64
                };
                self.sample(t).expect("resample stays inside the span")
            })
            .collect()
    }

    /// Largest |x| over the recorded states.
    pub fn max_abs_x(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s.x.abs()))
    }
}

/// Result of an escape query: whether the trajectory crossed the
/// threshold and, if so, the first crossing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EscapeOutcome {
    pub escaped: bool,
    pub t_exit: Option<f64>,
}

/// Integrates the full nonlinear system from `s0` until either `x`
/// first exceeds `escape_x` (the crossing time is located by bisecting
/// the dense interpolant) or `t_max` is reached.
pub fn integrate_until_escape(
    params: OscillatorParams,
    s0: State,
    t_max: f64,
    escape_x: f64,
    settings: &IntegratorSettings,
) -> Result<EscapeOutcome, OdeError> {
    if escape_x <= 1.0 || escape_x.is_nan() {
        return Err(OdeError::BadEscapeThreshold(escape_x));
    }
    if s0.x > escape_x {
        return Ok(EscapeOutcome {
            escaped: true,
            t_exit: Some(s0.t),
        });
    }
    let f = move |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let (dx, dy) = rhs_full(params, State::new(t, y[0], y[1]));
        [dx, dy]
    };
    let mut exit = None;
    drive(f, s0.t, [s0.x, s0.y], t_max, settings, |rec| {
        if rec.y1[0] > escape_x {
            exit = Some(locate_crossing(rec, escape_x, settings));
            StepFlow::Stop
        } else {
            StepFlow::Continue
        }
    })?;
    Ok(EscapeOutcome {
        escaped: exit.is_some(),
        t_exit: exit,
    })
}

/// Bisection for the first time inside an accepted step at which the
/// interpolated x crosses the threshold (x is below it at the left
/// endpoint, above at the right).
fn locate_crossing(rec: &StepRecord<'_, 2>, escape_x: f64, settings: &IntegratorSettings) -> f64 {
    let mut lo = rec.t0;
    let mut hi = rec.t1;
    if rec.y0[0] > escape_x {
        return lo;
    }
    let tol = (settings.rel_tol * hi.abs())
        .max(settings.abs_tol)
        .max(8.0 * f64::EPSILON * hi.abs());
    for _ in 0..128 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if rec.interpolate(mid)[0] > escape_x {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}
