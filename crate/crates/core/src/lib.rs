//! Stability toolkit for a Helmholtz-type oscillator whose mass varies
//! periodically in time:
//!
//! ```text
//! d/dt [ m(t) x' ] + beta x' + x - x^2 = F sin(omega_f t),
//! m(t) = 1/delta_hat + gamma sin(omega_m t).
//! ```
//!
//! The crate provides four layers of analysis over one shared model:
//!
//! * [`ode`] — the right-hand-side catalog and an adaptive embedded
//!   Runge–Kutta 5(4) integrator with dense output and escape-event
//!   location.
//! * [`floquet`] — monodromy matrices of the periodic linearizations at
//!   the two equilibria, Floquet multipliers, and stability classes.
//! * [`hill`] — truncated harmonic-balance determinants whose zero sets
//!   are the parametric-resonance transition curves, plus the published
//!   small-gamma series and the damped first-tongue boundary.
//! * [`melnikov`] — the closed-form Melnikov function of the perturbed
//!   homoclinic orbit, an independent quadrature oracle, and erosion
//!   thresholds in F and gamma.
//! * [`basin`] — safe-basin rasters over initial-condition grids and
//!   normalized integrity curves (area vs forcing amplitude).
//! * [`verify`] — cross-oracle consistency suites tying the layers
//!   together; used by the CLI `verify` command and the acceptance
//!   tests.
//!
//! All computations are deterministic pure functions; the basin grid
//! sweep parallelizes over cells with index-keyed assembly, so results
//! are identical for any worker count.

pub mod basin;
pub mod floquet;
pub mod hill;
pub mod melnikov;
mod model;
mod ode;
mod params;
pub mod verify;

pub use model::{
    mass, rhs_full, rhs_linearized_origin, rhs_linearized_saddle, well_energy, RhsKind,
};
pub use ode::{
    integrate, integrate_until_escape, EscapeOutcome, IntegratorSettings, OdeError, Trajectory,
};
pub use params::{OscillatorParams, ParamError, State};
