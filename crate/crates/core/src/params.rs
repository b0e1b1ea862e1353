//! Physical parameters and phase-space types shared by every module.

use thiserror::Error;

/// Violation of a parameter invariant, reported at construction time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("delta_hat must be positive and finite, got {0}")]
    DeltaHat(f64),
    #[error("gamma must be non-negative and finite, got {0}")]
    Gamma(f64),
    #[error("beta must be non-negative and finite, got {0}")]
    Beta(f64),
    #[error("omega_m must be positive and finite, got {0}")]
    OmegaM(f64),
    #[error("f_amp must be non-negative and finite, got {0}")]
    FAmp(f64),
    #[error("omega_f must be positive and finite, got {0}")]
    OmegaF(f64),
    #[error("mass 1/delta_hat + gamma*sin(omega_m t) must stay positive: gamma*delta_hat = {0} >= 1")]
    MassNotPositive(f64),
}

/// The six dimensionless parameters of the mass-modulated oscillator
///
///   x'' + (beta + m'(t)) x' / m(t) + (x - x^2) / m(t) = F sin(omega_f t) / m(t),
///   m(t) = 1/delta_hat + gamma sin(omega_m t).
///
/// Invariants enforced by [`OscillatorParams::new`]:
/// `delta_hat > 0` (an inverse mean mass) and `gamma * delta_hat < 1`
/// (the mass must stay strictly positive, otherwise the equation of
/// motion is singular), plus sign/finiteness constraints on every field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorParams {
    pub(crate) delta_hat: f64,
    pub(crate) gamma: f64,
    pub(crate) beta: f64,
    pub(crate) omega_m: f64,
    pub(crate) f_amp: f64,
    pub(crate) omega_f: f64,
}

impl OscillatorParams {
    /// Validates and constructs a parameter set.
    pub fn new(
        delta_hat: f64,
        gamma: f64,
        beta: f64,
        omega_m: f64,
        f_amp: f64,
        omega_f: f64,
    ) -> Result<Self, ParamError> {
        if !(delta_hat.is_finite() && delta_hat > 0.0) {
            return Err(ParamError::DeltaHat(delta_hat));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(ParamError::Gamma(gamma));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(ParamError::Beta(beta));
        }
        if !(omega_m.is_finite() && omega_m > 0.0) {
            return Err(ParamError::OmegaM(omega_m));
        }
        if !(f_amp.is_finite() && f_amp >= 0.0) {
            return Err(ParamError::FAmp(f_amp));
        }
        if !(omega_f.is_finite() && omega_f > 0.0) {
            return Err(ParamError::OmegaF(omega_f));
        }
        if gamma * delta_hat >= 1.0 {
            return Err(ParamError::MassNotPositive(gamma * delta_hat));
        }
        Ok(Self {
            delta_hat,
            gamma,
            beta,
            omega_m,
            f_amp,
            omega_f,
        })
    }

    /// Inverse mean mass.
    pub fn delta_hat(&self) -> f64 {
        self.delta_hat
    }

    /// Mass-variation amplitude.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Linear damping coefficient.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Mass-modulation angular frequency.
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }

    /// External forcing amplitude.
    pub fn f_amp(&self) -> f64 {
        self.f_amp
    }

    /// External forcing angular frequency.
    pub fn omega_f(&self) -> f64 {
        self.omega_f
    }

    /// Same parameters with a different forcing amplitude.
    pub fn with_f_amp(&self, f_amp: f64) -> Result<Self, ParamError> {
        Self::new(
            self.delta_hat,
            self.gamma,
            self.beta,
            self.omega_m,
            f_amp,
            self.omega_f,
        )
    }

    /// Same parameters with a different mass-variation amplitude.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self, ParamError> {
        Self::new(
            self.delta_hat,
            gamma,
            self.beta,
            self.omega_m,
            self.f_amp,
            self.omega_f,
        )
    }
}

/// A time-stamped phase point (x, y = dx/dt).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl State {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Self { t, x, y }
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}
