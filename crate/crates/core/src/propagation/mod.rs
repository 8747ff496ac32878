//! Beat-spectrum propagation through the medium.
//!
//! The Fourier route applies the per-frequency exponent directly. The
//! (τ, z) route integrates the coupled correlation equations for R(τ, z)
//! and G(τ, z) and exists to cross-check it.

mod adiabatic;
mod correlation;
mod fourier;

pub use adiabatic::{adiabatic_rate_check, AdiabaticReport, ADIABATIC_VALIDITY_THRESHOLD};
pub use correlation::{
    compare_routes, integrate_coherence, propagate_correlation, CorrelationPropagation, RouteComparison,
    MIN_CORRELATION_Z_STEPS, TAIL_DECAY,
};
pub(crate) use correlation::CoherenceWeights;
pub use fourier::{
    doppler_average_transfer, propagate_spectrum, thick_medium_spectrum, DopplerComparison, SpectrumPropagation,
};

use crate::error::{Error, Result};
use crate::medium::{AtomicMedium, DopplerMode, ExponentConvention, FieldConfig};
use crate::spectral::{FrequencyGrid, Spectrum};

/// Default number of z slices for the correlation route.
pub const DEFAULT_Z_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationProblem {
    pub medium: AtomicMedium,
    pub fields: FieldConfig,
    pub doppler: DopplerMode,
    pub convention: ExponentConvention,
    /// Input beat spectrum; its grid holds offsets from the carrier.
    pub input: Spectrum,
    pub z_steps: usize,
    /// Lag step Δτ of the correlation route (s).
    pub lag_step: f64,
    /// Number of nonnegative lags, τ = 0, Δτ, ..., (count − 1)Δτ.
    pub lag_count: usize,
}

impl PropagationProblem {
    /// A problem with the default slice count and a lag grid that is only
    /// needed by the correlation route.
    pub fn new(
        medium: AtomicMedium,
        fields: FieldConfig,
        doppler: DopplerMode,
        convention: ExponentConvention,
        input: Spectrum,
    ) -> Self {
        Self {
            medium,
            fields,
            doppler,
            convention,
            input,
            z_steps: DEFAULT_Z_STEPS,
            lag_step: 0.0,
            lag_count: 0,
        }
    }

    pub fn with_lags(self, lag_step: f64, lag_count: usize) -> Self {
        Self {
            lag_step,
            lag_count,
            ..self
        }
    }

    pub fn with_z_steps(self, z_steps: usize) -> Self {
        Self { z_steps, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.fields.validate()?;
        if self.z_steps < 1 {
            return Err(Error::invalid("z-steps must be >= 1"));
        }
        Ok(())
    }

    fn validate_lags(&self) -> Result<()> {
        if !(self.lag_step > 0.0 && self.lag_step.is_finite()) || self.lag_count < 2 {
            return Err(Error::invalid("correlation route needs lag_step > 0 and lag_count >= 2"));
        }
        Ok(())
    }
}

/// Odd-sized centred grid covering ±half_span whose step, 0.9π/τ_max,
/// keeps the lag window of the correlation route free of aliasing.
pub fn lag_matched_grid(lag_step: f64, lag_count: usize, half_span: f64) -> Result<FrequencyGrid> {
    if !(lag_step > 0.0 && half_span > 0.0) || lag_count < 2 {
        return Err(Error::invalid("lag-matched grid needs lag_step > 0, lag_count >= 2, half_span > 0"));
    }
    let step = 0.9 * std::f64::consts::PI / (lag_step * (lag_count - 1) as f64);
    FrequencyGrid::centered(step, (2.0 * half_span / step).ceil() as usize | 1)
}
