use super::rates::{bare_absorption, transfer_exponents};
use super::types::{AtomicMedium, DopplerMode, ExponentConvention, FieldConfig};
use crate::error::Result;
use crate::spectral::{fit_lineshape, FitResult, FrequencyGrid, LineModel, Spectrum};

/// Monochromatic-probe transmission against two-photon detuning δ.
#[derive(Debug, Clone, PartialEq)]
pub struct EitScan {
    transmission: Spectrum,
    background: f64,
}

impl EitScan {
    /// T(δ) on the scan grid; the grid holds δ and the carrier is zero.
    pub fn transmission(&self) -> &Spectrum {
        &self.transmission
    }

    /// T(∞), the bare absorption level outside the window.
    pub fn background(&self) -> f64 {
        self.background
    }

    /// T(δ) − T(∞), clamped at zero.
    pub fn resonance(&self) -> Result<Spectrum> {
        let bg = self.background;
        let d = self.transmission.density().iter().map(|t| (t - bg).max(0.0)).collect();
        Spectrum::new(0.0, *self.transmission.grid(), d)
    }

    /// Lorentzian fit of the transparency peak; its FWHM is γ_EIT.
    pub fn eit_fit(&self) -> Result<FitResult> {
        fit_lineshape(&self.resonance()?, LineModel::Lorentzian, None)
    }
}

/// T(δ) = exp(c·Re κ(δ)·L).
pub fn eit_transmission_scan(
    m: &AtomicMedium,
    f: &FieldConfig,
    doppler: DopplerMode,
    convention: ExponentConvention,
    grid: FrequencyGrid,
) -> Result<EitScan> {
    let c = convention.factor() * m.length;
    let deltas: Vec<f64> = grid.omegas().collect();
    let kappa = transfer_exponents(m, f, doppler, &deltas)?;
    let t = kappa.iter().map(|k| (c * k.re).exp()).collect();
    let background = (c * bare_absorption(m, f, doppler)?.re).exp();
    Ok(EitScan {
        transmission: Spectrum::new(0.0, grid, t)?,
        background,
    })
}
