use num_complex::Complex64;

use super::PropagationProblem;
use crate::error::Result;
use crate::medium::{
    coherence_responses, coupling_eta, eit_transmission_scan, thick_medium_transfer, AtomicMedium, DopplerMode,
    ExponentConvention, FieldConfig,
};
use crate::spectral::{fwhm_estimate, FrequencyGrid, Spectrum};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPropagation {
    pub output: Spectrum,
    /// I_ω(L)/I_ω(0) on the input grid.
    pub transfer: Vec<f64>,
    /// ρ_ω(L) = 𝒩I_ω(L)/(Γ̃_cb − iω).
    pub coherence: Vec<Complex64>,
}

/// I_ω(L) = I_ω(0)·exp(c·Re κ(ω)·L).
pub fn propagate_spectrum(p: &PropagationProblem) -> Result<SpectrumPropagation> {
    p.validate()?;
    let m = &p.medium;
    let omegas: Vec<f64> = p.input.grid().omegas().collect();
    let resp = coherence_responses(m, &p.fields, p.doppler, &omegas)?;
    let eta = coupling_eta(m);
    let c = p.convention.factor() * m.length;
    let transfer: Vec<f64> = resp
        .iter()
        .zip(&omegas)
        .map(|(r, &w)| {
            let kappa = 2.0 * eta * Complex64::new(m.gamma_cb, -w) * r;
            (c * kappa.re).exp()
        })
        .collect();
    let density: Vec<f64> = p.input.density().iter().zip(&transfer).map(|(i, t)| i * t).collect();
    let coherence = resp.iter().zip(&density).map(|(r, i)| r * *i).collect();
    Ok(SpectrumPropagation {
        output: Spectrum::new(p.input.carrier(), *p.input.grid(), density)?,
        transfer,
        coherence,
    })
}

/// Applies exp[−ηLω²/(Δ_W((|Ω|²/Δ_W)² + ω²))] to `input`.
pub fn thick_medium_spectrum(m: &AtomicMedium, omega_sq: f64, input: &Spectrum) -> Result<Spectrum> {
    m.validate()?;
    input.filtered(|w| thick_medium_transfer(m, omega_sq, w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerComparison {
    /// exp(c·Re⟨κ⟩_v·L) with κ averaged over velocity classes.
    pub average: Spectrum,
    /// The same with γ → Δ_W.
    pub substitution: Spectrum,
    /// max_ω |T_avg − T_sub| / max_ω T_sub.
    pub max_relative_deviation: f64,
    /// FWHM of T − T(∞) in each mode.
    pub average_width: f64,
    pub substitution_width: f64,
}

impl DopplerComparison {
    /// Relative width discrepancy (avg − sub)/sub.
    pub fn width_discrepancy(&self) -> f64 {
        (self.average_width - self.substitution_width) / self.substitution_width
    }
}

pub fn doppler_average_transfer(
    m: &AtomicMedium,
    f: &FieldConfig,
    convention: ExponentConvention,
    grid: FrequencyGrid,
) -> Result<DopplerComparison> {
    let avg = eit_transmission_scan(m, f, DopplerMode::VelocityAverage, convention, grid)?;
    let sub = eit_transmission_scan(m, f, DopplerMode::Substitution, convention, grid)?;
    let scale = sub.transmission().peak().1;
    let dev = avg
        .transmission()
        .density()
        .iter()
        .zip(sub.transmission().density())
        .map(|(a, s)| (a - s).abs())
        .fold(0.0, f64::max);
    Ok(DopplerComparison {
        average_width: fwhm_estimate(&avg.resonance()?)?,
        substitution_width: fwhm_estimate(&sub.resonance()?)?,
        average: avg.transmission().clone(),
        substitution: sub.transmission().clone(),
        max_relative_deviation: if scale > 0.0 { dev / scale } else { dev },
    })
}
