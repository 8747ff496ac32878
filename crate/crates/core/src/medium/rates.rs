use num_complex::Complex64;

use super::doppler::VelocityQuadrature;
use super::types::{AtomicMedium, DopplerMode, FieldConfig};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// η = 3λ²Nγ_r/(8π).
pub fn coupling_eta(m: &AtomicMedium) -> f64 {
    3.0 * m.wavelength * m.wavelength * m.density * m.gamma_r / (8.0 * std::f64::consts::PI)
}

/// ηL/Δ_W, the optical depth that controls the thick-medium narrowing.
pub fn optical_depth(m: &AtomicMedium) -> f64 {
    coupling_eta(m) * m.length / m.doppler_width
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexRates {
    pub gamma_ab: Complex64,
    pub gamma_ca: Complex64,
    /// Γ̃_cb = Γ_cb + |Ω_d|²/Γ_ab + |Ω_p|²/Γ_ca.
    pub gamma_cb_tilde: Complex64,
    /// 𝒩 = n_ab/Γ_ab − n_ca/Γ_ca (units of s).
    pub population: Complex64,
}

impl ComplexRates {
    /// ρ_ω/I_ω = 𝒩/(Γ̃_cb − iω).
    pub fn response(&self, omega: f64) -> Result<Complex64> {
        let den = self.gamma_cb_tilde - I * omega;
        if den.norm() == 0.0 {
            return Err(Error::SingularRate(format!("Gamma_cb_tilde - i*omega vanishes at omega = {omega}")));
        }
        Ok(self.population / den)
    }

    /// κ(ω) = 2η(Γ_cb − iω)𝒩/(Γ̃_cb − iω).
    pub fn kappa(&self, eta: f64, gamma_cb: f64, omega: f64) -> Result<Complex64> {
        Ok(2.0 * eta * (gamma_cb - I * omega) * self.response(omega)?)
    }
}

pub(crate) fn class_rates(m: &AtomicMedium, f: &FieldConfig, gamma: (f64, f64), shift: f64) -> Result<ComplexRates> {
    let gamma_ab = Complex64::new(gamma.0, f.delta_p + shift);
    let gamma_ca = Complex64::new(gamma.1, -(f.delta_ac + shift));
    if gamma_ab.norm() == 0.0 {
        return Err(Error::SingularRate("Gamma_ab = 0 (no dephasing, zero probe detuning)".into()));
    }
    if gamma_ca.norm() == 0.0 {
        return Err(Error::SingularRate("Gamma_ca = 0 (no dephasing, zero drive detuning)".into()));
    }
    let pops = f.populations;
    Ok(ComplexRates {
        gamma_ab,
        gamma_ca,
        gamma_cb_tilde: m.gamma_cb + f.omega_d.norm_sqr() / gamma_ab + f.omega_p.norm_sqr() / gamma_ca,
        population: pops.n_ab() / gamma_ab - pops.n_ca() / gamma_ca,
    })
}

/// Complex rates for the chosen Doppler treatment. The velocity-average
/// mode has no single set of rates; it returns those of the atoms at rest.
pub fn complex_rates(m: &AtomicMedium, f: &FieldConfig, doppler: DopplerMode) -> Result<ComplexRates> {
    m.validate()?;
    f.validate()?;
    let gamma = match doppler {
        DopplerMode::Substitution => (m.doppler_width, m.doppler_width),
        DopplerMode::Off | DopplerMode::VelocityAverage => (m.gamma_ab, m.gamma_ac),
    };
    class_rates(m, f, gamma, 0.0)
}

/// Per-frequency transfer exponent κ(ω) (m⁻¹). The density transfer over a
/// length z is exp(c·Re κ(ω)·z) with c the exponent-convention factor.
pub fn transfer_exponent(m: &AtomicMedium, f: &FieldConfig, doppler: DopplerMode, omega: f64) -> Result<Complex64> {
    Ok(transfer_exponents(m, f, doppler, &[omega])?[0])
}

/// κ(ω) over a set of frequencies. In the velocity-average mode the
/// velocity quadrature is refined once for the whole set.
pub fn transfer_exponents(
    m: &AtomicMedium,
    f: &FieldConfig,
    doppler: DopplerMode,
    omegas: &[f64],
) -> Result<Vec<Complex64>> {
    let eta = coupling_eta(m);
    let resp = coherence_responses(m, f, doppler, omegas)?;
    Ok(resp
        .iter()
        .zip(omegas)
        .map(|(r, &w)| 2.0 * eta * (m.gamma_cb - I * w) * r)
        .collect())
}

/// 𝒩/(Γ̃_cb − iω), averaged over velocity classes when requested.
pub fn coherence_responses(
    m: &AtomicMedium,
    f: &FieldConfig,
    doppler: DopplerMode,
    omegas: &[f64],
) -> Result<Vec<Complex64>> {
    match doppler {
        DopplerMode::Off | DopplerMode::Substitution => {
            let rates = complex_rates(m, f, doppler)?;
            omegas.iter().map(|&w| rates.response(w)).collect()
        }
        DopplerMode::VelocityAverage => {
            m.validate()?;
            f.validate()?;
            VelocityQuadrature::average(m.doppler_width, |q| {
                let mut acc = vec![Complex64::new(0.0, 0.0); omegas.len()];
                for &(shift, weight) in q.nodes() {
                    let rates = class_rates(m, f, (m.gamma_ab, m.gamma_ac), shift)?;
                    for (a, &w) in acc.iter_mut().zip(omegas) {
                        *a += weight * rates.response(w)?;
                    }
                }
                Ok(acc)
            })
        }
    }
}

/// The ω → ∞ limit of κ, i.e. bare resonant absorption 2η𝒩.
pub fn bare_absorption(m: &AtomicMedium, f: &FieldConfig, doppler: DopplerMode) -> Result<Complex64> {
    let eta = coupling_eta(m);
    match doppler {
        DopplerMode::Off | DopplerMode::Substitution => Ok(2.0 * eta * complex_rates(m, f, doppler)?.population),
        DopplerMode::VelocityAverage => {
            m.validate()?;
            f.validate()?;
            let v = VelocityQuadrature::average(m.doppler_width, |q| {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(shift, weight) in q.nodes() {
                    acc += weight * class_rates(m, f, (m.gamma_ab, m.gamma_ac), shift)?.population;
                }
                Ok(vec![acc])
            })?;
            Ok(2.0 * eta * v[0])
        }
    }
}
