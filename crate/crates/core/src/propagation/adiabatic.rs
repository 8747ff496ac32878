use num_complex::Complex64;

use super::PropagationProblem;
use crate::error::Result;
use crate::medium::{complex_rates, coupling_eta, transfer_exponent};

/// Below this |Ω_d|²/|Γ_abΓ_cb| the adiabatic rate is flagged.
pub const ADIABATIC_VALIDITY_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticReport {
    /// 2η𝒩Γ_cb/Γ̃_cb.
    pub adiabatic_rate: Complex64,
    pub kappa_zero: Complex64,
    /// |Ω_d|²/|Γ_abΓ_cb|, infinite when Γ_cb = 0.
    pub validity_ratio: f64,
    pub valid: bool,
}

impl AdiabaticReport {
    pub fn consistency(&self) -> f64 {
        (self.adiabatic_rate - self.kappa_zero).norm()
    }
}

pub fn adiabatic_rate_check(p: &PropagationProblem) -> Result<AdiabaticReport> {
    p.validate()?;
    let m = &p.medium;
    let rates = complex_rates(m, &p.fields, p.doppler)?;
    let adiabatic_rate = 2.0 * coupling_eta(m) * rates.population * m.gamma_cb / rates.gamma_cb_tilde;
    let kappa_zero = transfer_exponent(m, &p.fields, p.doppler, 0.0)?;
    let denom = (rates.gamma_ab * m.gamma_cb).norm();
    let validity_ratio = if denom == 0.0 {
        f64::INFINITY
    } else {
        p.fields.drive_power() / denom
    };
    Ok(AdiabaticReport {
        adiabatic_rate,
        kappa_zero,
        validity_ratio,
        valid: validity_ratio >= ADIABATIC_VALIDITY_THRESHOLD,
    })
}
