use super::rates::{coupling_eta, optical_depth};
use super::types::AtomicMedium;
use crate::error::{Error, Result};

/// Δω_bs = |Ω|²/(Δ_W√(ηL/Δ_W − 1)).
pub fn closed_form_width(m: &AtomicMedium, omega_sq: f64) -> Result<f64> {
    m.validate()?;
    if !(omega_sq >= 0.0 && omega_sq.is_finite()) {
        return Err(Error::invalid(format!("|Omega|^2 must be >= 0, got {omega_sq}")));
    }
    let a = thick_depth(m)?;
    Ok(omega_sq / (m.doppler_width * (a - 1.0).sqrt()))
}

/// The drive Rabi frequency |Ω_d| that gives a closed-form width `width`.
pub fn drive_for_width(m: &AtomicMedium, width: f64) -> Result<f64> {
    m.validate()?;
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!("target width must be positive, got {width}")));
    }
    let a = thick_depth(m)?;
    Ok((width * m.doppler_width * (a - 1.0).sqrt()).sqrt())
}

fn thick_depth(m: &AtomicMedium) -> Result<f64> {
    if !(m.doppler_width > 0.0) {
        return Err(Error::invalid("closed-form width needs a positive Doppler width"));
    }
    let a = optical_depth(m);
    if a <= 1.0 {
        return Err(Error::OpticallyThin(a));
    }
    Ok(a)
}

/// exp[−ηLω²/(Δ_W((|Ω|²/Δ_W)² + ω²))], equal to one at ω = 0.
pub fn thick_medium_transfer(m: &AtomicMedium, omega_sq: f64, omega: f64) -> f64 {
    if omega == 0.0 {
        return 1.0;
    }
    let a = omega_sq / m.doppler_width;
    let w2 = omega * omega;
    (-coupling_eta(m) * m.length * w2 / (m.doppler_width * (a * a + w2))).exp()
}

/// HWHM of [`thick_medium_transfer`], located by bisection.
pub fn filter_half_width(m: &AtomicMedium, omega_sq: f64) -> Result<f64> {
    m.validate()?;
    if !(omega_sq > 0.0 && m.doppler_width > 0.0) {
        return Err(Error::invalid("filter half-width needs |Omega|^2 > 0 and a Doppler width"));
    }
    let depth = optical_depth(m);
    if depth <= std::f64::consts::LN_2 {
        return Err(Error::UnresolvedWidth(format!(
            "wing transfer exp(-{depth:.4}) never falls to one half"
        )));
    }
    let t = |w: f64| thick_medium_transfer(m, omega_sq, w) - 0.5;
    let mut lo = 0.0;
    let mut hi = omega_sq / m.doppler_width;
    while t(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
