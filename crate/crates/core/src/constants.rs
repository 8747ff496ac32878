//! External atomic data and the reference experimental parameters.
//!
//! Atomic constants for the ⁸⁷Rb D1 line (5S₁/₂ → 5P₁/₂) are taken from
//! D. A. Steck, "Rubidium 87 D Line Data" (rev. 2.2.1), and are not meant to
//! be edited; the remaining values describe the vapor cell and fields of the
//! reference configuration used by the figure presets.

use crate::units::{cm, khz, mhz, per_cm3};

/// Vacuum wavelength of the ⁸⁷Rb D1 transition (m).
pub const RB87_D1_WAVELENGTH: f64 = 794.978_851e-9;

/// Radiative decay rate of 5P₁/₂, Γ = 1/27.679 ns = 2π·5.750 MHz (s⁻¹).
pub const RB87_D1_GAMMA_R: f64 = 3.6129e7;

/// Homogeneous optical dephasing in the buffer-gas cell (s⁻¹).
pub const HOMOGENEOUS_DEPHASING: f64 = 2.0e7;

/// Atomic density of the reference cell, 3·10¹¹ cm⁻³, in m⁻³.
pub fn reference_density() -> f64 {
    per_cm3(3e11)
}

/// Cell length, 2.5 cm, in m.
pub fn reference_length() -> f64 {
    cm(2.5)
}

/// Doppler width Δ_W = 2π·500 MHz (rad/s).
pub fn reference_doppler_width() -> f64 {
    mhz(500.0)
}

/// FWHM of the incident probe spectrum, 2π·980 kHz (rad/s).
pub fn reference_input_fwhm() -> f64 {
    khz(980.0)
}

/// Transmitted beat-signal width targeted by the presets, 2π·4.6 kHz (rad/s).
pub fn reference_output_width() -> f64 {
    khz(4.6)
}
