//! Unit conversions at the I/O boundary.
//!
//! Everything inside the crate is angular frequency (rad/s), seconds and
//! SI lengths. Cyclic frequencies only appear in configuration and reports.

use std::f64::consts::PI;

pub const TWO_PI: f64 = 2.0 * PI;

/// 2π·f for f in Hz.
pub fn hz(f: f64) -> f64 {
    TWO_PI * f
}

/// 2π·f for f in kHz.
pub fn khz(f: f64) -> f64 {
    TWO_PI * f * 1e3
}

/// 2π·f for f in MHz.
pub fn mhz(f: f64) -> f64 {
    TWO_PI * f * 1e6
}

pub fn to_khz(omega: f64) -> f64 {
    omega / TWO_PI / 1e3
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / TWO_PI / 1e6
}

pub fn per_cm3(n: f64) -> f64 {
    n * 1e6
}

pub fn cm(x: f64) -> f64 {
    x * 1e-2
}

pub fn nm(x: f64) -> f64 {
    x * 1e-9
}
