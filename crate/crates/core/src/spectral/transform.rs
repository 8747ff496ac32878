//! Wiener–Khinchin pair by direct trapezoid quadrature:
//!
//! R(τ) = ∫ I(ω) e^{−iωτ} dω,   I(ω) = (1/2π) ∫ R(τ) e^{iωτ} dτ.
//!
//! Frequencies are offsets from the spectrum's carrier, so R is the
//! baseband correlation. Only τ ≥ 0 is stored; R(−τ) = R(τ)* for a real
//! density.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{FrequencyGrid, Spectrum};

/// Relative level below which edges/tails count as decayed.
pub const EDGE_DECAY: f64 = 1e-6;

/// Phasor recurrences are re-seeded from exact sin/cos this often.
const RESYNC: usize = 128;

/// Correlation samples at τ = 0, Δτ, 2Δτ, …
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationFunction {
    lag_step: f64,
    values: Vec<Complex64>,
}

impl CorrelationFunction {
    pub fn new(lag_step: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(lag_step > 0.0 && lag_step.is_finite()) {
            return Err(Error::invalid(format!("lag step must be positive, got {lag_step}")));
        }
        if values.len() < 2 {
            return Err(Error::invalid("correlation needs at least two lags"));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::invalid("correlation samples must be finite"));
        }
        Ok(Self { lag_step, values })
    }

    pub fn lag_step(&self) -> f64 {
        self.lag_step
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lag(&self, k: usize) -> f64 {
        self.lag_step * k as f64
    }

    pub fn max_lag(&self) -> f64 {
        self.lag(self.values.len() - 1)
    }

    /// R(0) (real part; the imaginary part vanishes for autocorrelations).
    pub fn zero_lag(&self) -> f64 {
        self.values[0].re
    }

    /// |R(τ_last)| / R(0).
    pub fn tail_ratio(&self) -> f64 {
        let r0 = self.values[0].norm();
        if r0 == 0.0 {
            0.0
        } else {
            self.values[self.values.len() - 1].norm() / r0
        }
    }

    /// R at lag index `k`, allowing negative indices through Hermitian symmetry.
    pub fn at_signed(&self, k: isize) -> Complex64 {
        if k >= 0 {
            self.values[k as usize]
        } else {
            self.values[(-k) as usize].conj()
        }
    }
}

/// A transform result together with its truncation warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed<T> {
    pub value: T,
    /// Set when the input had not decayed below [`EDGE_DECAY`] at its edges.
    pub truncated: bool,
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Σ_i c_i e^{−i(ω₀ + iΔω)τ}, evaluated with a re-seeded phasor recurrence.
fn phasor_sum(coeffs: &[f64], omega0: f64, domega: f64, tau: f64) -> Complex64 {
    let step = Complex64::from_polar(1.0, -domega * tau);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut ph = Complex64::new(0.0, 0.0);
    for (i, &c) in coeffs.iter().enumerate() {
        if i % RESYNC == 0 {
            ph = Complex64::from_polar(1.0, -(omega0 + domega * i as f64) * tau);
        }
        acc += ph * c;
        ph *= step;
    }
    acc
}

/// R(τ_k) for k = 0..n, τ_k = k·Δτ.
pub fn spectrum_to_correlation(s: &Spectrum, lag_step: f64, n: usize) -> Result<Transformed<CorrelationFunction>> {
    if n < 2 {
        return Err(Error::invalid("need at least two lags"));
    }
    let g = s.grid();
    let m = s.len();
    let coeffs: Vec<f64> = s
        .density()
        .iter()
        .enumerate()
        .map(|(i, d)| d * trapezoid_weight(i, m) * g.step())
        .collect();
    let values = (0..n)
        .map(|k| phasor_sum(&coeffs, g.start(), g.step(), lag_step * k as f64))
        .collect();
    Ok(Transformed {
        value: CorrelationFunction::new(lag_step, values)?,
        truncated: s.edge_ratio() >= EDGE_DECAY,
    })
}

/// I(ω) on `grid`; tiny negative quadrature ripple is clamped to zero.
pub fn correlation_to_spectrum(r: &CorrelationFunction, grid: FrequencyGrid) -> Result<Transformed<Spectrum>> {
    let n = r.len();
    let dt = r.lag_step();
    let density = grid
        .omegas()
        .map(|w| {
            let step = Complex64::from_polar(1.0, w * dt);
            let mut ph = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, v) in r.values().iter().enumerate() {
                if k % RESYNC == 0 {
                    ph = Complex64::from_polar(1.0, w * dt * k as f64);
                }
                acc += v * ph * trapezoid_weight(k, n);
                ph *= step;
            }
            (acc.re * dt / PI).max(0.0)
        })
        .collect();
    Ok(Transformed {
        value: Spectrum::new(0.0, grid, density)?,
        truncated: r.tail_ratio() >= EDGE_DECAY,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineKind {
    /// Gaussian input line, width ω_w.
    Input,
    /// Lorentzian output line, width γ_n.
    Output,
}

/// Characteristic coherence time 2/width for either line.
pub fn coherence_time(width: f64, kind: LineKind) -> Result<f64> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!("width must be positive, got {width}")));
    }
    match kind {
        LineKind::Input | LineKind::Output => Ok(2.0 / width),
    }
}
