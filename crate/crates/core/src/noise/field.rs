use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::units::TWO_PI;

use super::{stream, PhaseNoiseModel};

/// Complex field envelope sampled every `dt`; the physical field is
/// envelope·e^{−i·carrier_offset·t}.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSeries {
    dt: f64,
    envelope: Vec<Complex64>,
    carrier_offset: f64,
}

impl FieldSeries {
    pub fn new(dt: f64, envelope: Vec<Complex64>, carrier_offset: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("sample step must be positive, got {dt}")));
        }
        if envelope.len() < 2 {
            return Err(Error::invalid("field series needs at least two samples"));
        }
        if envelope.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid("field envelope must be finite"));
        }
        if !carrier_offset.is_finite() {
            return Err(Error::invalid("carrier offset must be finite"));
        }
        Ok(Self {
            dt,
            envelope,
            carrier_offset,
        })
    }

    /// Constant envelope `amplitude` at `carrier_offset`.
    pub fn monochromatic(amplitude: Complex64, carrier_offset: f64, dt: f64, n: usize) -> Result<Self> {
        Self::new(dt, vec![amplitude; n], carrier_offset)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn carrier_offset(&self) -> f64 {
        self.carrier_offset
    }

    pub fn len(&self) -> usize {
        self.envelope.len()
    }

    pub fn is_empty(&self) -> bool {
        self.envelope.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.envelope.len() as f64
    }

    pub fn mean_power(&self) -> f64 {
        self.envelope.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.envelope.len() as f64
    }

    /// Same sampling and carrier, new samples.
    pub fn with_envelope(&self, envelope: Vec<Complex64>) -> Result<Self> {
        Self::new(self.dt, envelope, self.carrier_offset)
    }

    /// Samples `[start, end)`.
    pub fn window(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.len() {
            return Err(Error::invalid(format!("window {start}..{end} outside series of {}", self.len())));
        }
        Self::new(self.dt, self.envelope[start..end].to_vec(), self.carrier_offset)
    }

    /// Envelope with the carrier folded in (carrier offset becomes zero).
    pub fn to_baseband(&self) -> Self {
        let envelope = self
            .envelope
            .iter()
            .enumerate()
            .map(|(k, z)| z * Complex64::from_polar(1.0, -self.carrier_offset * self.dt * k as f64))
            .collect();
        Self {
            dt: self.dt,
            envelope,
            carrier_offset: 0.0,
        }
    }
}

fn check_sampling(dt: f64, n: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("sample step must be positive, got {dt}")));
    }
    if n < 2 {
        return Err(Error::invalid("need at least two samples"));
    }
    Ok(())
}

/// Wiener phase φ(t_k) with φ(0) = 0 and independent N(0, 2D·dt) increments.
pub fn sample_phase_trajectory(model: &PhaseNoiseModel, dt: f64, n: usize) -> Result<Vec<f64>> {
    check_sampling(dt, n)?;
    let sigma = (2.0 * model.diffusion_constant() * dt).sqrt();
    let mut rng = stream(model.seed());
    let mut phi = Vec::with_capacity(n);
    let mut acc = 0.0;
    phi.push(acc);
    for _ in 1..n {
        let xi: f64 = rng.sample(StandardNormal);
        acc += sigma * xi;
        phi.push(acc);
    }
    Ok(phi)
}

/// One realization of the incident probe.
///
/// Without shaping: amplitude·e^{−iφ(t)}. With shaping: independent complex
/// Gaussian amplitudes per DFT bin with variance equal to the shaping
/// density at that bin (linear interpolation, zero outside its grid),
/// transformed to the time domain and rescaled so the mean power is
/// amplitude². The shaping carrier becomes the series carrier offset.
pub fn synthesize_probe_field(model: &PhaseNoiseModel, amplitude: f64, dt: f64, n: usize) -> Result<FieldSeries> {
    check_sampling(dt, n)?;
    let Some(shape) = model.shaping() else {
        let phi = sample_phase_trajectory(model, dt, n)?;
        let envelope = phi.iter().map(|p| Complex64::from_polar(amplitude, -p)).collect();
        return FieldSeries::new(dt, envelope, 0.0);
    };

    let nyquist = PI / dt;
    if shape.grid().max_abs() > nyquist {
        return Err(Error::invalid(format!(
            "shaping grid reaches {:.4e} rad/s beyond the Nyquist limit {nyquist:.4e} rad/s",
            shape.grid().max_abs()
        )));
    }

    let g = shape.grid();
    let d = shape.density();
    let interp = |w: f64| -> f64 {
        let x = (w - g.start()) / g.step();
        if x < 0.0 || x > (g.count() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(g.count() - 2);
        let f = x - i as f64;
        d[i] * (1.0 - f) + d[i + 1] * f
    };

    let domega = TWO_PI / (n as f64 * dt);
    let mut rng = stream(model.seed());
    let mut bins: Vec<Complex64> = (0..n)
        .map(|k| {
            let signed = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 };
            let s = interp(signed * domega);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (0.5 * s).sqrt()
        })
        .collect();

    // x_m = Σ_k c_k e^{−iω_k t_m}: a forward DFT in rustfft's sign convention.
    FftPlanner::new().plan_fft_forward(n).process(&mut bins);
    let power = bins.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    if !(power > 0.0) {
        return Err(Error::invalid("shaping spectrum has no weight on the sampling grid"));
    }
    let scale = amplitude / power.sqrt();
    for z in &mut bins {
        *z *= scale;
    }
    FieldSeries::new(dt, bins, shape.carrier())
}

/// Heterodyne beat probe·reference*, with the carrier difference folded
/// into the envelope (result carrier offset is zero).
pub fn beat_series(probe: &FieldSeries, reference: &FieldSeries) -> Result<FieldSeries> {
    if probe.len() != reference.len() {
        return Err(Error::invalid(format!(
            "beat needs equal lengths, got {} and {}",
            probe.len(),
            reference.len()
        )));
    }
    if (probe.dt() - reference.dt()).abs() > 1e-12 * probe.dt() {
        return Err(Error::invalid("beat needs equal sample steps"));
    }
    let delta = probe.carrier_offset() - reference.carrier_offset();
    let dt = probe.dt();
    let envelope = probe
        .envelope()
        .iter()
        .zip(reference.envelope())
        .enumerate()
        .map(|(k, (p, r))| p * r.conj() * Complex64::from_polar(1.0, -delta * dt * k as f64))
        .collect();
    FieldSeries::new(dt, envelope, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gaussian_spectrum, FrequencyGrid};

    #[test]
    fn zero_diffusion_is_noiseless() {
        let m = PhaseNoiseModel::diffusion(0.0, 9).unwrap();
        let phi = sample_phase_trajectory(&m, 1e-6, 100).unwrap();
        assert!(phi.iter().all(|&p| p == 0.0));
        let f = synthesize_probe_field(&m, 2.0, 1e-6, 100).unwrap();
        assert!(f.envelope().iter().all(|z| *z == Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn negative_diffusion_rejected() {
        assert!(matches!(PhaseNoiseModel::diffusion(-1.0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let m = PhaseNoiseModel::diffusion(1e6, 42).unwrap();
        let a = sample_phase_trajectory(&m, 1e-7, 1000).unwrap();
        let b = sample_phase_trajectory(&m, 1e-7, 1000).unwrap();
        assert_eq!(a, b);
        let c = sample_phase_trajectory(&m.realization(1), 1e-7, 1000).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn realization_stream_is_seed_xor_r() {
        let m = PhaseNoiseModel::diffusion(1e6, 0b1010).unwrap();
        assert_eq!(m.realization(0b0110).seed(), 0b1100);
    }

    #[test]
    fn shaped_field_has_requested_power() {
        let grid = FrequencyGrid::spanning(2e6, 201).unwrap();
        let shape = gaussian_spectrum(0.0, 5e5, grid).unwrap();
        let m = PhaseNoiseModel::shaped(shape, 3).unwrap();
        let f = synthesize_probe_field(&m, 1.5, 1e-7, 4096).unwrap();
        assert!((f.mean_power() - 2.25).abs() < 1e-9);
    }

    #[test]
    fn shaping_beyond_nyquist_rejected() {
        let grid = FrequencyGrid::spanning(1e8, 201).unwrap();
        let shape = gaussian_spectrum(0.0, 5e5, grid).unwrap();
        let m = PhaseNoiseModel::shaped(shape, 3).unwrap();
        assert!(matches!(synthesize_probe_field(&m, 1.0, 1e-7, 256), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn self_beat_is_constant() {
        let m = PhaseNoiseModel::diffusion(1e6, 5).unwrap();
        let p = synthesize_probe_field(&m, 1.0, 1e-7, 512).unwrap();
        let b = beat_series(&p, &p).unwrap();
        assert!(b.envelope().iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn offset_monochromatic_beat() {
        let dt = 1e-6;
        let delta = 2.0e4;
        let p = FieldSeries::monochromatic(Complex64::new(1.0, 0.0), delta, dt, 64).unwrap();
        let r = FieldSeries::monochromatic(Complex64::new(1.0, 0.0), 0.0, dt, 64).unwrap();
        let b = beat_series(&p, &r).unwrap();
        for (k, z) in b.envelope().iter().enumerate() {
            let want = Complex64::from_polar(1.0, -delta * dt * k as f64);
            assert!((z - want).norm() < 1e-12);
        }
        assert_eq!(b.carrier_offset(), 0.0);
    }

    #[test]
    fn mismatched_beat_rejected() {
        let a = FieldSeries::monochromatic(Complex64::new(1.0, 0.0), 0.0, 1e-6, 64).unwrap();
        let b = FieldSeries::monochromatic(Complex64::new(1.0, 0.0), 0.0, 1e-6, 65).unwrap();
        let c = FieldSeries::monochromatic(Complex64::new(1.0, 0.0), 0.0, 2e-6, 64).unwrap();
        assert!(beat_series(&a, &b).is_err());
        assert!(beat_series(&a, &c).is_err());
    }
}
