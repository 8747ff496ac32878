//! Time-domain Monte-Carlo oracle.
//!
//! Stochastic probe realizations are pushed through the cell slice by
//! slice. Inside a slice the ground coherence obeys
//! ρ̇_cb = 𝒩Ω_d*Ω_p − Γ̃_cb ρ_cb and the probe obeys
//! ∂Ω_p/∂z = cη[𝒩Ω_p − (Γ̃_cb − Γ_cb)Ω_d ρ_cb/|Ω_d|²], the optical
//! coherences having been eliminated adiabatically (c is the exponent
//! convention factor). Beat periodograms of the transmitted and of an
//! independent unpropagated ensemble give the transfer estimate.

mod slice;

pub use slice::{integrate_slice, CoherenceModel, MediumSlice, MAX_RATE_STEP, SUBSTEP_EXPONENT};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{closed_form_width, complex_rates, AtomicMedium, DopplerMode, ExponentConvention, FieldConfig};
use crate::noise::{
    beat_series, periodogram, synthesize_probe_field, EnsembleAccumulator, EnsembleSpectrum, FieldSeries,
    PhaseNoiseModel,
};
use crate::spectral::{fit_lineshape, FitResult, FrequencyGrid, LineModel, Spectrum};

/// Seed offsets that keep the reference and drive streams apart from the
/// transmitted-probe streams.
const REFERENCE_SALT: u64 = 0x5245_4600_0000_0000;
const DRIVE_SALT: u64 = 0x4452_4956_0000_0000;

pub const MIN_REALIZATIONS: usize = 8;
/// Relative width change allowed when the slice count is doubled.
pub const SLICE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub medium: AtomicMedium,
    /// Static drive amplitude, probe amplitude, detunings and populations.
    pub fields: FieldConfig,
    pub doppler: DopplerMode,
    pub convention: ExponentConvention,
    /// Probe phase-diffusion constant D (rad²/s); ignored with shaping.
    pub probe_diffusion: f64,
    /// Target mean beat spectrum of the incident probe.
    pub probe_shaping: Option<Spectrum>,
    /// Drive phase-diffusion constant; zero keeps the drive monochromatic.
    pub drive_diffusion: f64,
    pub slices: usize,
    pub realizations: usize,
    pub dt: f64,
    /// Length of the analysed window (s).
    pub duration: f64,
    /// Discarded lead-in so that the coherences are stationary (s).
    pub burn_in: f64,
    pub seed: u64,
    pub coherence: CoherenceModel,
    /// Periodogram bins averaged into one band.
    pub band_bins: usize,
    /// Batches used for the standard error of fitted widths.
    pub groups: usize,
}

impl McConfig {
    pub fn new(medium: AtomicMedium, fields: FieldConfig, probe_diffusion: f64, seed: u64) -> Self {
        Self {
            medium,
            fields,
            doppler: DopplerMode::Substitution,
            convention: ExponentConvention::Paper,
            probe_diffusion,
            probe_shaping: None,
            drive_diffusion: 0.0,
            slices: 8,
            realizations: 200,
            dt: 2.5e-7,
            duration: 2e-3,
            burn_in: 5e-4,
            seed,
            coherence: CoherenceModel::Adiabatic,
            band_bins: 1,
            groups: 8,
        }
    }

    fn samples(&self) -> (usize, usize) {
        let lead = (self.burn_in / self.dt).round() as usize;
        let keep = (self.duration / self.dt).round() as usize;
        (lead, keep)
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        self.fields.validate()?;
        if self.slices < 1 {
            return Err(Error::invalid("slices must be >= 1"));
        }
        if self.realizations < MIN_REALIZATIONS {
            return Err(Error::invalid(format!("need at least {MIN_REALIZATIONS} realizations")));
        }
        if self.groups < 2 || self.groups > self.realizations {
            return Err(Error::invalid("groups must lie in 2..=realizations"));
        }
        if self.band_bins < 1 {
            return Err(Error::invalid("band_bins must be >= 1"));
        }
        if !(self.dt > 0.0 && self.duration > 0.0 && self.burn_in >= 0.0) {
            return Err(Error::invalid("dt and duration must be positive, burn-in nonnegative"));
        }
        if !(self.probe_diffusion >= 0.0 && self.drive_diffusion >= 0.0) {
            return Err(Error::invalid("diffusion constants must be >= 0"));
        }
        if !(self.fields.omega_p.norm() > 0.0) {
            return Err(Error::invalid("the Monte-Carlo probe needs a nonzero Rabi frequency"));
        }
        if self.doppler == DopplerMode::VelocityAverage {
            return Err(Error::invalid("the Monte-Carlo oracle supports doppler modes off and substitution only"));
        }
        if self.coherence == CoherenceModel::Full && self.drive_diffusion > 0.0 {
            return Err(Error::invalid("full coherence integration needs a monochromatic drive"));
        }
        let rates = complex_rates(&self.medium, &self.fields, self.doppler)?;
        if self.dt * rates.gamma_cb_tilde.re > MAX_RATE_STEP {
            return Err(Error::invalid(format!(
                "dt*Re Gamma_cb_tilde = {:.3} exceeds {MAX_RATE_STEP}",
                self.dt * rates.gamma_cb_tilde.re
            )));
        }
        let width = closed_form_width(&self.medium, self.fields.drive_power()).unwrap_or(rates.gamma_cb_tilde.re);
        if width > 0.0 && self.duration < 20.0 / width {
            return Err(Error::invalid(format!(
                "duration {:.3e} s is shorter than 20/width = {:.3e} s",
                self.duration,
                20.0 / width
            )));
        }
        let (_, keep) = self.samples();
        if keep < 16 {
            return Err(Error::invalid("analysis window holds fewer than 16 samples"));
        }
        Ok(())
    }

    pub fn with_slices(&self, slices: usize) -> Self {
        Self {
            slices,
            ..self.clone()
        }
    }

    fn probe_model(&self, salt: u64) -> Result<PhaseNoiseModel> {
        PhaseNoiseModel::new(self.probe_diffusion, self.probe_shaping.clone(), self.seed ^ salt)
    }

    fn drive_series(&self, r: u64, n: usize) -> Result<FieldSeries> {
        let d0 = self.fields.omega_d;
        if self.drive_diffusion == 0.0 {
            return FieldSeries::monochromatic(d0, 0.0, self.dt, n);
        }
        let model = PhaseNoiseModel::diffusion(self.drive_diffusion, self.seed ^ DRIVE_SALT)?.realization(r);
        let unit = synthesize_probe_field(&model, 1.0, self.dt, n)?;
        let env = unit.envelope().iter().map(|z| d0 * z).collect();
        unit.with_envelope(env)
    }
}

/// Result of [`ensemble_beat_spectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    /// Mean transmitted beat spectrum with per-band standard errors.
    pub transmitted: EnsembleSpectrum,
    /// Mean incident beat spectrum from an independent ensemble.
    pub reference: EnsembleSpectrum,
    /// Transmitted means of disjoint batches of realizations.
    pub group_means: Vec<Spectrum>,
    /// Transfer estimate I_out/I_in per band and its standard error.
    pub transfer: Vec<f64>,
    pub transfer_sigma: Vec<f64>,
    /// Largest transmitted/incident window power over realizations.
    pub max_power_ratio: f64,
    /// Mean probe power removed by the cell, in units of |Ω_d|².
    pub implied_depletion: f64,
    /// z sub-steps per slice.
    pub substeps: usize,
}

impl McResult {
    pub fn grid(&self) -> &FrequencyGrid {
        self.transmitted.mean.grid()
    }

    /// Fit of the transmitted mean over |ω| ≤ half_window, with a standard
    /// error for the fitted FWHM from the spread of batch fits.
    pub fn fit_width(&self, model: LineModel, half_window: f64) -> Result<(FitResult, f64)> {
        let full = fit_lineshape(&self.transmitted.mean.restricted(-half_window, half_window)?, model, None)?;
        let mut widths = Vec::with_capacity(self.group_means.len());
        for g in &self.group_means {
            widths.push(fit_lineshape(&g.restricted(-half_window, half_window)?, model, Some(&full))?.fwhm());
        }
        let n = widths.len() as f64;
        let mean = widths.iter().sum::<f64>() / n;
        let var = widths.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Ok((full, (var / n).sqrt()))
    }
}

fn band(cfg: &McConfig, s: &Spectrum) -> Result<Spectrum> {
    if cfg.band_bins == 1 {
        Ok(s.clone())
    } else {
        s.rebinned_about(cfg.band_bins, 0.0)
    }
}

/// Propagates `cfg.realizations` probe realizations through the cell and
/// ensemble-averages the beat periodograms. Deterministic for a fixed
/// configuration; the reduction order is fixed.
pub fn ensemble_beat_spectrum(cfg: &McConfig) -> Result<McResult> {
    cfg.validate()?;
    let (lead, keep) = cfg.samples();
    let n = lead + keep;

    let slice = MediumSlice {
        medium: cfg.medium.with_length(cfg.medium.length / cfg.slices as f64),
        fields: cfg.fields,
        doppler: cfg.doppler,
        convention: cfg.convention,
        coherence: cfg.coherence,
    };
    let stepper = slice.stepper(cfg.dt)?;

    let probe_model = cfg.probe_model(0)?;
    let reference_model = cfg.probe_model(REFERENCE_SALT)?;
    let amplitude = cfg.fields.omega_p.norm();
    let drive_sq = cfg.fields.drive_power();

    let mut transmitted = EnsembleAccumulator::new();
    let mut reference = EnsembleAccumulator::new();
    let mut groups: Vec<EnsembleAccumulator> = (0..cfg.groups).map(|_| EnsembleAccumulator::new()).collect();
    let mut max_power_ratio = 0.0f64;
    let mut removed = 0.0;

    for r in 0..cfg.realizations {
        let drive = cfg.drive_series(r as u64, n)?;
        let probe = synthesize_probe_field(&probe_model.realization(r as u64), amplitude, cfg.dt, n)?.to_baseband();
        let mut env = probe.envelope().to_vec();
        for _ in 0..cfg.slices {
            stepper.advance(&mut env, drive.envelope());
        }
        let out = probe.with_envelope(env)?.window(lead, n)?;
        let inc = probe.window(lead, n)?;
        let drive_w = drive.window(lead, n)?;

        let (p_in, p_out) = (inc.mean_power(), out.mean_power());
        if p_in > 0.0 {
            max_power_ratio = max_power_ratio.max(p_out / p_in);
        }
        if drive_sq > 0.0 {
            removed += (p_in - p_out) / drive_sq;
        }

        let s_out = band(cfg, &periodogram(&beat_series(&out, &drive_w)?)?)?;
        transmitted.push(&s_out)?;
        groups[r * cfg.groups / cfg.realizations].push(&s_out)?;

        let ref_probe =
            synthesize_probe_field(&reference_model.realization(r as u64), amplitude, cfg.dt, n)?.to_baseband();
        let ref_drive = cfg.drive_series(r as u64 ^ REFERENCE_SALT, n)?;
        let s_ref = periodogram(&beat_series(&ref_probe.window(lead, n)?, &ref_drive.window(lead, n)?)?)?;
        reference.push(&band(cfg, &s_ref)?)?;
    }

    let transmitted = transmitted.finish()?;
    let reference = reference.finish()?;
    let (transfer, transfer_sigma) = transmitted.ratio(&reference)?;
    let group_means = groups
        .into_iter()
        .map(|g| g.finish().map(|e| e.mean))
        .collect::<Result<Vec<_>>>()?;
    Ok(McResult {
        transmitted,
        reference,
        group_means,
        transfer,
        transfer_sigma,
        max_power_ratio,
        implied_depletion: removed / cfg.realizations as f64,
        substeps: stepper.substeps(),
    })
}

/// Fitted widths at the configured slice count and at twice that count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceConvergence {
    pub width: f64,
    pub doubled_width: f64,
    pub relative_change: f64,
    pub converged: bool,
}

pub fn slice_convergence(cfg: &McConfig, model: LineModel, half_window: f64) -> Result<SliceConvergence> {
    let width = ensemble_beat_spectrum(cfg)?.fit_width(model, half_window)?.0.fwhm();
    let doubled_width = ensemble_beat_spectrum(&cfg.with_slices(2 * cfg.slices))?
        .fit_width(model, half_window)?
        .0
        .fwhm();
    let relative_change = ((doubled_width - width) / width).abs();
    Ok(SliceConvergence {
        width,
        doubled_width,
        relative_change,
        converged: relative_change < SLICE_TOLERANCE,
    })
}

/// exp(c·Re κ(ω)·L) averaged over the same bands as the estimate.
pub fn analytic_band_transfer(cfg: &McConfig, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    let fine = FrequencyGrid::new(
        grid.start() - 0.5 * (cfg.band_bins as f64 - 1.0) * grid.step() / cfg.band_bins as f64,
        grid.step() / cfg.band_bins as f64,
        grid.count() * cfg.band_bins,
    )?;
    let omegas: Vec<f64> = fine.omegas().collect();
    let kappa = crate::medium::transfer_exponents(&cfg.medium, &cfg.fields, cfg.doppler, &omegas)?;
    let c = cfg.convention.factor() * cfg.medium.length;
    let t: Vec<f64> = kappa.iter().map(|k: &Complex64| (c * k.re).exp()).collect();
    Ok(t.chunks_exact(cfg.band_bins).map(|b| b.iter().sum::<f64>() / b.len() as f64).collect())
}
