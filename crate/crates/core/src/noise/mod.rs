//! Seeded stochastic probe fields.
//!
//! Two source models are supported: pure phase diffusion (white frequency
//! noise, Lorentzian line of HWHM D) and spectral shaping, where a stationary
//! complex Gaussian process is drawn with a prescribed mean periodogram.
//!
//! Random numbers come from ChaCha20 (`rand_chacha` 0.9.0, pinned in the
//! crate manifest). Realization `r` of a model seeded with `s` uses the
//! stream `ChaCha20Rng::seed_from_u64(s ^ r)`, so ensembles are reproducible
//! regardless of evaluation order.

mod csv;
mod field;
mod periodogram;

pub use csv::{read_field_csv, write_field_csv, FIELD_HEADER};
pub use field::{beat_series, sample_phase_trajectory, synthesize_probe_field, FieldSeries};
pub use periodogram::{periodogram, EnsembleAccumulator, EnsembleSpectrum};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::spectral::Spectrum;

/// Name of the generator behind every realization stream.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9.0)";

pub fn stream(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseNoiseModel {
    diffusion: f64,
    shaping: Option<Spectrum>,
    seed: u64,
}

impl PhaseNoiseModel {
    /// `diffusion` is D in ⟨φ̇(t)φ̇(t')⟩ = 2Dδ(t−t') (rad²/s). With a shaping
    /// spectrum the synthesized field follows that spectrum and D is unused.
    pub fn new(diffusion: f64, shaping: Option<Spectrum>, seed: u64) -> Result<Self> {
        if !(diffusion >= 0.0 && diffusion.is_finite()) {
            return Err(Error::invalid(format!("diffusion constant must be >= 0, got {diffusion}")));
        }
        Ok(Self { diffusion, shaping, seed })
    }

    pub fn diffusion(diffusion: f64, seed: u64) -> Result<Self> {
        Self::new(diffusion, None, seed)
    }

    pub fn shaped(shaping: Spectrum, seed: u64) -> Result<Self> {
        Self::new(0.0, Some(shaping), seed)
    }

    pub fn diffusion_constant(&self) -> f64 {
        self.diffusion
    }

    pub fn shaping(&self) -> Option<&Spectrum> {
        self.shaping.as_ref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The same model on the stream of realization `r`.
    pub fn realization(&self, r: u64) -> Self {
        Self {
            seed: self.seed ^ r,
            ..self.clone()
        }
    }
}
