//! Transmission of a phase-noise broadened probe and a coherent drive
//! through an optically thick three-level Λ medium.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`]: grids, lineshapes, Wiener–Khinchin transforms and fits;
//! * [`noise`]: seeded phase-diffusion and spectrally shaped fields;
//! * [`medium`]: complex rates, the per-frequency transfer exponent, EIT
//!   scans and the thick-medium width formula;
//! * [`propagation`]: spectrum and correlation-function propagation;
//! * [`mc`]: a time-domain Monte-Carlo oracle for the whole chain.

pub mod constants;
pub mod error;
pub mod mc;
pub mod medium;
pub mod noise;
pub mod propagation;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
