//! The three-level Λ medium: complex rates, the per-frequency transfer
//! exponent, monochromatic EIT scans and the thick-medium width law.
//!
//! All frequencies are angular (rad/s). With ρ_ω the Fourier amplitude of
//! the ground coherence and I_ω the beat spectral density, frozen
//! populations give ρ_ω = 𝒩I_ω/(Γ̃_cb − iω) and
//! ∂I_ω/∂z = 2η(Γ_cb − iω)𝒩I_ω/(Γ̃_cb − iω) = κ(ω)I_ω.

mod doppler;
mod rates;
mod scan;
mod types;
mod width;

pub use doppler::{VelocityQuadrature, VELOCITY_NODES, VELOCITY_SPAN_SIGMAS, VELOCITY_TOLERANCE};
pub use rates::{
    bare_absorption, coherence_responses, complex_rates, coupling_eta, optical_depth, transfer_exponent, transfer_exponents, ComplexRates,
};
pub use scan::{eit_transmission_scan, EitScan};
pub use types::{AtomicMedium, DopplerMode, ExponentConvention, FieldConfig, Populations};
pub use width::{closed_form_width, drive_for_width, filter_half_width, thick_medium_transfer};
