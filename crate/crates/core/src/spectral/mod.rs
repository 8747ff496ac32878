//! Frequency grids, model lineshapes, Wiener–Khinchin transforms, width
//! estimation and lineshape fitting.

mod csv;
mod fit;
mod fwhm;
mod grid;
mod spectrum;
mod transform;

pub use csv::{format_number, read_spectrum_csv, write_spectrum_csv, write_spectrum_csv_with, SPECTRUM_HEADER};
pub use fit::{fit_lineshape, FitResult, LineModel, MAX_ITERATIONS, STEP_TOLERANCE};
pub use fwhm::fwhm_estimate;
pub use grid::{FrequencyGrid, MIN_GRID_POINTS};
pub use spectrum::{gaussian_spectrum, gaussian_width_from_fwhm, lorentzian_spectrum, Spectrum};
pub use transform::{
    coherence_time, correlation_to_spectrum, spectrum_to_correlation, CorrelationFunction, LineKind, Transformed,
    EDGE_DECAY,
};
