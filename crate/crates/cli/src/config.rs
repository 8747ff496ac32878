//! Run configuration.
//!
//! TOML with one table per module. Every physical quantity carries its unit
//! in the key name. Keys ending in `_hz`, `_khz` or `_mhz` are cyclic
//! frequencies and are multiplied by 2π on load; `_per_s` keys are rates
//! used as given. Unknown keys are rejected.

use std::path::Path;

use eitline_core::constants;
use eitline_core::mc::{CoherenceModel, McConfig};
use eitline_core::medium::{
    drive_for_width, AtomicMedium, DopplerMode, ExponentConvention, FieldConfig, Populations,
};
use eitline_core::spectral::{gaussian_spectrum, gaussian_width_from_fwhm, lorentzian_spectrum, FrequencyGrid, LineModel, Spectrum};
use eitline_core::units::{cm, hz, khz, mhz, nm, per_cm3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preset: String,
    pub seed: u64,
    pub out_dir: String,
    pub medium: MediumSection,
    pub fields: FieldsSection,
    pub input: InputSection,
    pub output: OutputSection,
    pub propagation: PropagationSection,
    pub mc: McSection,
    pub figure4: Figure4Section,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MediumSection {
    pub density_cm3: f64,
    pub length_cm: f64,
    pub doppler_fwhm_mhz: f64,
    pub wavelength_nm: f64,
    pub gamma_r_per_s: f64,
    pub gamma_ab_per_s: f64,
    pub gamma_ac_per_s: f64,
    pub gamma_cb_hz: f64,
    pub doppler_mode: String,
    pub convention: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldsSection {
    /// Drive Rabi frequency. Overrides `target_width_khz`, from which the
    /// drive is solved when this key is absent.
    pub omega_d_mhz: Option<f64>,
    pub target_width_khz: Option<f64>,
    pub omega_p_mhz: f64,
    pub delta_p_mhz: f64,
    pub delta_ac_mhz: f64,
    pub rho_aa: f64,
    pub rho_bb: f64,
    pub rho_cc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub lineshape: String,
    pub fwhm_khz: f64,
    pub half_span_khz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub half_span_khz: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSection {
    pub route: String,
    pub z_steps: usize,
    pub lag_step_ns: f64,
    pub lag_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    pub realizations: usize,
    pub slices: usize,
    pub dt_ns: f64,
    pub duration_ms: f64,
    pub burn_in_ms: f64,
    /// Probe phase diffusion D expressed as the line HWHM D/2π.
    pub probe_diffusion_khz: f64,
    pub drive_diffusion_khz: f64,
    /// Shape the probe with the `[input]` lineshape instead of diffusion.
    pub shaped_input: bool,
    pub coherence: String,
    pub band_bins: usize,
    pub groups: usize,
    pub fit_half_window_khz: f64,
    pub slice_check: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure4Section {
    pub omega_d_mhz: Vec<f64>,
    /// Half-span of each output grid in units of the closed-form width.
    pub grid_widths: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            preset: "paper".into(),
            seed: 1,
            out_dir: "out".into(),
            medium: MediumSection::default(),
            fields: FieldsSection::default(),
            input: InputSection::default(),
            output: OutputSection::default(),
            propagation: PropagationSection::default(),
            mc: McSection::default(),
            figure4: Figure4Section::default(),
        }
    }
}

impl Default for MediumSection {
    fn default() -> Self {
        Self {
            density_cm3: 3e11,
            length_cm: 2.5,
            doppler_fwhm_mhz: 500.0,
            wavelength_nm: constants::RB87_D1_WAVELENGTH * 1e9,
            gamma_r_per_s: constants::RB87_D1_GAMMA_R,
            gamma_ab_per_s: constants::HOMOGENEOUS_DEPHASING,
            gamma_ac_per_s: constants::HOMOGENEOUS_DEPHASING,
            gamma_cb_hz: 0.0,
            doppler_mode: "substitution".into(),
            convention: "paper".into(),
        }
    }
}

impl Default for FieldsSection {
    fn default() -> Self {
        Self {
            omega_d_mhz: None,
            target_width_khz: Some(4.6),
            omega_p_mhz: 0.001,
            delta_p_mhz: 0.0,
            delta_ac_mhz: 0.0,
            rho_aa: 0.0,
            rho_bb: 1.0,
            rho_cc: 0.0,
        }
    }
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            lineshape: "gaussian".into(),
            fwhm_khz: 980.0,
            half_span_khz: 2500.0,
            points: 1001,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            half_span_khz: 40.0,
            points: 801,
        }
    }
}

impl Default for PropagationSection {
    fn default() -> Self {
        Self {
            route: "fourier".into(),
            z_steps: 128,
            lag_step_ns: 50.0,
            lag_count: 8001,
        }
    }
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            realizations: 200,
            slices: 8,
            dt_ns: 250.0,
            duration_ms: 2.0,
            burn_in_ms: 0.5,
            probe_diffusion_khz: 30.0,
            drive_diffusion_khz: 0.0,
            shaped_input: false,
            coherence: "adiabatic".into(),
            band_bins: 3,
            groups: 8,
            fit_half_window_khz: 12.0,
            slice_check: true,
        }
    }
}

impl Default for Figure4Section {
    fn default() -> Self {
        Self {
            omega_d_mhz: vec![1.0, 1.26, 1.59, 2.0, 2.52, 3.17],
            grid_widths: 8.0,
        }
    }
}

/// Propagation route selected in `[propagation]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Fourier,
    Thick,
    Correlation,
}

/// A configuration checked against every module invariant, with physical
/// quantities converted to SI and rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub raw: RunConfig,
    pub medium: AtomicMedium,
    pub fields: FieldConfig,
    pub doppler: DopplerMode,
    pub convention: ExponentConvention,
    pub input_model: LineModel,
    pub input_fwhm: f64,
    pub input_grid: FrequencyGrid,
    pub output_grid: FrequencyGrid,
    pub route: Route,
    pub mc: McConfig,
    pub mc_half_window: f64,
    pub sweep: Vec<f64>,
    pub hash: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::usage("config-not-found", format!("no config file at {}", path.display()))
            } else {
                CliError::usage("config-unreadable", format!("{}: {e}", path.display()))
            }
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().to_string();
            let tag = if msg.contains("unknown field") { "unknown-key" } else { "config-syntax" };
            CliError::usage(tag, one_line(&msg))
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML serialization.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let m = &self.medium;
        let medium = AtomicMedium {
            density: per_cm3(m.density_cm3),
            wavelength: nm(m.wavelength_nm),
            gamma_r: m.gamma_r_per_s,
            gamma_ab: m.gamma_ab_per_s,
            gamma_ac: m.gamma_ac_per_s,
            gamma_cb: hz(m.gamma_cb_hz),
            doppler_width: mhz(m.doppler_fwhm_mhz),
            length: cm(m.length_cm),
        };
        medium.validate().map_err(CliError::config)?;
        let doppler: DopplerMode = parse_enum("doppler_mode", &m.doppler_mode)?;
        let convention: ExponentConvention = parse_enum("convention", &m.convention)?;

        let f = &self.fields;
        let omega_d = match (f.omega_d_mhz, f.target_width_khz) {
            (Some(od), _) => mhz(od),
            (None, Some(w)) => drive_for_width(&medium, khz(w)).map_err(CliError::config)?,
            (None, None) => {
                return Err(CliError::usage(
                    "invalid-parameter",
                    "[fields] needs omega_d_mhz or target_width_khz",
                ))
            }
        };
        let fields = FieldConfig {
            omega_d: Complex64::new(omega_d, 0.0),
            omega_p: Complex64::new(mhz(f.omega_p_mhz), 0.0),
            delta_p: mhz(f.delta_p_mhz),
            delta_ac: mhz(f.delta_ac_mhz),
            populations: Populations {
                aa: f.rho_aa,
                bb: f.rho_bb,
                cc: f.rho_cc,
            },
        };
        fields.validate().map_err(CliError::config)?;

        let input_model: LineModel = parse_enum("lineshape", &self.input.lineshape)?;
        let input_fwhm = khz(self.input.fwhm_khz);
        if !(input_fwhm > 0.0) {
            return Err(CliError::usage("invalid-parameter", "input fwhm_khz must be positive"));
        }
        let input_grid = grid("input", self.input.half_span_khz, self.input.points)?;
        let output_grid = grid("output", self.output.half_span_khz, self.output.points)?;

        let p = &self.propagation;
        let route = match p.route.as_str() {
            "fourier" => Route::Fourier,
            "thick" => Route::Thick,
            "correlation" => Route::Correlation,
            other => return Err(bad_enum("route", other)),
        };
        if p.z_steps < 1 || p.lag_count < 2 || !(p.lag_step_ns > 0.0) {
            return Err(CliError::usage(
                "invalid-parameter",
                "[propagation] needs z_steps >= 1, lag_count >= 2, lag_step_ns > 0",
            ));
        }

        let s = &self.mc;
        let mut mc = McConfig::new(medium, fields, khz(s.probe_diffusion_khz), self.seed);
        mc.doppler = doppler;
        mc.convention = convention;
        mc.drive_diffusion = khz(s.drive_diffusion_khz);
        mc.slices = s.slices;
        mc.realizations = s.realizations;
        mc.dt = s.dt_ns * 1e-9;
        mc.duration = s.duration_ms * 1e-3;
        mc.burn_in = s.burn_in_ms * 1e-3;
        mc.coherence = parse_enum::<CoherenceModel>("coherence", &s.coherence)?;
        mc.band_bins = s.band_bins;
        mc.groups = s.groups;
        if s.shaped_input {
            mc.probe_diffusion = 0.0;
            let nyquist = 0.99 * std::f64::consts::PI / mc.dt;
            let g = grid("mc shaping", self.input.half_span_khz.min(nyquist / khz(1.0)), self.input.points)?;
            mc.probe_shaping = Some(input_spectrum(input_model, input_fwhm, g)?);
        }
        if !(s.fit_half_window_khz > 0.0) {
            return Err(CliError::usage("invalid-parameter", "fit_half_window_khz must be positive"));
        }

        let sweep: Vec<f64> = self.figure4.omega_d_mhz.iter().map(|&v| mhz(v)).collect();
        if !(self.figure4.grid_widths > 0.0) {
            return Err(CliError::usage("invalid-parameter", "figure4 grid_widths must be positive"));
        }

        Ok(Resolved {
            raw: self.clone(),
            medium,
            fields,
            doppler,
            convention,
            input_model,
            input_fwhm,
            input_grid,
            output_grid,
            route,
            mc,
            mc_half_window: khz(s.fit_half_window_khz),
            sweep,
            hash: self.hash(),
        })
    }
}

impl Resolved {
    pub fn input_on(&self, grid: FrequencyGrid) -> Result<Spectrum, CliError> {
        input_spectrum(self.input_model, self.input_fwhm, grid)
    }
}

pub fn input_spectrum(model: LineModel, fwhm: f64, grid: FrequencyGrid) -> Result<Spectrum, CliError> {
    match model {
        LineModel::Gaussian => gaussian_spectrum(0.0, gaussian_width_from_fwhm(fwhm), grid),
        LineModel::Lorentzian => lorentzian_spectrum(0.0, 0.5 * fwhm, grid),
    }
    .map_err(CliError::config)
}

fn grid(what: &str, half_span_khz: f64, points: usize) -> Result<FrequencyGrid, CliError> {
    if points < 3 {
        return Err(CliError::usage("invalid-parameter", format!("{what} grid needs at least 3 points")));
    }
    FrequencyGrid::spanning(khz(half_span_khz), points).map_err(CliError::config)
}

fn parse_enum<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse::<T>().map_err(|_| bad_enum(key, value))
}

fn bad_enum(key: &str, value: &str) -> CliError {
    CliError::usage("bad-enum", format!("`{value}` is not a valid value for {key}"))
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(RunConfig::parse("").unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse("[medium]\nlength = 2.5\n").unwrap_err();
        assert_eq!(err.tag, "unknown-key");
    }

    #[test]
    fn bad_enum_is_tagged() {
        let cfg = RunConfig::parse("[medium]\nconvention = \"half\"\n").unwrap();
        assert_eq!(cfg.resolve().unwrap_err().tag, "bad-enum");
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.seed = 2;
        assert_eq!(a.hash().len(), 64);
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn default_drive_gives_the_target_width() {
        let r = RunConfig::default().resolve().unwrap();
        let w = eitline_core::medium::closed_form_width(&r.medium, r.fields.drive_power()).unwrap();
        assert!((w / khz(4.6) - 1.0).abs() < 1e-9);
    }
}
