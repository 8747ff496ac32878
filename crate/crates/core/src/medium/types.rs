use num_complex::Complex64;

use crate::constants;
use crate::error::{Error, Result};

/// Vapor cell and atomic relaxation parameters. SI units, rates in s⁻¹,
/// Doppler width in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicMedium {
    /// Number density N (m⁻³).
    pub density: f64,
    /// Transition wavelength λ = 2πc/ω_ab (m).
    pub wavelength: f64,
    /// Radiative decay a → b.
    pub gamma_r: f64,
    /// Homogeneous dephasing of ρ_ab.
    pub gamma_ab: f64,
    /// Homogeneous dephasing of ρ_ac.
    pub gamma_ac: f64,
    /// Ground-state coherence decay Γ_cb (real).
    pub gamma_cb: f64,
    /// Doppler width Δ_W.
    pub doppler_width: f64,
    /// Cell length L (m). Zero is allowed and means no medium.
    pub length: f64,
}

impl AtomicMedium {
    /// The heated ⁸⁷Rb cell: N = 3·10¹¹ cm⁻³, L = 2.5 cm, Δ_W = 2π·500 MHz.
    pub fn reference_cell() -> Self {
        Self {
            density: constants::reference_density(),
            wavelength: constants::RB87_D1_WAVELENGTH,
            gamma_r: constants::RB87_D1_GAMMA_R,
            gamma_ab: constants::HOMOGENEOUS_DEPHASING,
            gamma_ac: constants::HOMOGENEOUS_DEPHASING,
            gamma_cb: 0.0,
            doppler_width: constants::reference_doppler_width(),
            length: constants::reference_length(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.density,
            self.wavelength,
            self.gamma_r,
            self.gamma_ab,
            self.gamma_ac,
            self.gamma_cb,
            self.doppler_width,
            self.length,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("medium parameters must be finite"));
        }
        if !(self.density >= 0.0 && self.wavelength > 0.0) {
            return Err(Error::invalid("density must be >= 0 and wavelength positive"));
        }
        if self.length < 0.0 {
            return Err(Error::invalid("length must be >= 0"));
        }
        if [self.gamma_r, self.gamma_ab, self.gamma_ac, self.gamma_cb, self.doppler_width]
            .iter()
            .any(|&g| g < 0.0)
        {
            return Err(Error::invalid("rates and Doppler width must be >= 0"));
        }
        Ok(())
    }

    pub fn with_length(self, length: f64) -> Self {
        Self { length, ..self }
    }

    pub fn with_gamma_cb(self, gamma_cb: f64) -> Self {
        Self { gamma_cb, ..self }
    }

    pub fn with_density(self, density: f64) -> Self {
        Self { density, ..self }
    }
}

/// Diagonal populations, frozen along the cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations {
    pub aa: f64,
    pub bb: f64,
    pub cc: f64,
}

impl Populations {
    /// Weak probe: everything stays in b.
    pub const WEAK_PROBE: Populations = Populations { aa: 0.0, bb: 1.0, cc: 0.0 };

    /// n_ab = ρ_aa − ρ_bb.
    pub fn n_ab(&self) -> f64 {
        self.aa - self.bb
    }

    /// n_ca = ρ_cc − ρ_aa.
    pub fn n_ca(&self) -> f64 {
        self.cc - self.aa
    }

    pub fn validate(&self) -> Result<()> {
        let p = [self.aa, self.bb, self.cc];
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("populations must be nonnegative"));
        }
        if (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("populations must sum to one"));
        }
        Ok(())
    }

    pub fn is_weak_probe(&self) -> bool {
        *self == Self::WEAK_PROBE
    }
}

/// Rabi frequencies, detunings and populations of the interaction-picture
/// Hamiltonian ħΩ_d e^{iΔ_d t}|a⟩⟨c| + ħΩ_p e^{iΔ_p t}|a⟩⟨b| + h.c.
///
/// `delta_ac` is the drive detuning Δ_d = ω_ac − ν_d.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldConfig {
    pub omega_d: Complex64,
    pub omega_p: Complex64,
    pub delta_p: f64,
    pub delta_ac: f64,
    pub populations: Populations,
}

impl FieldConfig {
    /// Resonant weak probe under a real drive Ω_d.
    pub fn resonant(omega_d: f64, omega_p: f64) -> Self {
        Self {
            omega_d: Complex64::new(omega_d, 0.0),
            omega_p: Complex64::new(omega_p, 0.0),
            delta_p: 0.0,
            delta_ac: 0.0,
            populations: Populations::WEAK_PROBE,
        }
    }

    pub fn with_drive(self, omega_d: f64) -> Self {
        Self {
            omega_d: Complex64::new(omega_d, 0.0),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.omega_d.re, self.omega_d.im, self.omega_p.re, self.omega_p.im, self.delta_p, self.delta_ac]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::invalid("field parameters must be finite"));
        }
        self.populations.validate()
    }

    /// True when the probe is not weaker than the drive; a warning only.
    pub fn weak_probe_warning(&self) -> bool {
        self.omega_p.norm() > self.omega_d.norm()
    }

    /// |Ω_d|².
    pub fn drive_power(&self) -> f64 {
        self.omega_d.norm_sqr()
    }
}

/// How optical dephasing enters the complex rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DopplerMode {
    /// Homogeneous γ_ab, γ_ac only.
    Off,
    /// γ_ab, γ_ac replaced by Δ_W.
    Substitution,
    /// Numerical average over a Gaussian distribution of velocity classes
    /// (FWHM Δ_W) of homogeneously broadened atoms.
    VelocityAverage,
}

impl DopplerMode {
    pub fn name(self) -> &'static str {
        match self {
            DopplerMode::Off => "off",
            DopplerMode::Substitution => "substitution",
            DopplerMode::VelocityAverage => "velocity-average",
        }
    }
}

impl std::str::FromStr for DopplerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "off" | "homogeneous" => Ok(DopplerMode::Off),
            "substitution" | "on" => Ok(DopplerMode::Substitution),
            "velocity-average" => Ok(DopplerMode::VelocityAverage),
            other => Err(Error::invalid(format!("unknown doppler mode `{other}`"))),
        }
    }
}

/// Normalisation of the density exponent.
///
/// `Derived` uses Re κ(ω) as it follows from the per-frequency equation,
/// `Paper` uses ½·Re κ(ω), which is the exponent −ηzω²/(Δ_W(a²+ω²)) of the
/// quoted thick-medium spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExponentConvention {
    Derived,
    Paper,
}

impl ExponentConvention {
    pub fn factor(self) -> f64 {
        match self {
            ExponentConvention::Derived => 1.0,
            ExponentConvention::Paper => 0.5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExponentConvention::Derived => "derived",
            ExponentConvention::Paper => "paper",
        }
    }
}

impl std::str::FromStr for ExponentConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "derived" => Ok(ExponentConvention::Derived),
            "paper" => Ok(ExponentConvention::Paper),
            other => Err(Error::invalid(format!("unknown exponent convention `{other}`"))),
        }
    }
}
