use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{complex_rates, coupling_eta, AtomicMedium, DopplerMode, ExponentConvention, FieldConfig};
use crate::noise::FieldSeries;
use crate::propagation::CoherenceWeights;

/// Largest admissible dt·Re Γ̃_cb.
pub const MAX_RATE_STEP: f64 = 0.1;
/// Target amplitude exponent per z sub-step.
pub const SUBSTEP_EXPONENT: f64 = 0.01;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Treatment of the optical coherences inside a slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoherenceModel {
    /// ρ_ab, ρ_ca follow the fields instantaneously; ρ_cb is integrated.
    Adiabatic,
    /// ρ_ab and ρ_cb are both integrated (weak probe, constant drive).
    Full,
}

impl CoherenceModel {
    pub fn name(self) -> &'static str {
        match self {
            CoherenceModel::Adiabatic => "adiabatic",
            CoherenceModel::Full => "full",
        }
    }
}

impl std::str::FromStr for CoherenceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "adiabatic" => Ok(CoherenceModel::Adiabatic),
            "full" => Ok(CoherenceModel::Full),
            other => Err(Error::invalid(format!("unknown coherence model `{other}`"))),
        }
    }
}

/// One thin layer of the cell; `medium.length` is its thickness.
///
/// `fields.omega_d` fixes |Ω_d| (and so Γ̃_cb); the drive series passed to
/// [`integrate_slice`] supplies its phase history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumSlice {
    pub medium: AtomicMedium,
    pub fields: FieldConfig,
    pub doppler: DopplerMode,
    pub convention: ExponentConvention,
    pub coherence: CoherenceModel,
}

impl MediumSlice {
    pub(crate) fn stepper(&self, dt: f64) -> Result<SliceStepper> {
        if self.doppler == DopplerMode::VelocityAverage {
            return Err(Error::invalid("the Monte-Carlo oracle supports doppler modes off and substitution only"));
        }
        let rates = complex_rates(&self.medium, &self.fields, self.doppler)?;
        let gt = rates.gamma_cb_tilde;
        if gt.re * dt > MAX_RATE_STEP {
            return Err(Error::invalid(format!(
                "dt = {dt:.3e} s with Re Gamma_cb_tilde = {:.4e} s^-1 exceeds dt*rate <= {MAX_RATE_STEP}",
                gt.re
            )));
        }
        let eta = coupling_eta(&self.medium) * self.convention.factor();
        let drive_sq = self.fields.drive_power();
        let kind = match self.coherence {
            CoherenceModel::Adiabatic => Kind::Adiabatic {
                weights: CoherenceWeights::new(gt, dt, rates.population),
                population: rates.population,
                quasi_static: rates.population / gt,
                c_g: if drive_sq > 0.0 {
                    (gt - self.medium.gamma_cb) / drive_sq
                } else {
                    Complex64::new(0.0, 0.0)
                },
            },
            CoherenceModel::Full => {
                if !self.fields.populations.is_weak_probe() {
                    return Err(Error::invalid("full coherence integration needs weak-probe populations"));
                }
                Kind::Full(FullSystem::new(rates.gamma_ab, self.fields.omega_d, self.medium.gamma_cb, dt)?)
            }
        };
        let per_substep = eta * rates.population.norm().max(1.0 / rates.gamma_ab.norm()) * self.medium.length;
        let substeps = ((per_substep / SUBSTEP_EXPONENT).ceil() as usize).max(1);
        Ok(SliceStepper {
            kind,
            eta,
            dz: self.medium.length / substeps as f64,
            substeps,
        })
    }
}

enum Kind {
    Adiabatic {
        weights: CoherenceWeights,
        population: Complex64,
        quasi_static: Complex64,
        c_g: Complex64,
    },
    Full(FullSystem),
}

/// ẏ = My + (iΩ_p, 0) for y = (ρ_ab, ρ_cb), in the eigenbasis of M.
struct FullSystem {
    lambda: [Complex64; 2],
    v: [[Complex64; 2]; 2],
    v_inv_col0: [Complex64; 2],
    weights: [CoherenceWeights; 2],
}

impl FullSystem {
    fn new(gamma_ab: Complex64, omega_d: Complex64, gamma_cb: f64, dt: f64) -> Result<Self> {
        let m = [[-gamma_ab, I * omega_d], [I * omega_d.conj(), Complex64::new(-gamma_cb, 0.0)]];
        let (lambda, v) = if omega_d.norm() == 0.0 {
            ([m[0][0], m[1][1]], [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]])
        } else {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (0.25 * tr * tr - det).sqrt();
            let l = [0.5 * tr + disc, 0.5 * tr - disc];
            if (l[0] - l[1]).norm() <= 1e-12 * l[0].norm().max(l[1].norm()) {
                return Err(Error::invalid("degenerate coherence eigenvalues"));
            }
            // Columns (M01, λ − M00).
            ([l[0], l[1]], [[m[0][1], m[0][1]], [l[0] - m[0][0], l[1] - m[0][0]]])
        };
        if lambda.iter().any(|l| !(l.re < 0.0)) {
            return Err(Error::invalid("full coherence integration needs strictly decaying modes (Gamma_cb > 0 or a drive)"));
        }
        let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
        let v_inv_col0 = [v[1][1] / det, -v[1][0] / det];
        let one = Complex64::new(1.0, 0.0);
        Ok(Self {
            weights: [CoherenceWeights::new(-lambda[0], dt, one), CoherenceWeights::new(-lambda[1], dt, one)],
            lambda,
            v,
            v_inv_col0,
        })
    }
}

pub(crate) struct SliceStepper {
    kind: Kind,
    eta: f64,
    dz: f64,
    substeps: usize,
}

impl SliceStepper {
    pub(crate) fn substeps(&self) -> usize {
        self.substeps
    }

    /// ∂Ω_p/∂z for a probe history `p` and drive history `d`.
    fn rhs(&self, p: &[Complex64], d: &[Complex64], out: &mut [Complex64]) {
        let n = p.len();
        match &self.kind {
            Kind::Adiabatic {
                weights,
                population,
                quasi_static,
                c_g,
            } => {
                let src = |k: usize| d[k].conj() * p[k];
                let mut s_prev = src(0);
                let mut rho = quasi_static * s_prev;
                out[0] = self.eta * (population * p[0] - c_g * d[0] * rho);
                for k in 1..n {
                    let s = src(k);
                    rho = weights.decay * rho + weights.w0 * s_prev + weights.w1 * s;
                    s_prev = s;
                    out[k] = self.eta * (population * p[k] - c_g * d[k] * rho);
                }
            }
            Kind::Full(sys) => {
                let u = |k: usize, i: usize| sys.v_inv_col0[i] * I * p[k];
                let mut y = [-u(0, 0) / sys.lambda[0], -u(0, 1) / sys.lambda[1]];
                out[0] = self.eta * I * (sys.v[0][0] * y[0] + sys.v[0][1] * y[1]);
                for k in 1..n {
                    for (i, yi) in y.iter_mut().enumerate() {
                        let w = &sys.weights[i];
                        *yi = w.decay * *yi + w.w0 * u(k - 1, i) + w.w1 * u(k, i);
                    }
                    out[k] = self.eta * I * (sys.v[0][0] * y[0] + sys.v[0][1] * y[1]);
                }
            }
        }
    }

    /// Midpoint steps in z across the whole slice.
    pub(crate) fn advance(&self, probe: &mut [Complex64], drive: &[Complex64]) {
        let n = probe.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut k = vec![zero; n];
        let mut mid = vec![zero; n];
        for _ in 0..self.substeps {
            self.rhs(probe, drive, &mut k);
            for i in 0..n {
                mid[i] = probe[i] + 0.5 * self.dz * k[i];
            }
            self.rhs(&mid, drive, &mut k);
            for i in 0..n {
                probe[i] += self.dz * k[i];
            }
        }
    }
}

/// Advances probe and drive across one slice. The drive is not depleted.
pub fn integrate_slice(
    probe: &FieldSeries,
    drive: &FieldSeries,
    slice: &MediumSlice,
) -> Result<(FieldSeries, FieldSeries)> {
    if probe.len() != drive.len() || (probe.dt() - drive.dt()).abs() > 1e-12 * probe.dt() {
        return Err(Error::invalid("probe and drive must share the sampling grid"));
    }
    slice.fields.validate()?;
    slice.medium.validate()?;
    let stepper = slice.stepper(probe.dt())?;
    if slice.coherence == CoherenceModel::Full {
        let d0 = slice.fields.omega_d;
        if drive.envelope().iter().any(|d| (d - d0).norm() > 1e-12 * d0.norm().max(1.0)) {
            return Err(Error::invalid("full coherence integration needs a constant drive"));
        }
    }
    let probe = probe.to_baseband();
    let drive = drive.to_baseband();
    let mut p = probe.envelope().to_vec();
    stepper.advance(&mut p, drive.envelope());
    Ok((probe.with_envelope(p)?, drive))
}
