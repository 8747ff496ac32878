use num_complex::Complex64;

use super::fourier::propagate_spectrum;
use super::PropagationProblem;
use crate::error::{Error, Result};
use crate::medium::{complex_rates, coupling_eta, DopplerMode};
use crate::spectral::{spectrum_to_correlation, CorrelationFunction};

pub const MIN_CORRELATION_Z_STEPS: usize = 64;
/// |R| at the end of the lag window must be below this fraction of R(0).
pub const TAIL_DECAY: f64 = 1e-4;
const HALVING_TOLERANCE: f64 = 1e-8;
const MAX_HALVINGS: usize = 4;
/// G must relax from its initial value for at least this many 1/Re Γ̃_cb
/// before τ = 0.
const SETTLING: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationPropagation {
    /// R(τ, L) for τ ≥ 0.
    pub correlation: CorrelationFunction,
    /// G(τ, L) for τ ≥ 0.
    pub coherence: Vec<Complex64>,
    /// Slice count of the accepted solution.
    pub z_steps: usize,
    /// max_τ |R_{2n} − R_n|/R(0) of the last halving.
    pub residual: f64,
}

/// Solves ∂G/∂τ = 𝒩R − Γ̃_cb G on the uniform grid of `r`, starting from
/// `g0` at the first sample. R is interpolated linearly between samples
/// and each step is integrated exactly.
pub fn integrate_coherence(
    r: &[Complex64],
    step: f64,
    gamma_tilde: Complex64,
    population: Complex64,
    g0: Complex64,
) -> Vec<Complex64> {
    let w = CoherenceWeights::new(gamma_tilde, step, population);
    let mut g = Vec::with_capacity(r.len());
    g.push(g0);
    for n in 1..r.len() {
        let prev = g[n - 1];
        g.push(w.decay * prev + w.w0 * r[n - 1] + w.w1 * r[n]);
    }
    g
}

pub(crate) struct CoherenceWeights {
    pub(crate) decay: Complex64,
    pub(crate) w0: Complex64,
    pub(crate) w1: Complex64,
}

impl CoherenceWeights {
    /// Exact one-step weights for ẏ = −γy + c·r(t) with linear r.
    pub(crate) fn new(gamma_tilde: Complex64, h: f64, population: Complex64) -> Self {
        let x = gamma_tilde * h;
        let (phi1, psi) = phi_functions(x);
        Self {
            decay: (-x).exp(),
            w0: h * population * psi,
            w1: h * population * (phi1 - psi),
        }
    }
}

/// φ₁(x) = (1 − e^{−x})/x and ψ(x) = (1 − e^{−x}(1 + x))/x².
fn phi_functions(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.1 {
        // φ₁ = Σ (−x)ⁿ/(n+1)!, ψ = Σ (−x)ⁿ/(n!(n+2)).
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut psi = Complex64::new(0.0, 0.0);
        let mut pow = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for n in 0..14 {
            phi1 += pow / (fact * (n + 1) as f64);
            psi += pow / (fact * (n + 2) as f64);
            pow *= -x;
            fact *= (n + 1) as f64;
        }
        (phi1, psi)
    } else {
        let e = (-x).exp();
        ((1.0 - e) / x, (1.0 - e * (1.0 + x)) / (x * x))
    }
}

struct Operator {
    weights: CoherenceWeights,
    gamma_tilde: Complex64,
    population: Complex64,
    source: Complex64,
    coupling: Complex64,
    half_factor: f64,
}

impl Operator {
    /// ∂R/∂z on the symmetric lag grid.
    fn apply(&self, r: &[Complex64], out: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = r.len();
        scratch.clear();
        let mut g = self.population * r[0] / self.gamma_tilde;
        scratch.push(self.source * r[0] - self.coupling * g);
        for k in 1..n {
            g = self.weights.decay * g + self.weights.w0 * r[k - 1] + self.weights.w1 * r[k];
            scratch.push(self.source * r[k] - self.coupling * g);
        }
        for k in 0..n {
            out[k] = self.half_factor * (scratch[k] + scratch[n - 1 - k].conj());
        }
    }
}

fn integrate_z(op: &Operator, r0: &[Complex64], length: f64, steps: usize) -> Vec<Complex64> {
    let n = r0.len();
    let h = length / steps as f64;
    let mut r = r0.to_vec();
    let mut scratch = Vec::with_capacity(n);
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    for _ in 0..steps {
        op.apply(&r, &mut k1, &mut scratch);
        for i in 0..n {
            tmp[i] = r[i] + 0.5 * h * k1[i];
        }
        op.apply(&tmp, &mut k2, &mut scratch);
        for i in 0..n {
            tmp[i] = r[i] + 0.5 * h * k2[i];
        }
        op.apply(&tmp, &mut k3, &mut scratch);
        for i in 0..n {
            tmp[i] = r[i] + h * k3[i];
        }
        op.apply(&tmp, &mut k4, &mut scratch);
        for i in 0..n {
            r[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    r
}

/// Integrates ∂R/∂z = 2η𝒩R − 2η(Γ̃_cb − Γ_cb)G with G slaved to R through
/// ∂G/∂τ = 𝒩R − Γ̃_cb G, on τ ∈ [−T, T] with R(−τ) = R(τ)*.
///
/// The density exponent is Re κ, so the z derivative uses the Hermitian
/// part ½[T(τ) + T(−τ)*] of the right-hand side, scaled by the exponent
/// convention. The slice count is doubled until two solutions agree.
pub fn propagate_correlation(p: &PropagationProblem) -> Result<CorrelationPropagation> {
    p.validate()?;
    p.validate_lags()?;
    if p.doppler == DopplerMode::VelocityAverage {
        return Err(Error::invalid("the correlation route supports doppler modes off and substitution only"));
    }
    if p.z_steps < MIN_CORRELATION_Z_STEPS {
        return Err(Error::invalid(format!(
            "correlation route needs at least {MIN_CORRELATION_Z_STEPS} z-steps, got {}",
            p.z_steps
        )));
    }
    let m = &p.medium;
    let rates = complex_rates(m, &p.fields, p.doppler)?;
    let span = p.lag_step * (p.lag_count - 1) as f64;
    if rates.gamma_cb_tilde.re * span < SETTLING {
        return Err(Error::invalid(format!(
            "lag window {span:.3e} s is shorter than {SETTLING}/Re Gamma_cb_tilde"
        )));
    }

    let input = spectrum_to_correlation(&p.input, p.lag_step, p.lag_count)?.value;
    let k = p.lag_count as isize - 1;
    let r0: Vec<Complex64> = (-k..=k).map(|i| input.at_signed(i)).collect();

    let eta = coupling_eta(m);
    let op = Operator {
        weights: CoherenceWeights::new(rates.gamma_cb_tilde, p.lag_step, rates.population),
        gamma_tilde: rates.gamma_cb_tilde,
        population: rates.population,
        source: 2.0 * eta * rates.population,
        coupling: 2.0 * eta * (rates.gamma_cb_tilde - m.gamma_cb),
        half_factor: 0.5 * p.convention.factor(),
    };

    let norm = input.zero_lag().max(f64::MIN_POSITIVE);
    let mut steps = p.z_steps;
    let mut coarse = integrate_z(&op, &r0, m.length, steps);
    let mut residual = f64::INFINITY;
    let mut accepted = None;
    for _ in 0..MAX_HALVINGS {
        let fine = integrate_z(&op, &r0, m.length, 2 * steps);
        residual = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / norm;
        steps *= 2;
        coarse = fine;
        if residual < HALVING_TOLERANCE {
            accepted = Some(coarse.clone());
            break;
        }
    }
    let Some(r) = accepted else {
        return Err(Error::Resolution {
            what: format!("z-step halving unconverged at {steps} slices"),
            residual,
        });
    };

    let mid = k as usize;
    let g_full = integrate_coherence(&r, p.lag_step, rates.gamma_cb_tilde, rates.population, {
        rates.population * r[0] / rates.gamma_cb_tilde
    });
    let correlation = CorrelationFunction::new(p.lag_step, r[mid..].to_vec())?;
    let tail = correlation.tail_ratio().max(input.tail_ratio());
    if tail > TAIL_DECAY {
        return Err(Error::invalid(format!(
            "lag window too short: |R(T)|/R(0) = {tail:.3e} exceeds {TAIL_DECAY:e}"
        )));
    }
    Ok(CorrelationPropagation {
        correlation,
        coherence: g_full[mid..].to_vec(),
        z_steps: steps,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteComparison {
    /// max_τ |R_τz − R_F| / R_F(0).
    pub deviation: f64,
    pub fourier: CorrelationFunction,
    pub correlation: CorrelationPropagation,
}

/// Runs both routes and measures their disagreement in the lag domain.
pub fn compare_routes(p: &PropagationProblem) -> Result<RouteComparison> {
    let correlation = propagate_correlation(p)?;
    let out = propagate_spectrum(p)?.output;
    let fourier = spectrum_to_correlation(&out, p.lag_step, p.lag_count)?.value;
    let norm = fourier.zero_lag().max(f64::MIN_POSITIVE);
    let deviation = fourier
        .values()
        .iter()
        .zip(correlation.correlation.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / norm;
    Ok(RouteComparison {
        deviation,
        fourier,
        correlation,
    })
}
