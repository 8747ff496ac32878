use num_complex::Complex64;

use crate::error::{Error, Result};

/// Half-width of the velocity window in standard deviations.
pub const VELOCITY_SPAN_SIGMAS: f64 = 4.0;
/// Node count of the first quadrature pass.
pub const VELOCITY_NODES: usize = 201;
/// Refinement stops when the largest change between passes, relative to
/// the largest value, drops below this.
pub const VELOCITY_TOLERANCE: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 7;

/// Trapezoid rule over Doppler shifts kv, Gaussian weights of the given
/// FWHM, truncated at ±4σ and renormalised to unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityQuadrature {
    nodes: Vec<(f64, f64)>,
}

impl VelocityQuadrature {
    pub fn gaussian(fwhm: f64, count: usize) -> Self {
        if fwhm == 0.0 || count < 2 {
            return Self { nodes: vec![(0.0, 1.0)] };
        }
        let sigma = fwhm / (2.0 * (2.0 * std::f64::consts::LN_2).sqrt());
        let half = VELOCITY_SPAN_SIGMAS * sigma;
        let h = 2.0 * half / (count - 1) as f64;
        let mut nodes: Vec<(f64, f64)> = (0..count)
            .map(|i| {
                let x = -half + i as f64 * h;
                let end = if i == 0 || i == count - 1 { 0.5 } else { 1.0 };
                (x, end * (-0.5 * (x / sigma).powi(2)).exp())
            })
            .collect();
        let total: f64 = nodes.iter().map(|n| n.1).sum();
        for n in &mut nodes {
            n.1 /= total;
        }
        Self { nodes }
    }

    /// (shift, weight) pairs; weights sum to one.
    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Evaluates `f` with 201, 401, 801, ... nodes until two passes agree.
    pub fn average(
        fwhm: f64,
        mut f: impl FnMut(&VelocityQuadrature) -> Result<Vec<Complex64>>,
    ) -> Result<Vec<Complex64>> {
        let mut count = VELOCITY_NODES;
        let mut prev = f(&Self::gaussian(fwhm, count))?;
        if fwhm == 0.0 {
            return Ok(prev);
        }
        let mut change = f64::INFINITY;
        for _ in 0..MAX_DOUBLINGS {
            count = 2 * (count - 1) + 1;
            let next = f(&Self::gaussian(fwhm, count))?;
            let scale = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let diff = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            change = if scale > 0.0 { diff / scale } else { diff };
            prev = next;
            if change < VELOCITY_TOLERANCE {
                return Ok(prev);
            }
        }
        Err(Error::Resolution {
            what: format!("velocity quadrature unconverged at {count} nodes"),
            residual: change,
        })
    }
}
