use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::spectral::{FrequencyGrid, Spectrum};
use crate::units::TWO_PI;

use super::FieldSeries;

/// Rectangular-window periodogram P(ω_k) = |Σ_m x_m e^{iω_k t_m}|²·dt/(2πn),
/// on bins ω_k = 2πk/(n·dt) ordered from most negative to most positive.
///
/// Normalised so Σ_k P_k Δω equals the mean power of the series, matching
/// R(0) = ∫ I dω.
pub fn periodogram(series: &FieldSeries) -> Result<Spectrum> {
    let n = series.len();
    let dt = series.dt();
    let mut buf: Vec<Complex64> = series.envelope().to_vec();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    let domega = TWO_PI / (n as f64 * dt);
    let lowest = n / 2;
    let grid = FrequencyGrid::new(-(lowest as f64) * domega, domega, n)?;
    let norm = dt / (TWO_PI * n as f64);
    let density = (0..n)
        .map(|j| {
            let k = (j + n - lowest) % n;
            buf[k].norm_sqr() * norm
        })
        .collect();
    Spectrum::new(series.carrier_offset(), grid, density)
}

/// Mean periodogram with per-bin standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpectrum {
    pub mean: Spectrum,
    pub stderr: Vec<f64>,
    pub realizations: usize,
}

impl EnsembleSpectrum {
    /// Pointwise ratio self/other with first-order error propagation for
    /// independent ensembles. Bins where `other` vanishes get ratio 0 and
    /// infinite error.
    pub fn ratio(&self, other: &EnsembleSpectrum) -> Result<(Vec<f64>, Vec<f64>)> {
        if self.mean.len() != other.mean.len() {
            return Err(Error::invalid("ensembles live on different grids"));
        }
        let mut ratio = Vec::with_capacity(self.mean.len());
        let mut sigma = Vec::with_capacity(self.mean.len());
        for i in 0..self.mean.len() {
            let (a, sa) = (self.mean.density()[i], self.stderr[i]);
            let (b, sb) = (other.mean.density()[i], other.stderr[i]);
            if b > 0.0 {
                let r = a / b;
                ratio.push(r);
                sigma.push(((sa / b).powi(2) + (r * sb / b).powi(2)).sqrt());
            } else {
                ratio.push(0.0);
                sigma.push(f64::INFINITY);
            }
        }
        Ok((ratio, sigma))
    }
}

struct Partial {
    count: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Partial {
    fn merge(mut self, other: Partial) -> Partial {
        self.count += other.count;
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }
}

/// Accumulates spectra with a fixed pairwise (binary-counter) reduction tree,
/// so the result depends only on the sequence of pushed spectra.
pub struct EnsembleAccumulator {
    carrier: f64,
    grid: Option<FrequencyGrid>,
    stack: Vec<Partial>,
}

impl Default for EnsembleAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl EnsembleAccumulator {
    pub fn new() -> Self {
        Self {
            carrier: 0.0,
            grid: None,
            stack: Vec::new(),
        }
    }

    pub fn push(&mut self, s: &Spectrum) -> Result<()> {
        match self.grid {
            None => {
                self.grid = Some(*s.grid());
                self.carrier = s.carrier();
            }
            Some(g) if g == *s.grid() => {}
            Some(_) => return Err(Error::invalid("ensemble members must share one grid")),
        }
        let d = s.density();
        let mut p = Partial {
            count: 1,
            sum: d.to_vec(),
            sum_sq: d.iter().map(|v| v * v).collect(),
        };
        while self.stack.last().is_some_and(|top| top.count == p.count) {
            let top = self.stack.pop().expect("checked");
            p = top.merge(p);
        }
        self.stack.push(p);
        Ok(())
    }

    pub fn finish(mut self) -> Result<EnsembleSpectrum> {
        let grid = self.grid.ok_or_else(|| Error::invalid("empty ensemble"))?;
        let mut total = self.stack.pop().expect("grid implies at least one member");
        while let Some(p) = self.stack.pop() {
            total = p.merge(total);
        }
        let n = total.count as f64;
        let mean: Vec<f64> = total.sum.iter().map(|s| s / n).collect();
        let stderr = if total.count > 1 {
            mean.iter()
                .zip(&total.sum_sq)
                .map(|(m, sq)| ((sq / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt())
                .collect()
        } else {
            vec![f64::INFINITY; mean.len()]
        };
        Ok(EnsembleSpectrum {
            mean: Spectrum::new(self.carrier, grid, mean)?,
            stderr,
            realizations: total.count,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monochromatic_line_is_one_bin() {
        let n = 256;
        let dt = 1e-6;
        let domega = TWO_PI / (n as f64 * dt);
        let k0 = 5.0;
        // e^{−iωt} convention: positive offset shows up at positive frequency.
        let env = (0..n)
            .map(|m| Complex64::from_polar(1.0, -k0 * domega * dt * m as f64))
            .collect();
        let s = periodogram(&FieldSeries::new(dt, env, 0.0).unwrap()).unwrap();
        let (ipk, p) = s.peak();
        assert!((s.grid().omega(ipk) - k0 * domega).abs() < 1e-6 * domega);
        let rest: f64 = s.density().iter().enumerate().filter(|(i, _)| *i != ipk).map(|(_, d)| d).sum();
        assert!(rest < 1e-20 * p);
        assert!((s.integral() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pairwise_reduction_mean_and_stderr() {
        let g = FrequencyGrid::centered(1.0, 8).unwrap();
        let mut acc = EnsembleAccumulator::new();
        for v in [1.0, 2.0, 3.0, 4.0, 5.0] {
            acc.push(&Spectrum::new(0.0, g, vec![v; 8]).unwrap()).unwrap();
        }
        let e = acc.finish().unwrap();
        assert_eq!(e.realizations, 5);
        assert!((e.mean.density()[0] - 3.0).abs() < 1e-12);
        // Sample std 1.5811, stderr = 0.7071.
        assert!((e.stderr[0] - (2.5f64 / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let mut acc = EnsembleAccumulator::new();
        acc.push(&Spectrum::new(0.0, FrequencyGrid::centered(1.0, 8).unwrap(), vec![1.0; 8]).unwrap())
            .unwrap();
        let other = Spectrum::new(0.0, FrequencyGrid::centered(2.0, 8).unwrap(), vec![1.0; 8]).unwrap();
        assert!(acc.push(&other).is_err());
    }
}
