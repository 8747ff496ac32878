use crate::error::{Error, Result};

use super::FrequencyGrid;

/// Nonnegative spectral density sampled on a [`FrequencyGrid`] of offsets
/// from the carrier `carrier` (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    carrier: f64,
    grid: FrequencyGrid,
    density: Vec<f64>,
}

impl Spectrum {
    pub fn new(carrier: f64, grid: FrequencyGrid, density: Vec<f64>) -> Result<Self> {
        if density.len() != grid.count() {
            return Err(Error::invalid(format!(
                "density has {} samples for a {}-point grid",
                density.len(),
                grid.count()
            )));
        }
        if let Some(bad) = density.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::invalid(format!("density sample {bad} is not finite and nonnegative")));
        }
        Ok(Self { carrier, grid, density })
    }

    /// Evaluates `f(offset)` on every grid point.
    pub fn from_fn(carrier: f64, grid: FrequencyGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let density = grid.omegas().map(f).collect();
        Self::new(carrier, grid, density)
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    /// (offset, density) pairs.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.omegas().zip(self.density.iter().copied())
    }

    /// Index and value of the largest sample. Ties resolve to the first.
    pub fn peak(&self) -> (usize, f64) {
        let mut best = (0, self.density[0]);
        for (i, &d) in self.density.iter().enumerate().skip(1) {
            if d > best.1 {
                best = (i, d);
            }
        }
        best
    }

    /// Trapezoid integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        let n = self.density.len();
        let inner: f64 = self.density[1..n - 1].iter().sum();
        (inner + 0.5 * (self.density[0] + self.density[n - 1])) * self.grid.step()
    }

    /// Multiplies the density pointwise by `factor(offset)`.
    pub fn filtered(&self, factor: impl Fn(f64) -> f64) -> Result<Self> {
        let density = self.points().map(|(w, d)| d * factor(w)).collect();
        Self::new(self.carrier, self.grid, density)
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        self.filtered(|_| k)
    }

    /// Density divided by its peak value (unchanged if the peak is zero).
    pub fn normalized(&self) -> Self {
        let (_, p) = self.peak();
        if p > 0.0 {
            Self {
                density: self.density.iter().map(|d| d / p).collect(),
                ..self.clone()
            }
        } else {
            self.clone()
        }
    }

    /// Averages consecutive groups of `band` samples; trailing samples that
    /// do not fill a group are dropped.
    pub fn rebinned(&self, band: usize) -> Result<Self> {
        if band == 0 {
            return Err(Error::invalid("band must be at least one bin"));
        }
        if band == 1 {
            return Ok(self.clone());
        }
        let groups = self.len() / band;
        let g = &self.grid;
        let grid = FrequencyGrid::new(
            g.start() + 0.5 * (band as f64 - 1.0) * g.step(),
            g.step() * band as f64,
            groups,
        )?;
        let density = self
            .density
            .chunks_exact(band)
            .map(|c| c.iter().sum::<f64>() / band as f64)
            .collect();
        Self::new(self.carrier, grid, density)
    }

    /// Like [`Spectrum::rebinned`], with leading samples dropped so that one
    /// band is centered on the grid point nearest `center` (an offset).
    pub fn rebinned_about(&self, band: usize, center: f64) -> Result<Self> {
        if band == 0 {
            return Err(Error::invalid("band must be at least one bin"));
        }
        let i0 = self.grid.nearest(center) as isize;
        let skip = (i0 - (band / 2) as isize).rem_euclid(band as isize) as usize;
        self.slice(skip, self.len())?.rebinned(band)
    }

    /// The samples with offsets in [lo, hi].
    pub fn restricted(&self, lo: f64, hi: f64) -> Result<Self> {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| (lo..=hi).contains(&self.grid.omega(i)))
            .collect();
        match (idx.first(), idx.last()) {
            (Some(&a), Some(&b)) => self.slice(a, b + 1),
            _ => Err(Error::invalid(format!("no samples in [{lo}, {hi}]"))),
        }
    }

    fn slice(&self, a: usize, b: usize) -> Result<Self> {
        let grid = FrequencyGrid::new(self.grid.omega(a), self.grid.step(), b - a)?;
        Self::new(self.carrier, grid, self.density[a..b].to_vec())
    }

    /// Edge density relative to peak (largest of the two edges).
    pub fn edge_ratio(&self) -> f64 {
        let (_, p) = self.peak();
        if p == 0.0 {
            return 0.0;
        }
        self.density[0].max(self.density[self.len() - 1]) / p
    }
}

fn check_width(name: &str, w: f64) -> Result<()> {
    if w > 0.0 && w.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {w}")))
    }
}

/// Incident probe lineshape exp(−(ω−ω₀)²/ω_w²), unit peak.
pub fn gaussian_spectrum(carrier: f64, omega_w: f64, grid: FrequencyGrid) -> Result<Spectrum> {
    check_width("gaussian width", omega_w)?;
    Spectrum::from_fn(carrier, grid, |w| (-(w / omega_w).powi(2)).exp())
}

/// Transmitted lineshape γ²/((ω−ω₀)² + γ²), unit peak; `gamma` is the HWHM.
pub fn lorentzian_spectrum(carrier: f64, gamma: f64, grid: FrequencyGrid) -> Result<Spectrum> {
    check_width("lorentzian width", gamma)?;
    let g2 = gamma * gamma;
    Spectrum::from_fn(carrier, grid, |w| g2 / (w * w + g2))
}

/// Gaussian width parameter ω_w for a given FWHM: FWHM = 2√(ln 2)·ω_w.
pub fn gaussian_width_from_fwhm(fwhm: f64) -> f64 {
    fwhm / (2.0 * std::f64::consts::LN_2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::centered(0.25, 81).unwrap()
    }

    #[test]
    fn gaussian_values() {
        let s = gaussian_spectrum(10.0, 2.0, grid()).unwrap();
        let (i, p) = s.peak();
        assert_eq!(p, 1.0);
        assert_eq!(s.grid().omega(i), 0.0);
        let at = |w: f64| s.density()[s.grid().nearest(w)];
        assert_relative_eq!(at(2.0), (-1.0f64).exp(), epsilon = 1e-15);
        assert_relative_eq!(at(-2.0), 0.367_879_441_171_442_3, epsilon = 1e-15);
    }

    #[test]
    fn lorentzian_values() {
        let s = lorentzian_spectrum(0.0, 1.5, grid()).unwrap();
        let at = |w: f64| s.density()[s.grid().nearest(w)];
        assert_eq!(at(0.0), 1.0);
        assert_relative_eq!(at(1.5), 0.5, epsilon = 1e-15);
        assert_relative_eq!(at(-1.5), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn nonpositive_widths_rejected() {
        assert!(matches!(gaussian_spectrum(0.0, 0.0, grid()), Err(Error::InvalidParameter(_))));
        assert!(matches!(lorentzian_spectrum(0.0, -1.0, grid()), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn rejects_negative_density() {
        let g = FrequencyGrid::centered(1.0, 8).unwrap();
        assert!(Spectrum::new(0.0, g, vec![1.0, -1e-3, 0., 0., 0., 0., 0., 0.]).is_err());
        assert!(Spectrum::new(0.0, g, vec![0.0; 7]).is_err());
    }

    #[test]
    fn trapezoid_integral_of_gaussian() {
        let g = FrequencyGrid::spanning(20.0, 2001).unwrap();
        let s = gaussian_spectrum(0.0, 2.0, g).unwrap();
        assert_relative_eq!(s.integral(), 2.0 * std::f64::consts::PI.sqrt(), max_relative = 1e-12);
    }
}
