use crate::error::{Error, Result};

use super::Spectrum;

/// Full width at half maximum, from linear interpolation between the grid
/// points bracketing each half-maximum crossing.
pub fn fwhm_estimate(s: &Spectrum) -> Result<f64> {
    let d = s.density();
    let n = d.len();
    let (ipk, peak) = s.peak();
    if !(peak > 0.0) {
        return Err(Error::UnresolvedWidth("spectrum has no positive peak".into()));
    }
    if ipk == 0 || ipk == n - 1 {
        return Err(Error::UnresolvedWidth("maximum sits on the grid boundary".into()));
    }
    let half = 0.5 * peak;

    let mut left = None;
    for i in (0..ipk).rev() {
        if d[i] < half {
            left = Some(i);
            break;
        }
    }
    let mut right = None;
    for i in ipk + 1..n {
        if d[i] < half {
            right = Some(i);
            break;
        }
    }
    let (Some(l), Some(r)) = (left, right) else {
        return Err(Error::UnresolvedWidth(
            "density does not fall below half maximum on both sides".into(),
        ));
    };

    if d[..l].iter().chain(&d[r + 1..]).any(|&v| v >= half) {
        return Err(Error::Multimodal("disjoint regions above half maximum".into()));
    }

    let g = s.grid();
    let cross = |lo: usize, hi: usize| {
        let (w0, w1) = (g.omega(lo), g.omega(hi));
        w0 + (half - d[lo]) * (w1 - w0) / (d[hi] - d[lo])
    };
    Ok(cross(r - 1, r) - cross(l, l + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gaussian_spectrum, gaussian_width_from_fwhm, lorentzian_spectrum, FrequencyGrid};
    use crate::units::khz;

    #[test]
    fn lorentzian_fwhm_is_twice_hwhm() {
        let gamma = khz(4.6);
        let g = FrequencyGrid::spanning(20.0 * gamma, 4001).unwrap();
        let s = lorentzian_spectrum(0.0, gamma, g).unwrap();
        let w = fwhm_estimate(&s).unwrap();
        assert!((w - khz(9.2)).abs() < g.step(), "{w}");
    }

    #[test]
    fn gaussian_fwhm_matches_980_khz() {
        let omega_w = gaussian_width_from_fwhm(khz(980.0));
        assert!((omega_w - khz(588.6)).abs() < khz(0.1));
        let g = FrequencyGrid::spanning(5.0 * omega_w, 2001).unwrap();
        let s = gaussian_spectrum(0.0, omega_w, g).unwrap();
        let w = fwhm_estimate(&s).unwrap();
        assert!((w - khz(980.0)).abs() < g.step());
    }

    #[test]
    fn flat_spectrum_is_unresolved() {
        let g = FrequencyGrid::centered(1.0, 32).unwrap();
        let s = Spectrum::new(0.0, g, vec![1.0; 32]).unwrap();
        assert!(matches!(fwhm_estimate(&s), Err(Error::UnresolvedWidth(_))));
    }

    #[test]
    fn one_sided_crossing_is_unresolved() {
        let g = FrequencyGrid::centered(1.0, 32).unwrap();
        let d: Vec<f64> = (0..32).map(|i| if i < 20 { 1.0 - 0.01 * (i as f64 - 10.0).abs() } else { 0.1 }).collect();
        let s = Spectrum::new(0.0, g, d).unwrap();
        assert!(matches!(fwhm_estimate(&s), Err(Error::UnresolvedWidth(_))));
    }

    #[test]
    fn two_peaks_are_multimodal() {
        let g = FrequencyGrid::centered(0.1, 401).unwrap();
        let s = Spectrum::from_fn(0.0, g, |w| {
            (-(w + 8.0f64).powi(2)).exp() + 0.9 * (-(w - 8.0f64).powi(2)).exp()
        })
        .unwrap();
        assert!(matches!(fwhm_estimate(&s), Err(Error::Multimodal(_))));
    }
}
