//! Computations behind the figure, run and validation commands. Nothing
//! here touches the filesystem.

use eitline_core::mc::{analytic_band_transfer, ensemble_beat_spectrum, McConfig, McResult};
use eitline_core::medium::{
    closed_form_width, eit_transmission_scan, filter_half_width, optical_depth, AtomicMedium, DopplerMode, EitScan,
    ExponentConvention, FieldConfig,
};
use eitline_core::propagation::{
    adiabatic_rate_check, compare_routes, lag_matched_grid, propagate_correlation, propagate_spectrum,
    thick_medium_spectrum, PropagationProblem,
};
use eitline_core::spectral::{
    correlation_to_spectrum, fit_lineshape, gaussian_spectrum, gaussian_width_from_fwhm,
    spectrum_to_correlation, CorrelationFunction, FitResult, FrequencyGrid, LineModel, Spectrum,
};
use eitline_core::Result;

use crate::config::{input_spectrum, Resolved, Route};

/// Below this peak the EIT scan is treated as featureless.
const NO_RESONANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Propagated {
    pub output: Spectrum,
    pub correlation: Option<CorrelationFunction>,
}

/// Transmitted spectrum on `grid` for the configured route.
pub fn propagate_onto(r: &Resolved, fields: &FieldConfig, grid: FrequencyGrid) -> Result<Propagated> {
    let problem = |input| {
        PropagationProblem::new(r.medium, *fields, r.doppler, r.convention, input)
            .with_z_steps(r.raw.propagation.z_steps)
            .with_lags(r.raw.propagation.lag_step_ns * 1e-9, r.raw.propagation.lag_count)
    };
    match r.route {
        Route::Fourier => {
            let input = input_spectrum(r.input_model, r.input_fwhm, grid).map_err(to_core)?;
            Ok(Propagated {
                output: propagate_spectrum(&problem(input))?.output,
                correlation: None,
            })
        }
        Route::Thick => {
            let input = input_spectrum(r.input_model, r.input_fwhm, grid).map_err(to_core)?;
            Ok(Propagated {
                output: thick_medium_spectrum(&r.medium, fields.drive_power(), &input)?,
                correlation: None,
            })
        }
        Route::Correlation => {
            let p = &r.raw.propagation;
            let wide = lag_matched_grid(p.lag_step_ns * 1e-9, p.lag_count, r.input_grid.max_abs())?;
            let input = input_spectrum(r.input_model, r.input_fwhm, wide).map_err(to_core)?;
            let out = propagate_correlation(&problem(input))?;
            Ok(Propagated {
                output: correlation_to_spectrum(&out.correlation, grid)?.value,
                correlation: Some(out.correlation),
            })
        }
    }
}

fn to_core(e: crate::error::CliError) -> eitline_core::Error {
    eitline_core::Error::InvalidParameter(e.message)
}

#[derive(Debug, Clone)]
pub struct Figure2 {
    pub input: Spectrum,
    pub output: Spectrum,
    pub input_fit: FitResult,
    pub output_fit: FitResult,
    /// Gaussian fit of the output, for model discrimination.
    pub output_gaussian_fit: FitResult,
    /// Closed-form width Δω_bs.
    pub predicted_width: f64,
    /// Full width at half maximum of the thick-medium filter.
    pub filter_fwhm: f64,
    pub narrowing: f64,
}

/// The incident (off-resonance) spectrum and its Gaussian fit.
pub fn figure2_input(r: &Resolved) -> Result<(Spectrum, FitResult)> {
    let input = input_spectrum(r.input_model, r.input_fwhm, r.input_grid).map_err(to_core)?;
    let fit = fit_lineshape(&input, LineModel::Gaussian, None)?;
    Ok((input, fit))
}

pub fn figure2(r: &Resolved) -> Result<Figure2> {
    let (input, input_fit) = figure2_input(r)?;
    let output = propagate_onto(r, &r.fields, r.output_grid)?.output;
    let output_fit = fit_lineshape(&output, LineModel::Lorentzian, None)?;
    let output_gaussian_fit = fit_lineshape(&output, LineModel::Gaussian, None)?;
    let omega_sq = r.fields.drive_power();
    Ok(Figure2 {
        narrowing: input_fit.fwhm() / output_fit.fwhm(),
        predicted_width: closed_form_width(&r.medium, omega_sq)?,
        filter_fwhm: 2.0 * filter_half_width(&r.medium, omega_sq)?,
        input,
        output,
        input_fit,
        output_fit,
        output_gaussian_fit,
    })
}

#[derive(Debug, Clone)]
pub struct Figure3 {
    pub scan: EitScan,
    /// Transmitted-noise spectrum normalised to unit peak.
    pub noise: Spectrum,
    pub eit_fit: Option<FitResult>,
    pub noise_fit: Option<FitResult>,
    /// γ_n/γ_EIT.
    pub ratio: Option<f64>,
    pub note: Option<&'static str>,
}

pub fn figure3(r: &Resolved) -> Result<Figure3> {
    figure3_with(r, &r.medium)
}

/// As [`figure3`] for another medium (used by parameter sweeps).
pub fn figure3_with(r: &Resolved, medium: &AtomicMedium) -> Result<Figure3> {
    let rr = Resolved {
        medium: *medium,
        ..r.clone()
    };
    let scan = eit_transmission_scan(medium, &r.fields, r.doppler, r.convention, r.output_grid)?;
    let noise = propagate_onto(&rr, &r.fields, r.output_grid)?.output.normalized();
    if scan.resonance()?.peak().1 <= NO_RESONANCE {
        return Ok(Figure3 {
            scan,
            noise,
            eit_fit: None,
            noise_fit: None,
            ratio: None,
            note: Some("no-resonance"),
        });
    }
    let eit_fit = scan.eit_fit()?;
    let noise_fit = fit_lineshape(&noise, LineModel::Lorentzian, None)?;
    Ok(Figure3 {
        ratio: Some(noise_fit.width / eit_fit.width),
        scan,
        noise,
        eit_fit: Some(eit_fit),
        noise_fit: Some(noise_fit),
        note: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub omega_d_sq: f64,
    pub fitted_fwhm: f64,
    pub predicted_width: f64,
    pub validity_ratio: f64,
    pub included: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure4 {
    pub points: Vec<SweepPoint>,
    pub fit: LinearFit,
}

/// Why a sweep cannot be run, checked before any computation.
pub fn sweep_problem(sweep: &[f64]) -> Option<String> {
    if sweep.len() < 6 {
        return Some(format!("figure4 needs at least 6 drive values, got {}", sweep.len()));
    }
    if sweep.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Some("figure4 drive values must be positive".into());
    }
    let sq: Vec<f64> = sweep.iter().map(|v| v * v).collect();
    let (lo, hi) = sq.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    if hi < 10.0 * lo {
        return Some(format!("|Omega_d|^2 spans a factor {:.3}, less than one decade", hi / lo));
    }
    None
}

pub fn figure4(r: &Resolved) -> Result<Figure4> {
    let mut points = Vec::with_capacity(r.sweep.len());
    for &od in &r.sweep {
        let fields = r.fields.with_drive(od);
        let omega_d_sq = fields.drive_power();
        let predicted_width = closed_form_width(&r.medium, omega_d_sq)?;
        let grid = FrequencyGrid::spanning(r.raw.figure4.grid_widths * predicted_width, r.output_grid.count())?;
        let input = input_spectrum(r.input_model, r.input_fwhm, grid).map_err(to_core)?;
        let report = adiabatic_rate_check(&PropagationProblem::new(r.medium, fields, r.doppler, r.convention, input))?;
        let out = propagate_onto(r, &fields, grid)?.output;
        let fit = fit_lineshape(&out, LineModel::Lorentzian, None)?;
        points.push(SweepPoint {
            omega_d_sq,
            fitted_fwhm: fit.fwhm(),
            predicted_width,
            validity_ratio: report.validity_ratio,
            included: report.valid,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|p| p.included).map(|p| (p.omega_d_sq, p.fitted_fwhm)).unzip();
    let fit = linear_fit(&xs, &ys)?;
    Ok(Figure4 { points, fit })
}


/// Ordinary least squares y = slope·x + intercept.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() < 2 {
        return Err(eitline_core::Error::InvalidParameter(format!(
            "linear fit needs at least 2 included points, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(LinearFit {
        slope,
        intercept,
        r_squared: if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 },
    })
}

/// Gaussian input on a grid matched to the lag window of the correlation
/// route, spanning ±6.5 standard deviations of the line.
pub fn correlation_problem(
    medium: AtomicMedium,
    fields: FieldConfig,
    doppler: DopplerMode,
    convention: ExponentConvention,
    input_fwhm: f64,
) -> Result<PropagationProblem> {
    let (lag_step, lag_count) = (5e-8, 8001);
    let sigma = gaussian_width_from_fwhm(input_fwhm) / 2f64.sqrt();
    let grid = lag_matched_grid(lag_step, lag_count, 6.5 * sigma)?;
    let input = gaussian_spectrum(0.0, gaussian_width_from_fwhm(input_fwhm), grid)?;
    Ok(PropagationProblem::new(medium, fields, doppler, convention, input)
        .with_lags(lag_step, lag_count)
        .with_z_steps(128))
}

/// Max relative deviation between the Fourier and correlation routes.
pub fn route_deviation(p: &PropagationProblem) -> Result<f64> {
    Ok(compare_routes(p)?.deviation)
}

/// HWHM of the thick-medium filter over Δω_bs at optical depth `depth`.
pub fn asymptote_ratio(medium: &AtomicMedium, omega_sq: f64, depth: f64) -> Result<f64> {
    let m = medium.with_density(medium.density * depth / optical_depth(medium));
    Ok(filter_half_width(&m, omega_sq)? / closed_form_width(&m, omega_sq)?)
}

/// Worst relative parameter error of fits to exact model lines.
pub fn fit_recovery_error() -> Result<f64> {
    let mut worst = 0.0f64;
    for (model, amp, center, width) in
        [(LineModel::Gaussian, 2.5, 0.3, 1.2), (LineModel::Lorentzian, 0.7, -0.4, 0.8)]
    {
        let grid = FrequencyGrid::spanning(12.0, 601)?;
        let s = Spectrum::from_fn(0.0, grid, |w| model.eval(w, amp, center, width))?;
        let f = fit_lineshape(&s, model, None)?;
        worst = worst
            .max((f.amplitude / amp - 1.0).abs())
            .max((f.width / width - 1.0).abs())
            .max((f.center - center).abs() / width);
    }
    Ok(worst)
}

/// Spectrum → correlation → spectrum error of the reference Gaussian,
/// relative to its peak.
pub fn round_trip_error(omega_w: f64) -> Result<f64> {
    let grid = FrequencyGrid::spanning(8.0 * omega_w, 801)?;
    let s = gaussian_spectrum(0.0, omega_w, grid)?;
    let r = spectrum_to_correlation(&s, 0.05 / omega_w, 301)?.value;
    let back = correlation_to_spectrum(&r, grid)?.value;
    Ok(back.density().iter().zip(s.density()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct McRun {
    pub result: McResult,
    pub analytic: Vec<f64>,
    pub fit: FitResult,
    pub fit_stderr: f64,
    /// Fitted FWHM with twice the slices and its relative change.
    pub doubled: Option<(f64, f64)>,
}

pub fn mc_run(cfg: &McConfig, half_window: f64, slice_check: bool) -> Result<McRun> {
    let result = ensemble_beat_spectrum(cfg)?;
    let analytic = analytic_band_transfer(cfg, result.grid())?;
    let (fit, fit_stderr) = result.fit_width(LineModel::Lorentzian, half_window)?;
    let doubled = if slice_check {
        let w = ensemble_beat_spectrum(&cfg.with_slices(2 * cfg.slices))?
            .fit_width(LineModel::Lorentzian, half_window)?
            .0
            .fwhm();
        Some((w, ((w - fit.fwhm()) / fit.fwhm()).abs()))
    } else {
        None
    };
    Ok(McRun {
        result,
        analytic,
        fit,
        fit_stderr,
        doubled,
    })
}

#[derive(Debug, Clone)]
pub struct Independence {
    pub omegas: Vec<f64>,
    pub transfer: [Vec<f64>; 2],
    pub sigma: [Vec<f64>; 2],
    pub analytic: Vec<f64>,
    /// Largest |T₁ − T₂|/√(σ₁² + σ₂²) inside the window.
    pub pair_z: f64,
    /// Largest |T_k − T_analytic|/σ_k inside the window.
    pub analytic_z: [f64; 2],
    pub max_power_ratio: f64,
}

/// Offset that decorrelates the second ensemble from the first.
const SECOND_RUN_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Transfer estimates for diffusion D and factor·D compared band by band
/// over |ω| ≤ half_window.
pub fn mc_independence(base: &McConfig, factor: f64, half_window: f64) -> Result<Independence> {
    let first = ensemble_beat_spectrum(base)?;
    let second = ensemble_beat_spectrum(&McConfig {
        probe_diffusion: factor * base.probe_diffusion,
        seed: base.seed ^ SECOND_RUN_SALT,
        ..base.clone()
    })?;
    let grid = *first.grid();
    let analytic = analytic_band_transfer(base, &grid)?;
    let inside: Vec<usize> = (0..grid.count()).filter(|&i| grid.omega(i).abs() <= half_window).collect();
    let runs = [&first, &second];
    let pair_z = inside
        .iter()
        .map(|&i| {
            let s = (first.transfer_sigma[i].powi(2) + second.transfer_sigma[i].powi(2)).sqrt();
            (first.transfer[i] - second.transfer[i]).abs() / s
        })
        .fold(0.0, nan_max);
    let analytic_z = runs.map(|r| {
        inside
            .iter()
            .map(|&i| (r.transfer[i] - analytic[i]).abs() / r.transfer_sigma[i])
            .fold(0.0, nan_max)
    });
    Ok(Independence {
        omegas: inside.iter().map(|&i| grid.omega(i)).collect(),
        transfer: runs.map(|r| inside.iter().map(|&i| r.transfer[i]).collect()),
        sigma: runs.map(|r| inside.iter().map(|&i| r.transfer_sigma[i]).collect()),
        analytic: inside.iter().map(|&i| analytic[i]).collect(),
        pair_z,
        analytic_z,
        max_power_ratio: first.max_power_ratio.max(second.max_power_ratio),
    })
}

/// Maximum that keeps NaN, so an undefined z-score fails its check.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Both model fits of a spectrum.
pub fn fit_both(s: &Spectrum) -> Result<(FitResult, FitResult)> {
    Ok((fit_lineshape(s, LineModel::Gaussian, None)?, fit_lineshape(s, LineModel::Lorentzian, None)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_of_a_line_is_exact() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-12 && (f.intercept + 1.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn sweep_size_rules() {
        assert!(sweep_problem(&[1.0]).is_some());
        assert!(sweep_problem(&[1.0, 1.1, 1.2, 1.3, 1.4, 1.5]).is_some());
        assert!(sweep_problem(&[1.0, 1.3, 1.6, 2.0, 2.5, 3.2]).is_none());
    }
}
