use eitline_core::constants::reference_input_fwhm;
use eitline_core::medium::*;
use eitline_core::propagation::*;
use eitline_core::spectral::*;
use eitline_core::units::{khz, mhz};
use num_complex::Complex64;

fn cell() -> AtomicMedium {
    AtomicMedium::reference_cell()
}

fn paper_drive() -> f64 {
    drive_for_width(&cell(), khz(4.6)).unwrap()
}

fn gaussian_input(fwhm: f64, grid: FrequencyGrid) -> Spectrum {
    gaussian_spectrum(0.0, gaussian_width_from_fwhm(fwhm), grid).unwrap()
}

fn problem(m: AtomicMedium, f: FieldConfig, input: Spectrum) -> PropagationProblem {
    PropagationProblem::new(m, f, DopplerMode::Substitution, ExponentConvention::Paper, input)
}

#[test]
fn zero_length_is_the_identity() {
    let input = gaussian_input(reference_input_fwhm(), FrequencyGrid::spanning(mhz(3.0), 401).unwrap());
    let p = problem(cell().with_length(0.0), FieldConfig::resonant(paper_drive(), 0.0), input.clone());
    let out = propagate_spectrum(&p).unwrap();
    assert_eq!(out.output, input);
    assert!(out.transfer.iter().all(|&t| t == 1.0));
}

#[test]
fn coherence_diagnostic_follows_the_algebraic_relation() {
    let m = cell().with_gamma_cb(100.0);
    let f = FieldConfig::resonant(paper_drive(), khz(1.0));
    let input = gaussian_input(khz(50.0), FrequencyGrid::spanning(khz(100.0), 201).unwrap());
    let out = propagate_spectrum(&problem(m, f, input)).unwrap();
    let r = complex_rates(&m, &f, DopplerMode::Substitution).unwrap();
    for (i, (w, d)) in out.output.points().enumerate() {
        let want = r.population * d / (r.gamma_cb_tilde - Complex64::new(0.0, w));
        assert!((out.coherence[i] - want).norm() <= 1e-12 * want.norm().max(1e-300));
    }
}

#[test]
fn output_never_exceeds_input() {
    let input = gaussian_input(reference_input_fwhm(), FrequencyGrid::spanning(mhz(3.0), 801).unwrap());
    for gcb in [0.0, 50.0, 5e3] {
        let p = problem(cell().with_gamma_cb(gcb), FieldConfig::resonant(paper_drive(), khz(2.0)), input.clone());
        let out = propagate_spectrum(&p).unwrap();
        for (a, b) in out.output.density().iter().zip(input.density()) {
            assert!(a <= b);
        }
    }
}

#[test]
fn closed_form_filter_matches_the_general_route() {
    let m = cell();
    let od = paper_drive();
    let input = gaussian_input(reference_input_fwhm(), FrequencyGrid::spanning(mhz(3.0), 2001).unwrap());
    let general = propagate_spectrum(&problem(m, FieldConfig::resonant(od, 0.0), input.clone())).unwrap();
    let closed = thick_medium_spectrum(&m, od * od, &input).unwrap();
    for (a, b) in closed.density().iter().zip(general.output.density()) {
        assert!((a - b).abs() <= 1e-6 * b.max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn closed_form_filter_limits() {
    let m = cell();
    let od2 = paper_drive().powi(2);
    assert_eq!(thick_medium_transfer(&m, od2, 0.0), 1.0);
    let wing = thick_medium_transfer(&m, od2, 1e15);
    assert!((wing / (-optical_depth(&m)).exp() - 1.0).abs() < 1e-9);
}

#[test]
fn transfer_does_not_depend_on_the_input_shape() {
    let grid = FrequencyGrid::spanning(khz(200.0), 801).unwrap();
    let gauss = gaussian_input(khz(980.0), grid);
    let lorentz = lorentzian_spectrum(0.0, khz(30.0), grid).unwrap();
    let f = FieldConfig::resonant(paper_drive(), khz(1.0));
    for mode in [DopplerMode::Substitution, DopplerMode::Off] {
        let mut pg = problem(cell().with_gamma_cb(20.0), f, gauss.clone());
        pg.doppler = mode;
        let pl = PropagationProblem {
            input: lorentz.clone(),
            ..pg.clone()
        };
        let a = propagate_spectrum(&pg).unwrap();
        let b = propagate_spectrum(&pl).unwrap();
        for i in 0..grid.count() {
            let ra = a.output.density()[i] / gauss.density()[i];
            let rb = b.output.density()[i] / lorentz.density()[i];
            assert!((ra - rb).abs() <= 1e-9 * ra.max(1e-300));
        }
    }
}

#[test]
fn log_transfer_is_linear_in_length() {
    let grid = FrequencyGrid::spanning(khz(100.0), 201).unwrap();
    let input = gaussian_input(khz(980.0), grid);
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let t1 = propagate_spectrum(&problem(cell(), f, input.clone())).unwrap().transfer;
    let t2 = propagate_spectrum(&problem(cell().with_length(2.0 * cell().length), f, input)).unwrap().transfer;
    for (a, b) in t1.iter().zip(&t2) {
        if *a < 1.0 {
            assert!((b.ln() / a.ln() - 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn fitted_width_grows_with_drive_power() {
    let m = cell();
    let base = paper_drive().powi(2);
    let top = closed_form_width(&m, 10.0 * base).unwrap();
    let grid = FrequencyGrid::spanning(20.0 * top, 4001).unwrap();
    let input = gaussian_input(reference_input_fwhm(), grid);
    let mut prev = 0.0;
    for k in 0..8 {
        let od2 = base * 10f64.powf(k as f64 / 7.0);
        let out = propagate_spectrum(&problem(m, FieldConfig::resonant(od2.sqrt(), 0.0), input.clone())).unwrap();
        let w = fit_lineshape(&out.output, LineModel::Lorentzian, None).unwrap().fwhm();
        assert!(w >= prev, "{k}: {w} < {prev}");
        prev = w;
    }
}

#[test]
fn reference_cell_narrows_by_more_than_a_hundred() {
    let m = cell();
    let wide = gaussian_input(reference_input_fwhm(), FrequencyGrid::spanning(mhz(3.0), 2001).unwrap());
    let fin = fit_lineshape(&wide, LineModel::Gaussian, None).unwrap().fwhm();
    assert!((fin / reference_input_fwhm() - 1.0).abs() < 1e-6);

    let bs = closed_form_width(&m, paper_drive().powi(2)).unwrap();
    let narrow = gaussian_input(reference_input_fwhm(), FrequencyGrid::spanning(20.0 * bs, 2001).unwrap());
    let out = propagate_spectrum(&problem(m, FieldConfig::resonant(paper_drive(), 0.0), narrow)).unwrap();
    let fout = fit_lineshape(&out.output, LineModel::Lorentzian, None).unwrap().fwhm();
    assert!(fin / fout >= 100.0, "{}", fin / fout);
}

#[test]
fn adiabatic_rate_report() {
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let input = gaussian_input(khz(100.0), FrequencyGrid::spanning(khz(200.0), 101).unwrap());

    let rep = adiabatic_rate_check(&problem(cell(), f, input.clone())).unwrap();
    assert_eq!(rep.adiabatic_rate, Complex64::new(0.0, 0.0));
    assert_eq!(rep.kappa_zero, Complex64::new(0.0, 0.0));
    assert!(rep.valid && rep.validity_ratio.is_infinite());

    let rep = adiabatic_rate_check(&problem(cell().with_gamma_cb(300.0), f, input.clone())).unwrap();
    assert!(rep.consistency() <= 1e-12 * rep.kappa_zero.norm());

    // |Ω_d|² = Γ_ab·Γ_cb sits at validity ratio one.
    let gcb = 10.0;
    let od = (cell().doppler_width * gcb).sqrt();
    let rep = adiabatic_rate_check(&problem(cell().with_gamma_cb(gcb), FieldConfig::resonant(od, 0.0), input)).unwrap();
    assert!((rep.validity_ratio - 1.0).abs() < 1e-12);
    assert!(!rep.valid);
}

#[test]
fn velocity_average_comparison() {
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let grid = FrequencyGrid::spanning(khz(40.0), 161).unwrap();
    let cmp = doppler_average_transfer(&cell(), &f, ExponentConvention::Paper, grid).unwrap();
    let d = cmp.average.density();
    let n = d.len();
    for i in 0..n {
        assert!((d[i] - d[n - 1 - i]).abs() <= 1e-9);
    }
    assert!(cmp.max_relative_deviation.is_finite());
    assert!(cmp.width_discrepancy().is_finite() && cmp.average_width > 0.0);

    let still = AtomicMedium {
        doppler_width: 0.0,
        ..cell()
    };
    // Without motion the average is the homogeneous medium itself.
    let h = eit_transmission_scan(&still, &f, DopplerMode::Off, ExponentConvention::Paper, grid).unwrap();
    let v = eit_transmission_scan(&still, &f, DopplerMode::VelocityAverage, ExponentConvention::Paper, grid).unwrap();
    assert_eq!(h.transmission(), v.transmission());
}

fn correlation_problem(m: AtomicMedium, f: FieldConfig, fwhm: f64, convention: ExponentConvention) -> PropagationProblem {
    let sigma = gaussian_width_from_fwhm(fwhm) / 2f64.sqrt();
    let lag_step = 5e-8;
    let lag_count = 8001;
    let input = gaussian_input(fwhm, lag_matched_grid(lag_step, lag_count, 6.5 * sigma).unwrap());
    PropagationProblem {
        convention,
        ..problem(m, f, input)
    }
    .with_lags(lag_step, lag_count)
}

#[test]
fn correlation_route_starts_from_the_input_transform() {
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let p = correlation_problem(cell().with_length(0.0), f, reference_input_fwhm(), ExponentConvention::Paper);
    let out = propagate_correlation(&p).unwrap();
    let want = spectrum_to_correlation(&p.input, p.lag_step, p.lag_count).unwrap().value;
    assert_eq!(out.correlation.values(), want.values());
}

#[test]
fn free_coherence_decays_at_the_effective_rate() {
    let gt = Complex64::new(6.8e4, 1.5e3);
    let g0 = Complex64::new(0.3, -0.2);
    let g = integrate_coherence(&vec![Complex64::new(0.0, 0.0); 1001], 1e-6, gt, Complex64::new(-1.0, 0.0), g0);
    for (k, v) in g.iter().enumerate() {
        let want = g0 * (-gt * (k as f64 * 1e-6)).exp();
        assert!((v - want).norm() < 1e-12);
    }
}

#[test]
fn correlation_route_agrees_with_the_fourier_route() {
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let p = correlation_problem(cell(), f, reference_input_fwhm(), ExponentConvention::Paper);
    let cmp = compare_routes(&p).unwrap();
    assert!(cmp.deviation < 1e-3, "{:e}", cmp.deviation);
    // Passive in the lag domain as well: R(0) is the total power.
    assert!(cmp.correlation.correlation.zero_lag() <= p.input.integral() * (1.0 + 1e-9));
}

#[test]
fn correlation_route_preconditions() {
    let f = FieldConfig::resonant(paper_drive(), 0.0);
    let p = correlation_problem(cell(), f, reference_input_fwhm(), ExponentConvention::Paper);
    assert!(propagate_correlation(&p.clone().with_z_steps(16)).is_err());
    let mut v = p.clone();
    v.doppler = DopplerMode::VelocityAverage;
    assert!(propagate_correlation(&v).is_err());
    // A window that ends while R is still large.
    assert!(propagate_correlation(&p.with_lags(5e-8, 1001)).is_err());
}
