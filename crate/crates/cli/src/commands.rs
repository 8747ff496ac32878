use std::path::Path;

use eitline_core::medium::{coupling_eta, optical_depth, DopplerMode};
use eitline_core::propagation::ADIABATIC_VALIDITY_THRESHOLD;
use eitline_core::spectral::{format_number as num, read_spectrum_csv, FitResult, FrequencyGrid, LineModel, Spectrum};
use eitline_core::units::{khz, to_khz};

use crate::config::Resolved;
use crate::error::CliError;
use crate::experiments::{self, sweep_problem};
use crate::output::{row, Artifacts, Pairs, VERSION};
use crate::svg::{plot, Series};

pub struct Outcome {
    pub artifacts: Artifacts,
    /// Failed checks, reported with exit code 1 after the files are written.
    pub failures: usize,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn ok(artifacts: Artifacts) -> Self {
        Self {
            artifacts,
            failures: 0,
            warnings: Vec::new(),
        }
    }
}

fn grid_pairs(p: &mut Pairs, prefix: &str, g: &FrequencyGrid) {
    p.num(&format!("{prefix}_start_rad_s"), g.start())
        .num(&format!("{prefix}_step_rad_s"), g.step())
        .num(&format!("{prefix}_count"), g.count() as f64);
}

/// Physical parameters, conventions and provenance shared by all sidecars.
fn metadata(r: &Resolved) -> Pairs {
    let m = &r.medium;
    let f = &r.fields;
    let mut p = Pairs::default();
    p.text("version", VERSION)
        .text("config_sha256", &r.hash)
        .text("preset", &r.raw.preset)
        .num("seed", r.raw.seed as f64)
        .num("density_m3", m.density)
        .num("wavelength_m", m.wavelength)
        .num("gamma_r_per_s", m.gamma_r)
        .num("gamma_ab_per_s", m.gamma_ab)
        .num("gamma_ac_per_s", m.gamma_ac)
        .num("gamma_cb_per_s", m.gamma_cb)
        .num("doppler_width_rad_s", m.doppler_width)
        .num("length_m", m.length)
        .num("eta_per_s_m", coupling_eta(m))
        .num("optical_depth", optical_depth(m))
        .num("omega_d_rad_s", f.omega_d.norm())
        .num("omega_p_rad_s", f.omega_p.norm())
        .num("delta_p_rad_s", f.delta_p)
        .num("delta_ac_rad_s", f.delta_ac)
        .num("rho_aa", f.populations.aa)
        .num("rho_bb", f.populations.bb)
        .num("rho_cc", f.populations.cc)
        .text("doppler_mode", r.doppler.name())
        .text("convention", r.convention.name())
        .num("convention_factor", r.convention.factor())
        .text("input_lineshape", r.input_model.name())
        .num("input_fwhm_rad_s", r.input_fwhm)
        .text("route", &r.raw.propagation.route);
    p
}

fn fit_pairs(p: &mut Pairs, prefix: &str, f: &FitResult) {
    p.text(&format!("{prefix}_model"), f.model.name())
        .num(&format!("{prefix}_center_rad_s"), f.center)
        .num(&format!("{prefix}_width_rad_s"), f.width)
        .num(&format!("{prefix}_fwhm_rad_s"), f.fwhm())
        .num(&format!("{prefix}_amplitude"), f.amplitude)
        .num(&format!("{prefix}_rms_residual"), f.rms_residual);
}

fn khz_points(s: &Spectrum, scale: f64) -> Vec<(f64, f64)> {
    s.points().map(|(w, d)| (to_khz(w), d * scale)).collect()
}

pub fn figure2(r: &Resolved, off_resonance_only: bool) -> Result<Outcome, CliError> {
    let mut a = Artifacts::new("figure2", &r.hash, r.raw.seed);
    if off_resonance_only {
        let (input, fit) = experiments::figure2_input(r)?;
        a.spectrum("figure2_input.csv", &input);
        a.say(format!("input_fwhm_khz={}", num(to_khz(fit.fwhm()))));
        return Ok(Outcome::ok(a));
    }
    let f2 = experiments::figure2(r)?;
    a.spectrum("figure2_input.csv", &f2.input);
    a.spectrum("figure2_output.csv", &f2.output);

    let mut p = metadata(r);
    grid_pairs(&mut p, "input_grid", f2.input.grid());
    grid_pairs(&mut p, "output_grid", f2.output.grid());
    fit_pairs(&mut p, "input_fit", &f2.input_fit);
    fit_pairs(&mut p, "output_fit", &f2.output_fit);
    fit_pairs(&mut p, "output_gaussian_fit", &f2.output_gaussian_fit);
    p.num("closed_form_width_rad_s", f2.predicted_width)
        .num("filter_fwhm_rad_s", f2.filter_fwhm)
        .num("output_fwhm_over_closed_form", f2.output_fit.fwhm() / f2.predicted_width)
        .num("output_fwhm_over_filter_fwhm", f2.output_fit.fwhm() / f2.filter_fwhm)
        .num("narrowing", f2.narrowing);
    a.sidecar("figure2.txt", &p.0);

    let (ip, op) = (f2.input.peak().1, f2.output.peak().1);
    let svg = plot(
        a.header(),
        "Beat spectrum before and after the cell",
        "detuning / kHz",
        "normalised spectral density",
        &[
            Series::line("input (off resonance)", khz_points(&f2.input, 1.0 / ip)),
            Series::line("output (on resonance)", khz_points(&f2.output, 1.0 / op)),
        ],
    );
    a.svg("figure2.svg", svg);

    a.say(format!("input_fwhm_khz={}", num(to_khz(f2.input_fit.fwhm()))));
    a.say(format!("output_fwhm_khz={}", num(to_khz(f2.output_fit.fwhm()))));
    a.say(format!("closed_form_width_khz={}", num(to_khz(f2.predicted_width))));
    a.say(format!("narrowing={}", num(f2.narrowing)));
    Ok(Outcome::ok(a))
}

pub fn figure3(r: &Resolved) -> Result<Outcome, CliError> {
    let f3 = experiments::figure3(r)?;
    let mut a = Artifacts::new("figure3", &r.hash, r.raw.seed);
    a.spectrum("figure3_eit.csv", f3.scan.transmission());
    a.spectrum("figure3_noise.csv", &f3.noise);

    let mut p = metadata(r);
    grid_pairs(&mut p, "grid", &r.output_grid);
    p.num("eit_background", f3.scan.background());
    if let Some(f) = &f3.eit_fit {
        fit_pairs(&mut p, "eit_fit", f);
    }
    if let Some(f) = &f3.noise_fit {
        fit_pairs(&mut p, "noise_fit", f);
    }
    if let Some(ratio) = f3.ratio {
        p.num("width_ratio", ratio);
        a.say(format!("eit_fwhm_khz={}", num(to_khz(f3.eit_fit.as_ref().map_or(0.0, |f| f.fwhm())))));
        a.say(format!("noise_fwhm_khz={}", num(to_khz(f3.noise_fit.as_ref().map_or(0.0, |f| f.fwhm())))));
        a.say(format!("width_ratio={}", num(ratio)));
    }
    if let Some(note) = f3.note {
        p.text("note", note);
        a.say(format!("note={note}"));
    }
    a.sidecar("figure3.txt", &p.0);

    let res = f3.scan.resonance()?;
    let rp = res.peak().1;
    let scale = if rp > 0.0 { 1.0 / rp } else { 0.0 };
    let svg = plot(
        a.header(),
        "EIT resonance and transmitted noise spectrum",
        "two-photon detuning / kHz",
        "normalised",
        &[
            Series::line("monochromatic EIT resonance", khz_points(&res, scale)),
            Series::line("transmitted noise spectrum", khz_points(&f3.noise, 1.0)),
        ],
    );
    a.svg("figure3.svg", svg);
    Ok(Outcome::ok(a))
}

pub fn check_sweep(r: &Resolved) -> Result<(), CliError> {
    match sweep_problem(&r.sweep) {
        Some(msg) => Err(CliError::usage("sweep-too-small", msg)),
        None => Ok(()),
    }
}

pub fn figure4(r: &Resolved) -> Result<Outcome, CliError> {
    check_sweep(r)?;
    let f4 = experiments::figure4(r)?;
    let mut a = Artifacts::new("figure4", &r.hash, r.raw.seed);
    let rows = f4.points.iter().map(|p| {
        row(&[p.omega_d_sq, p.fitted_fwhm, p.predicted_width, p.validity_ratio, p.included as u8 as f64])
    });
    a.table(
        "figure4.csv",
        "omega_d_sq_rad2_s2,fitted_fwhm_rad_s,closed_form_width_rad_s,validity_ratio,included",
        rows,
    );
    let mut p = metadata(r);
    p.num("slope_s", f4.fit.slope)
        .num("intercept_rad_s", f4.fit.intercept)
        .num("r_squared", f4.fit.r_squared)
        .num("validity_threshold", ADIABATIC_VALIDITY_THRESHOLD)
        .num("excluded", f4.points.iter().filter(|p| !p.included).count() as f64);
    a.sidecar("figure4.txt", &p.0);

    let inc: Vec<(f64, f64)> =
        f4.points.iter().filter(|p| p.included).map(|p| (p.omega_d_sq, to_khz(p.fitted_fwhm))).collect();
    let xmax = f4.points.iter().map(|p| p.omega_d_sq).fold(0.0, f64::max);
    let line = vec![(0.0, to_khz(f4.fit.intercept)), (xmax, to_khz(f4.fit.slope * xmax + f4.fit.intercept))];
    let svg = plot(
        a.header(),
        "Transmitted width versus drive power",
        "|Omega_d|^2 / (rad/s)^2",
        "fitted FWHM / kHz",
        &[Series::markers("fitted FWHM", inc), Series::line("linear fit", line)],
    );
    a.svg("figure4.svg", svg);

    a.say(format!("slope_s={}", num(f4.fit.slope)));
    a.say(format!("intercept_khz={}", num(to_khz(f4.fit.intercept))));
    a.say(format!("r_squared={}", num(f4.fit.r_squared)));
    let warnings = f4
        .points
        .iter()
        .filter(|p| !p.included)
        .map(|p| {
            format!(
                "warning: |Omega_d|^2 = {:e} excluded, adiabatic validity ratio {:.3} < {ADIABATIC_VALIDITY_THRESHOLD}",
                p.omega_d_sq, p.validity_ratio
            )
        })
        .collect();
    Ok(Outcome {
        artifacts: a,
        failures: 0,
        warnings,
    })
}

pub fn propagate(r: &Resolved) -> Result<Outcome, CliError> {
    let out = experiments::propagate_onto(r, &r.fields, r.output_grid)?;
    let mut a = Artifacts::new("propagate", &r.hash, r.raw.seed);
    a.spectrum("propagate_output.csv", &out.output);
    if let Some(c) = &out.correlation {
        let rows = c
            .values()
            .iter()
            .enumerate()
            .map(|(k, v)| row(&[c.lag(k), v.re, v.im]));
        a.table("propagate_correlation.csv", "tau_s,re,im", rows);
    }
    let mut p = metadata(r);
    grid_pairs(&mut p, "grid", out.output.grid());
    p.num("z_steps", r.raw.propagation.z_steps as f64)
        .num("lag_step_s", r.raw.propagation.lag_step_ns * 1e-9)
        .num("lag_count", r.raw.propagation.lag_count as f64);
    if let Ok(f) = eitline_core::spectral::fit_lineshape(&out.output, LineModel::Lorentzian, None) {
        fit_pairs(&mut p, "output_fit", &f);
        a.say(format!("output_fwhm_khz={}", num(to_khz(f.fwhm()))));
    }
    a.sidecar("propagate.txt", &p.0);
    a.say(format!("output_power={}", num(out.output.integral())));
    Ok(Outcome::ok(a))
}

pub fn mc(r: &Resolved) -> Result<Outcome, CliError> {
    let run = experiments::mc_run(&r.mc, r.mc_half_window, r.raw.mc.slice_check)?;
    let res = &run.result;
    let mut a = Artifacts::new("mc", &r.hash, r.raw.seed);
    a.spectrum_with_stderr("mc_spectrum.csv", &res.transmitted.mean, &res.transmitted.stderr);
    a.spectrum_with_stderr("mc_reference.csv", &res.reference.mean, &res.reference.stderr);
    let g = res.grid();
    let rows = (0..g.count())
        .map(|i| row(&[g.omega(i), res.transfer[i], res.transfer_sigma[i], run.analytic[i]]));
    a.table("mc_transfer.csv", "omega_rad_s,transfer,stderr,analytic", rows);

    let c = &r.mc;
    let mut p = metadata(r);
    grid_pairs(&mut p, "band_grid", g);
    p.num("probe_diffusion_rad_s", c.probe_diffusion)
        .num("drive_diffusion_rad_s", c.drive_diffusion)
        .text("probe_shaped", c.probe_shaping.is_some())
        .num("realizations", c.realizations as f64)
        .num("slices", c.slices as f64)
        .num("dt_s", c.dt)
        .num("duration_s", c.duration)
        .num("burn_in_s", c.burn_in)
        .text("coherence", c.coherence.name())
        .num("band_bins", c.band_bins as f64)
        .num("substeps_per_slice", res.substeps as f64)
        .num("max_power_ratio", res.max_power_ratio)
        .num("implied_drive_depletion", res.implied_depletion);
    fit_pairs(&mut p, "output_fit", &run.fit);
    p.num("output_fit_fwhm_stderr_rad_s", run.fit_stderr);
    let mut warnings = Vec::new();
    if let Some((w, change)) = run.doubled {
        let converged = change < eitline_core::mc::SLICE_TOLERANCE;
        p.num("doubled_slices_fwhm_rad_s", w)
            .num("slice_relative_change", change)
            .text("converged", converged);
        if !converged {
            warnings.push(format!(
                "warning: doubling the slice count changed the fitted width by {:.2}%; run is unconverged",
                100.0 * change
            ));
        }
    }
    a.sidecar("mc.txt", &p.0);
    a.say(format!("output_fwhm_khz={}", num(to_khz(run.fit.fwhm()))));
    a.say(format!("output_fwhm_stderr_khz={}", num(to_khz(run.fit_stderr))));
    a.say(format!("max_power_ratio={}", num(res.max_power_ratio)));
    Ok(Outcome {
        artifacts: a,
        failures: 0,
        warnings,
    })
}

pub fn fit(r: &Resolved, path: &Path, model: Option<&str>, half_window_khz: Option<f64>) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::usage("spectrum-not-found", format!("no spectrum file at {}", path.display()))
        } else {
            CliError::from(e)
        }
    })?;
    let models: Vec<LineModel> = match model {
        None | Some("both") => vec![LineModel::Gaussian, LineModel::Lorentzian],
        Some(m) => vec![m
            .parse()
            .map_err(|_| CliError::usage("bad-enum", format!("`{m}` is not a valid value for model")))?],
    };
    let mut s = read_spectrum_csv(&text)?;
    if let Some(hw) = half_window_khz {
        let center = s.grid().omega(s.peak().0);
        s = s.restricted(center - khz(hw), center + khz(hw))?;
    }
    let mut a = Artifacts::new("fit", &r.hash, r.raw.seed);
    let digest: String = {
        use sha2::{Digest, Sha256};
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    };
    let mut p = Pairs::default();
    p.text("version", VERSION).text("spectrum_sha256", digest);
    grid_pairs(&mut p, "grid", s.grid());
    for m in models {
        let f = eitline_core::spectral::fit_lineshape(&s, m, None)?;
        fit_pairs(&mut p, m.name(), &f);
        a.say(format!("{}_fwhm_rad_s={}", m.name(), num(f.fwhm())));
        a.say(format!("{}_rms_residual={}", m.name(), num(f.rms_residual)));
    }
    a.sidecar("fit.txt", &p.0);
    Ok(Outcome::ok(a))
}

struct Check {
    name: &'static str,
    value: f64,
    limit: String,
    pass: bool,
}

fn lt(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit: format!("<{}", num(limit)),
        pass: value < limit,
    }
}

fn gt(name: &'static str, value: f64, limit: f64) -> Check {
    Check {
        name,
        value,
        limit: format!(">{}", num(limit)),
        pass: value > limit,
    }
}

/// Realizations used by the reduced-scale Monte-Carlo checks.
pub const VALIDATE_REALIZATIONS: usize = 64;

pub fn validate(r: &Resolved, quick: bool, realizations: Option<usize>) -> Result<Outcome, CliError> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    checks.push(lt("fit-recovery", experiments::fit_recovery_error()?, 1e-6));
    checks.push(lt("wiener-khinchin-round-trip", experiments::round_trip_error(khz(588.5))?, 1e-6));

    let f2 = experiments::figure2(r)?;
    checks.push(gt("narrowing", f2.narrowing, 100.0));
    notes.push(format!(
        "lineshape rms residuals: lorentzian={:.4e} gaussian={:.4e}; fitted FWHM / filter FWHM = {:.4}",
        f2.output_fit.rms_residual,
        f2.output_gaussian_fit.rms_residual,
        f2.output_fit.fwhm() / f2.filter_fwhm
    ));

    let omega_sq = r.fields.drive_power();
    let asym = experiments::asymptote_ratio(&r.medium, omega_sq, 1e3)?;
    checks.push(lt("closed-form-asymptote", (asym - std::f64::consts::LN_2.sqrt()).abs(), 0.01));

    if sweep_problem(&r.sweep).is_none() {
        let f4 = experiments::figure4(r)?;
        checks.push(gt("width-power-r-squared", f4.fit.r_squared, 0.999));
    } else {
        notes.push("figure4 sweep too small; linearity check skipped".into());
    }

    let f3 = experiments::figure3(r)?;
    match f3.ratio {
        Some(ratio) => checks.push(Check {
            name: "noise-over-eit-width",
            value: ratio,
            limit: "[0.9,1.1]".into(),
            pass: (0.9..=1.1).contains(&ratio),
        }),
        None => notes.push("EIT scan shows no resonance; width ratio skipped".into()),
    }

    let doppler = if r.doppler == DopplerMode::VelocityAverage {
        DopplerMode::Substitution
    } else {
        r.doppler
    };
    let p = experiments::correlation_problem(r.medium, r.fields, doppler, r.convention, r.input_fwhm)?;
    checks.push(lt("route-deviation", experiments::route_deviation(&p)?, 1e-3));

    if !quick {
        let mut base = r.mc.clone();
        if base.doppler == DopplerMode::VelocityAverage {
            base.doppler = DopplerMode::Substitution;
        }
        base.probe_shaping = None;
        if base.probe_diffusion == 0.0 {
            base.probe_diffusion = khz(30.0);
        }
        base.realizations = realizations.unwrap_or(VALIDATE_REALIZATIONS);
        base.band_bins = 6;
        let ind = experiments::mc_independence(&base, 10.0, r.mc_half_window)?;
        checks.push(lt("mc-diffusion-independence-z", ind.pair_z, 3.0));
        checks.push(lt("mc-vs-analytic-z", ind.analytic_z[0].max(ind.analytic_z[1]), 3.0));
        checks.push(Check {
            name: "mc-max-power-ratio",
            value: ind.max_power_ratio,
            limit: "<=1".into(),
            pass: ind.max_power_ratio <= 1.0,
        });
    }

    let mut a = Artifacts::new("validate", &r.hash, r.raw.seed);
    let rows = checks.iter().map(|c| format!("{},{},{},{}", c.name, num(c.value), c.limit, c.pass));
    a.table("validate.csv", "check,value,limit,pass", rows);
    for c in &checks {
        a.say(format!(
            "{} {} value={} limit={}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            num(c.value),
            c.limit
        ));
    }
    for n in notes {
        a.say(format!("NOTE {n}"));
    }
    if quick {
        a.say("NOTE --quick: Monte-Carlo checks skipped");
    }
    Ok(Outcome {
        artifacts: a,
        failures: checks.iter().filter(|c| !c.pass).count(),
        warnings: Vec::new(),
    })
}
