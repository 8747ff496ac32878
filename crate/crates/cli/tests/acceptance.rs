//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero when any
//! criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use eitline_cli::config::{Resolved, RunConfig};
use eitline_cli::experiments::{self, correlation_problem, Figure3};
use eitline_core::mc::McConfig;
use eitline_core::medium::{optical_depth, DopplerMode, ExponentConvention, FieldConfig};
use eitline_core::units::{hz, khz, mhz};

struct Outcome {
    pass: bool,
    detail: String,
}

fn paper() -> Resolved {
    RunConfig::default().resolve().expect("default preset resolves")
}

fn gaussian_to_lorentzian() -> Outcome {
    let r = paper();
    let t = Instant::now();
    let f2 = experiments::figure2(&r).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let lor = f2.output_fit.rms_residual;
    let gau = f2.output_gaussian_fit.rms_residual;
    let ratio = f2.output_fit.fwhm() / f2.filter_fwhm;
    Outcome {
        pass: optical_depth(&r.medium) > 6.0 && lor < 0.05 && gau > lor && (ratio - 1.0).abs() <= 0.10 && secs < 1.0,
        detail: format!(
            "depth={:.3} lorentzian_rms={lor:.4e} gaussian_rms={gau:.4e} fitted_fwhm/filter_fwhm={ratio:.4} runtime={secs:.3}s",
            optical_depth(&r.medium)
        ),
    }
}

fn narrowing() -> Outcome {
    let f2 = experiments::figure2(&paper()).unwrap();
    Outcome {
        pass: f2.narrowing >= 100.0,
        detail: format!(
            "input_fwhm={:.1}kHz output_fwhm={:.3}kHz narrowing={:.2}",
            f2.input_fit.fwhm() / khz(1.0),
            f2.output_fit.fwhm() / khz(1.0),
            f2.narrowing
        ),
    }
}

fn width_power_linearity() -> Outcome {
    let r = paper();
    let t = Instant::now();
    let f4 = experiments::figure4(&r).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let sq: Vec<f64> = f4.points.iter().map(|p| p.omega_d_sq).collect();
    let span = sq.iter().cloned().fold(0.0, f64::max) / sq.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_width = f4.points.iter().map(|p| p.fitted_fwhm).fold(f64::INFINITY, f64::min);
    let all_valid = f4.points.iter().all(|p| p.included && p.validity_ratio >= 10.0);
    let intercept = f4.fit.intercept.abs() / min_width;
    Outcome {
        pass: all_valid && span >= 10.0 && f4.fit.r_squared > 0.999 && intercept < 0.05 && secs < 10.0,
        detail: format!(
            "points={} power_span={span:.2} r2={:.9} |intercept|/min_width={intercept:.3e} runtime={secs:.3}s",
            f4.points.len(),
            f4.fit.r_squared
        ),
    }
}

fn noise_width_equals_eit_width() -> Outcome {
    let r = paper();
    let mut ratios = Vec::new();
    let mut ok = true;
    // Γ_cb from zero through the power-broadened rate |Ω_d|²/Δ_W.
    let broadening = r.fields.drive_power() / r.medium.doppler_width;
    for gamma_cb in [0.0, hz(100.0), hz(1000.0), 0.3 * broadening, broadening] {
        let f3: Figure3 = experiments::figure3_with(&r, &r.medium.with_gamma_cb(gamma_cb)).unwrap();
        let q = f3.ratio.unwrap_or(f64::NAN);
        ok &= (0.9..=1.1).contains(&q);
        ratios.push(format!("{:.0}:{q:.4}", gamma_cb));
    }
    Outcome {
        pass: ok,
        detail: format!("gamma_cb_per_s:ratio {}", ratios.join(" ")),
    }
}

fn route_equivalence() -> Outcome {
    let r = paper();
    let m = r.medium;
    let fields_off = FieldConfig::resonant(mhz(0.7), 0.0);
    let cases = [
        ("paper", m, r.fields, DopplerMode::Substitution, ExponentConvention::Paper),
        ("derived-gamma-cb", m.with_gamma_cb(hz(1000.0)), r.fields, DopplerMode::Substitution, ExponentConvention::Derived),
        ("homogeneous", m.with_gamma_cb(hz(200.0)), fields_off, DopplerMode::Off, ExponentConvention::Paper),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, medium, fields, doppler, convention) in cases {
        let p = correlation_problem(medium, fields, doppler, convention, r.input_fwhm).unwrap();
        let d = match experiments::route_deviation(&p) {
            Ok(d) => d,
            Err(e) => {
                parts.push(format!("{name}=error({})", e.kind()));
                ok = false;
                continue;
            }
        };
        ok &= d < 1e-3;
        parts.push(format!("{name}={d:.3e}"));
    }
    Outcome {
        pass: ok,
        detail: format!("max_relative_deviation {}", parts.join(" ")),
    }
}

fn phase_noise_independence() -> Outcome {
    let r = paper();
    let mut base = McConfig::new(r.medium, r.fields, khz(30.0), 2013);
    base.realizations = 200;
    base.slices = 8;
    base.duration = 4e-3;
    base.band_bins = 6;
    let t = Instant::now();
    let ind = experiments::mc_independence(&base, 10.0, khz(12.0)).unwrap();
    let secs = t.elapsed().as_secs_f64();
    Outcome {
        pass: ind.pair_z < 3.0 && ind.analytic_z[0] < 3.0 && ind.analytic_z[1] < 3.0 && secs < 300.0,
        detail: format!(
            "bands={} max_pair_z={:.3} max_z_vs_analytic(D)={:.3} max_z_vs_analytic(10D)={:.3} runtime={secs:.1}s",
            ind.omegas.len(),
            ind.pair_z,
            ind.analytic_z[0],
            ind.analytic_z[1]
        ),
    }
}

fn closed_form_asymptote() -> Outcome {
    let r = paper();
    let target = std::f64::consts::LN_2.sqrt();
    let devs: Vec<f64> = [10.0, 100.0, 1000.0]
        .iter()
        .map(|&a| (experiments::asymptote_ratio(&r.medium, r.fields.drive_power(), a).unwrap() - target).abs())
        .collect();
    Outcome {
        pass: devs[2] <= 0.01 && devs[0] > devs[1] && devs[1] > devs[2],
        detail: format!("|ratio-sqrt(ln2)| at 10,100,1000: {:.4e} {:.4e} {:.4e}", devs[0], devs[1], devs[2]),
    }
}

fn analysis_exactness() -> Outcome {
    let fit = experiments::fit_recovery_error().unwrap();
    let wk = experiments::round_trip_error(khz(588.5)).unwrap();
    Outcome {
        pass: fit < 1e-6 && wk < 1e-6,
        detail: format!("fit_parameter_error={fit:.3e} round_trip_error={wk:.3e}"),
    }
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_eitline");
    let mut ok = true;
    let mut parts = Vec::new();
    for cmd in ["validate", "figure2", "figure3", "figure4"] {
        let runs: Vec<BTreeMap<String, Vec<u8>>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let status = Command::new(bin)
                    .args([cmd, "--seed", "7", "--out"])
                    .arg(dir.path())
                    .output()
                    .unwrap()
                    .status;
                assert!(status.success(), "{cmd} exited with {status}");
                csv_files(dir.path())
            })
            .collect();
        let same = !runs[0].is_empty() && runs[0] == runs[1];
        ok &= same;
        parts.push(format!("{cmd}:{}files:{}", runs[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    Outcome {
        pass: ok,
        detail: parts.join(" "),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gaussian-to-lorentzian", gaussian_to_lorentzian),
        ("narrowing-factor", narrowing),
        ("width-power-linearity", width_power_linearity),
        ("noise-width-equals-eit-width", noise_width_equals_eit_width),
        ("route-equivalence", route_equivalence),
        ("phase-noise-independence", phase_noise_independence),
        ("closed-form-asymptote", closed_form_asymptote),
        ("analysis-exactness", analysis_exactness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
