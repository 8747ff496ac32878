use std::path::Path;
use std::process::{Command, Output};

use eitline_cli::config::RunConfig;
use eitline_cli::experiments;
use eitline_core::units::khz;

fn eitline(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eitline"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

#[test]
fn missing_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = eitline(&["figure2", "--config", "/definitely/missing.toml"], &out);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[config-not-found]: "), "{err}");
    assert_eq!(err.lines().count(), 1);
    assert!(files(&out).is_empty());
}

#[test]
fn bad_enum_and_unknown_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "[medium]\nconvention = \"sideways\"\n");
    let o = eitline(&["validate", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[bad-enum]"));
    let cfg = write_config(tmp.path(), "[medium]\nlength = 2.5\n");
    let o = eitline(&["figure3", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[unknown-key]"));
    assert!(files(&out).is_empty());
}

#[test]
fn single_point_sweep_is_too_small() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "[figure4]\nomega_d_mhz = [2.0]\n");
    let o = eitline(&["figure4", "--config", &cfg], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[sweep-too-small]"));
    assert!(files(&out).is_empty());
}

#[test]
fn off_resonance_only_writes_one_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eitline(&["figure2", "--off-resonance-only"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(files(tmp.path()), ["figure2_input.csv"]);
}

#[test]
fn every_output_carries_the_provenance_header() {
    let tmp = tempfile::tempdir().unwrap();
    let hash = RunConfig::default().hash();
    for cmd in ["figure2", "figure3", "figure4", "propagate"] {
        let o = eitline(&[cmd], tmp.path());
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
    }
    let names = files(tmp.path());
    assert!(names.len() >= 13, "{names:?}");
    for name in names {
        let text = std::fs::read_to_string(tmp.path().join(&name)).unwrap();
        let header = text.lines().find(|l| l.starts_with('#')).unwrap_or_else(|| panic!("{name} has no header"));
        assert!(header.contains(&format!("config_sha256={hash}")), "{name}: {header}");
        assert!(header.contains(concat!("eitline ", env!("CARGO_PKG_VERSION"))), "{name}");
    }
}

#[test]
fn zero_length_cell_has_no_resonance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[medium]\nlength_cm = 0.0\n[fields]\nomega_d_mhz = 2.3227\n");
    let out = tmp.path().join("out");
    let o = eitline(&["figure3", "--config", &cfg], &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("note=no-resonance"));
    let eit = std::fs::read_to_string(out.join("figure3_eit.csv")).unwrap();
    let values: Vec<&str> = eit.lines().skip(2).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert!(values.iter().all(|v| *v == "1"));
}

#[test]
fn quick_validate_skips_the_monte_carlo() {
    let tmp = tempfile::tempdir().unwrap();
    let o = eitline(&["validate", "--quick"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("PASS ")).count() >= 7);
    assert!(!stdout.contains("mc-"));
    let csv = std::fs::read_to_string(tmp.path().join("validate.csv")).unwrap();
    assert!(csv.lines().nth(1) == Some("check,value,limit,pass"));
}

#[test]
fn fit_reads_a_written_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(eitline(&["figure2"], tmp.path()).status.success());
    let spectrum = tmp.path().join("figure2_input.csv");
    let o = eitline(&["fit", "--spectrum", spectrum.to_str().unwrap(), "--model", "gaussian"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let fwhm: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("gaussian_fwhm_rad_s="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((fwhm / khz(980.0) - 1.0).abs() < 1e-6);
    let o = eitline(&["fit", "--spectrum", "/no/such.csv"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn time_step_violation_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[mc]\ndt_ns = 10000.0\n");
    let o = eitline(&["mc", "--config", &cfg], &tmp.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error[invalid-parameter]"));
}

#[test]
fn mc_command_writes_spectra_with_standard_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "[mc]\nduration_ms = 1.0\nburn_in_ms = 0.25\nslice_check = false\n");
    let o = eitline(&["mc", "--config", &cfg, "--realizations", "16"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let s = std::fs::read_to_string(tmp.path().join("mc_spectrum.csv")).unwrap();
    assert_eq!(s.lines().nth(1), Some("omega_rad_s,density,stderr"));
    let meta = std::fs::read_to_string(tmp.path().join("mc.txt")).unwrap();
    assert!(meta.contains("realizations=16\n"));
}

#[test]
fn closed_form_slope_halves_when_the_thick_medium_factor_doubles() {
    let base = RunConfig::default().resolve().unwrap();
    let depth = eitline_core::medium::optical_depth(&base.medium);
    // Δ_W√(A − 1) doubles when A − 1 quadruples at fixed Δ_W.
    let mut cfg = RunConfig::default();
    cfg.medium.density_cm3 *= (1.0 + 4.0 * (depth - 1.0)) / depth;
    let thick = cfg.resolve().unwrap();
    let slope = |r| {
        let f4 = experiments::figure4(r).unwrap();
        let xs: Vec<f64> = f4.points.iter().map(|p| p.omega_d_sq).collect();
        let ys: Vec<f64> = f4.points.iter().map(|p| p.predicted_width).collect();
        experiments::linear_fit(&xs, &ys).unwrap().slope
    };
    let ratio = slope(&thick) / slope(&base);
    assert!((ratio - 0.5).abs() < 1e-9, "{ratio}");
}

#[test]
fn large_ground_decay_broadens_both_curves_together() {
    let r = RunConfig::default().resolve().unwrap();
    let gamma_cb = r.fields.drive_power() / r.medium.doppler_width;
    let wide = experiments::figure3_with(&r, &r.medium.with_gamma_cb(gamma_cb)).unwrap();
    let narrow = experiments::figure3(&r).unwrap();
    let (w, n) = (wide.noise_fit.unwrap().fwhm(), narrow.noise_fit.unwrap().fwhm());
    assert!(w > n);
    assert!((0.9..=1.1).contains(&wide.ratio.unwrap()));
}

#[test]
fn example_config_matches_the_builtin_preset() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/paper.toml");
    let cfg = RunConfig::load(Path::new(path)).unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(cfg.hash(), RunConfig::default().hash());
}
