//! Spectrum CSV: optional `#` comment lines, then the header
//! `omega_rad_s,density` and one LF-terminated row per grid point.
//! `omega_rad_s` is the absolute angular frequency (carrier + offset).

use crate::error::{Error, Result};

use super::{FrequencyGrid, Spectrum};

pub const SPECTRUM_HEADER: &str = "omega_rad_s,density";

/// Shortest round-trip text for `v`, in exponent form outside [10⁻³, 10⁷).
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) || !a.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn write_spectrum_csv(s: &Spectrum, comments: &[String]) -> String {
    write_spectrum_csv_with(s, comments, None)
}

/// As [`write_spectrum_csv`], with an extra `stderr` column when given.
pub fn write_spectrum_csv_with(s: &Spectrum, comments: &[String], stderr: Option<&[f64]>) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    out.push_str(SPECTRUM_HEADER);
    if stderr.is_some() {
        out.push_str(",stderr");
    }
    out.push('\n');
    for (i, (w, d)) in s.points().enumerate() {
        out.push_str(&format!("{},{}", format_number(s.carrier() + w), format_number(d)));
        if let Some(e) = stderr {
            out.push_str(&format!(",{}", format_number(e[i])));
        }
        out.push('\n');
    }
    out
}

/// Parses a spectrum CSV. The grid must be uniform to 10⁻⁹ of its step;
/// the carrier is taken as 0 so offsets equal the absolute frequencies.
pub fn read_spectrum_csv(text: &str) -> Result<Spectrum> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::invalid("empty spectrum CSV"))?;
    if !header.starts_with(SPECTRUM_HEADER) {
        return Err(Error::invalid(format!("unexpected CSV header `{header}`")));
    }
    let mut omegas = Vec::new();
    let mut density = Vec::new();
    for (n, line) in lines.enumerate() {
        let mut cols = line.split(',');
        let parse = |c: Option<&str>| -> Result<f64> {
            c.and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::invalid(format!("malformed CSV row {}: `{line}`", n + 1)))
        };
        omegas.push(parse(cols.next())?);
        density.push(parse(cols.next())?);
    }
    if omegas.len() < 2 {
        return Err(Error::invalid("spectrum CSV needs at least two rows"));
    }
    let step = (omegas[omegas.len() - 1] - omegas[0]) / (omegas.len() - 1) as f64;
    for (i, w) in omegas.iter().enumerate() {
        if (w - (omegas[0] + step * i as f64)).abs() > 1e-9 * step.abs().max(f64::MIN_POSITIVE) + 1e-12 * w.abs() {
            return Err(Error::invalid("spectrum CSV grid is not uniform"));
        }
    }
    let grid = FrequencyGrid::new(omegas[0], step, omegas.len())?;
    Spectrum::new(0.0, grid, density)
}
