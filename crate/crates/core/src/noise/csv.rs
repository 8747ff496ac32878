//! FieldSeries CSV: `#` comments, the header `t_s,re,im`, one row per
//! sample. A nonzero carrier offset is carried in a `carrier_offset_rad_s=`
//! comment.

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::FieldSeries;
use crate::spectral::format_number;

pub const FIELD_HEADER: &str = "t_s,re,im";
const CARRIER_KEY: &str = "carrier_offset_rad_s=";

pub fn write_field_csv(series: &FieldSeries, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        out.push_str("# ");
        out.push_str(c);
        out.push('\n');
    }
    if series.carrier_offset() != 0.0 {
        out.push_str(&format!("# {CARRIER_KEY}{}\n", format_number(series.carrier_offset())));
    }
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (k, z) in series.envelope().iter().enumerate() {
        out.push_str(&format!("{},{},{}\n", format_number(series.dt() * k as f64), format_number(z.re), format_number(z.im)));
    }
    out
}

pub fn read_field_csv(text: &str) -> Result<FieldSeries> {
    let mut carrier = 0.0;
    let mut rows = Vec::new();
    let mut header = false;
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            if let Some(v) = c.trim().strip_prefix(CARRIER_KEY) {
                carrier = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("malformed carrier offset `{v}`")))?;
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        if !header {
            if line.trim() != FIELD_HEADER {
                return Err(Error::invalid(format!("unexpected CSV header `{line}`")));
            }
            header = true;
            continue;
        }
        let cols: Vec<f64> = line
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::invalid(format!("malformed CSV row `{line}`")))?;
        if cols.len() != 3 {
            return Err(Error::invalid(format!("expected 3 columns in `{line}`")));
        }
        rows.push(cols);
    }
    if rows.len() < 2 {
        return Err(Error::invalid("field CSV needs at least two rows"));
    }
    let dt = rows[1][0] - rows[0][0];
    let envelope = rows.iter().map(|r| Complex64::new(r[1], r[2])).collect();
    FieldSeries::new(dt, envelope, carrier)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_keeps_carrier_and_samples() {
        let env = vec![Complex64::new(1.0, -0.5), Complex64::new(0.25, 2.0), Complex64::new(-3.0, 0.0)];
        let s = FieldSeries::new(1e-6, env, 42.5).unwrap();
        let text = write_field_csv(&s, &["x".into()]);
        assert!(text.lines().any(|l| l == FIELD_HEADER));
        let back = read_field_csv(&text).unwrap();
        assert_eq!(back.envelope(), s.envelope());
        assert_eq!(back.carrier_offset(), 42.5);
        assert!((back.dt() - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn bad_header_rejected() {
        assert!(read_field_csv("t,re,im\n0,1,0\n1,1,0\n").is_err());
    }
}
