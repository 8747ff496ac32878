//! Output files are collected in memory and written only once a command
//! has finished, so a failing command leaves nothing behind.

use std::fs;
use std::path::Path;

use eitline_core::spectral::{format_number, write_spectrum_csv, write_spectrum_csv_with, Spectrum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Default)]
pub struct Artifacts {
    header: String,
    files: Vec<(String, String)>,
    /// Lines printed to stdout after the files are written.
    pub report: Vec<String>,
}

impl Artifacts {
    pub fn new(command: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            header: format!("eitline {VERSION} command={command} config_sha256={config_hash} seed={seed}"),
            ..Self::default()
        }
    }

    pub fn header(&self) -> &str {
        &self.header
    }

    pub fn files(&self) -> &[(String, String)] {
        &self.files
    }

    pub fn spectrum(&mut self, name: &str, s: &Spectrum) {
        let text = write_spectrum_csv(s, std::slice::from_ref(&self.header));
        self.files.push((name.into(), text));
    }

    pub fn spectrum_with_stderr(&mut self, name: &str, s: &Spectrum, stderr: &[f64]) {
        let text = write_spectrum_csv_with(s, std::slice::from_ref(&self.header), Some(stderr));
        self.files.push((name.into(), text));
    }

    /// A CSV with a fixed header and preformatted rows.
    pub fn table(&mut self, name: &str, columns: &str, rows: impl IntoIterator<Item = String>) {
        let mut text = format!("# {}\n{columns}\n", self.header);
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        self.files.push((name.into(), text));
    }

    /// `key=value` metadata, one pair per line.
    pub fn sidecar(&mut self, name: &str, pairs: &[(String, String)]) {
        let mut text = format!("# {}\n", self.header);
        for (k, v) in pairs {
            text.push_str(&format!("{k}={v}\n"));
        }
        self.files.push((name.into(), text));
    }

    pub fn svg(&mut self, name: &str, body: String) {
        self.files.push((name.into(), body));
    }

    pub fn say(&mut self, line: impl Into<String>) {
        self.report.push(line.into());
    }

    pub fn write_all(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, text) in &self.files {
            fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

/// Collects `key=value` pairs with uniform number formatting.
#[derive(Debug, Default)]
pub struct Pairs(pub Vec<(String, String)>);

impl Pairs {
    pub fn num(&mut self, key: &str, v: f64) -> &mut Self {
        self.0.push((key.into(), format_number(v)));
        self
    }

    pub fn text(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.0.push((key.into(), v.to_string()));
        self
    }
}

/// Comma-joined numbers for a CSV row.
pub fn row(values: &[f64]) -> String {
    values.iter().map(|&v| format_number(v)).collect::<Vec<_>>().join(",")
}
