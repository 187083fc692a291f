//! Deterministic CSV/JSON emission with embedded provenance.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub command: Vec<String>,
}

impl Provenance {
    pub fn new(config_sha256: String) -> Self {
        Self {
            config_sha256,
            seed: None,
            version: env!("CARGO_PKG_VERSION"),
            input: None,
            command: Vec::new(),
        }
    }
}

/// C-style `%.6e`: six fraction digits and a signed two-digit exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes `# config_sha256=<hash>`, the header and `%.6e`-formatted rows.
pub fn write_csv(path: &Path, config_sha256: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
    let mut buf = Vec::new();
    writeln!(buf, "# config_sha256={config_sha256}").expect("write to memory");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|&v| sci(v)))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(197.3269804), "1.973270e+02");
        assert_eq!(sci(0.000195192), "1.951920e-04");
        assert_eq!(sci(0.0), "0.000000e+00");
        assert_eq!(sci(-3.5e-17), "-3.500000e-17");
        assert_eq!(sci(1e120), "1.000000e+120");
    }
}
