//! CSV, PGM and manifest writers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::linalg::RealSymMatrix;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !v.is_finite() {
        return v.to_string();
    }
    format!("{v:.16e}")
}

/// Minimal CSV table: a header and rows of pre-formatted cells.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_text(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Parses a headered numeric CSV into rows of floats.
pub fn read_numeric_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or(Error::EmptyDataset)?
        .split(',')
        .map(|h| h.trim().to_string())
        .collect::<Vec<_>>();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| {
                c.trim().parse::<f64>().map_err(|_| Error::Config {
                    line: i + 2,
                    message: format!("not a number: '{}'", c.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != header.len() {
            return Err(Error::Config {
                line: i + 2,
                message: format!("expected {} columns, got {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Row-major matrix as headerless CSV.
pub fn matrix_csv(m: &RealSymMatrix) -> String {
    let n = m.dim();
    let mut out = String::new();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| fmt_f64(m.get(i, j))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Path of the sidecar describing a PGM's gray-level scaling.
pub fn pgm_sidecar(path: &Path) -> PathBuf {
    path.with_extension("pgm.txt")
}

/// Writes `m` as an ASCII PGM (P2, max value 255) with linear min-max
/// scaling; the bounds go to a `.pgm.txt` sidecar. A constant matrix has
/// no range and renders as all zeros.
pub fn write_heatmap_pgm(m: &RealSymMatrix, path: &Path) -> Result<()> {
    let n = m.dim();
    let values = m.to_row_major();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("heatmap entries"));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    let degenerate = !(range > 0.0);
    let mut body = format!("P2\n{n} {n}\n255\n");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                if degenerate {
                    0
                } else {
                    ((values[i * n + j] - min) / range * 255.0).round() as u8
                }
                .to_string()
            })
            .collect();
        body.push_str(&row.join(" "));
        body.push('\n');
    }
    fs::write(path, body)?;

    let mut side = String::new();
    let _ = writeln!(side, "min = {}", fmt_f64(min));
    let _ = writeln!(side, "max = {}", fmt_f64(max));
    let _ = writeln!(side, "levels = 255");
    let _ = writeln!(side, "scaling = linear min-max, pixel = round(255 * (v - min) / (max - min))");
    if degenerate {
        let _ = writeln!(side, "note = degenerate range (max == min); all pixels 0");
    }
    fs::write(pgm_sidecar(path), side)?;
    Ok(())
}

/// Reads back a P2 image as `(width, height, pixels)`.
pub fn read_pgm(text: &str) -> Result<(usize, usize, Vec<u8>)> {
    let bad = |m: &str| Error::invalid(format!("malformed PGM: {m}"));
    let mut tokens = text.split_whitespace();
    if tokens.next() != Some("P2") {
        return Err(bad("missing P2 magic"));
    }
    let mut next = |what: &str| -> Result<usize> {
        tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(what))
    };
    let (w, h, maxval) = (next("width")?, next("height")?, next("max value")?);
    if maxval != 255 {
        return Err(bad("max value must be 255"));
    }
    let pixels = (0..w * h)
        .map(|_| next("pixel").map(|p| p as u8))
        .collect::<Result<Vec<_>>>()?;
    Ok((w, h, pixels))
}
