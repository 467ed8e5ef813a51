//! CSV output for scan and residual reports.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Round-trip decimal rendering with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Coordinates joined with `;`.
pub fn fmt_point(x: &[f64]) -> String {
    x.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(";")
}

/// Writes a header row followed by `rows`.
pub fn write_csv<W, H, R>(out: W, header: H, rows: R) -> Result<()>
where
    W: Write,
    H: IntoIterator,
    H::Item: AsRef<[u8]>,
    R: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(io_error)?;
    for row in rows {
        w.write_record(&row).map_err(io_error)?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

fn io_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// One residual of a verification check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualRecord {
    pub check: String,
    pub d: usize,
    pub k: f64,
    /// The exponent `p` for checks that take one.
    pub p: Option<f64>,
    pub point: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl ResidualRecord {
    pub fn new(check: impl Into<String>, d: usize, k: f64, point: &[f64], residual: f64, tolerance: f64) -> Self {
        Self {
            check: check.into(),
            d,
            k,
            p: None,
            point: point.to_vec(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual < tolerance,
        }
    }

    /// Overrides the pass flag for checks judged by something other than
    /// `residual < tolerance`.
    pub fn judged(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }

    pub fn with_exponent(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub const CSV_HEADER: [&'static str; 8] = ["check", "d", "k", "p", "point", "residual", "tolerance", "pass"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.check.clone(),
            self.d.to_string(),
            fmt_f64(self.k),
            self.p.map(fmt_f64).unwrap_or_default(),
            fmt_point(&self.point),
            fmt_f64(self.residual),
            fmt_f64(self.tolerance),
            self.passed.to_string(),
        ]
    }
}
