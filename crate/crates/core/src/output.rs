//! CSV tables and JSON sidecars, written atomically (temp file + rename).
//!
//! Floats use Rust's shortest round-trip formatting, so identical inputs
//! give byte-identical files.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::distribution::Distribution;
use crate::error::Result;
use crate::linalg::C64;
use crate::limit_law::StepDensity;
use crate::poisson::{ComparisonRow, Dispersion};
use crate::spectral::PerturbationReport;

pub const DISTRIBUTION_HEADER: &[&str] = &["x", "prob"];
pub const DISTRIBUTION_MC_HEADER: &[&str] = &["x", "prob", "stderr"];
pub const CHAR_FN_HEADER: &[&str] = &["xi", "re", "im"];
pub const SPECTRAL_HEADER: &[&str] = &["k", "xi", "p", "eps", "measured", "predicted", "rel_err"];
pub const OVERLAY_HEADER: &[&str] = &["x", "f_t", "f_star"];
pub const KS_HEADER: &[&str] = &["t", "p", "ks"];
pub const POISSON_HEADER: &[&str] = &["xi", "sim_re", "formula", "abs_diff"];
pub const DISPERSION_HEADER: &[&str] = &["k", "theta", "alpha", "beta"];

pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn persist(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Header plus stringified rows; one schema per file kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &'static [&'static str], rows: Vec<Vec<String>>) -> Self {
        Table { header, rows }
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        csv_bytes(self.header, self.rows.iter().cloned())
    }

    /// Rows as objects keyed by column; numeric cells become JSON numbers.
    pub fn to_json(&self) -> serde_json::Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, v)| {
                        let cell = match v.parse::<f64>() {
                            Ok(x) if x.is_finite() => serde_json::json!(x),
                            _ => serde_json::Value::String(v.clone()),
                        };
                        (k.to_string(), cell)
                    })
                    .collect::<serde_json::Map<_, _>>();
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::Value::Array(rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        persist(path, &self.csv_bytes()?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_json())
    }
}

pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    persist(path, &bytes)
}

/// Parity rows only; with `stderr`, a third column.
pub fn distribution_table(dist: &Distribution, stderr: Option<&[f64]>) -> Table {
    let header = if stderr.is_some() {
        DISTRIBUTION_MC_HEADER
    } else {
        DISTRIBUTION_HEADER
    };
    let rows = dist
        .iter()
        .enumerate()
        .map(|(j, (x, p))| {
            let mut row = vec![x.to_string(), num(p)];
            if let Some(se) = stderr {
                row.push(num(se[j]));
            }
            row
        })
        .collect();
    Table::new(header, rows)
}

pub fn char_fn_table(rows: &[(f64, C64)]) -> Table {
    Table::new(
        CHAR_FN_HEADER,
        rows.iter().map(|(xi, z)| vec![num(*xi), num(z.re), num(z.im)]).collect(),
    )
}

pub fn spectral_table(reports: &[PerturbationReport]) -> Table {
    Table::new(
        SPECTRAL_HEADER,
        reports
            .iter()
            .map(|r| {
                vec![
                    num(r.k),
                    num(r.xi),
                    num(r.p),
                    num(r.eps),
                    num(r.measured),
                    num(r.predicted),
                    num(r.rel_err),
                ]
            })
            .collect(),
    )
}

/// `(x/√t, f_t, f_*)` at the plateau centers.
pub fn overlay_table(step: &StepDensity, f_star: impl Fn(f64) -> f64) -> Table {
    Table::new(
        OVERLAY_HEADER,
        step.plateaus()
            .map(|(x, ft)| vec![num(x), num(ft), num(f_star(x))])
            .collect(),
    )
}

pub fn ks_table(rows: &[(usize, f64, f64)]) -> Table {
    Table::new(
        KS_HEADER,
        rows.iter().map(|(t, p, ks)| vec![t.to_string(), num(*p), num(*ks)]).collect(),
    )
}

pub fn poisson_table(rows: &[ComparisonRow]) -> Table {
    Table::new(
        POISSON_HEADER,
        rows.iter()
            .map(|r| vec![num(r.xi), num(r.sim.re), num(r.formula), num(r.abs_diff)])
            .collect(),
    )
}

pub fn dispersion_table(rows: &[Dispersion]) -> Table {
    Table::new(
        DISPERSION_HEADER,
        rows.iter()
            .map(|d| vec![num(d.k), num(d.theta), num(d.alpha), num(d.beta)])
            .collect(),
    )
}
