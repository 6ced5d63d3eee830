//! Field files: a CSV of resolved coefficients `(k_1..k_d, re, im)` plus a JSON
//! sidecar `{d, n, K}` where `K` is the largest resolved wavenumber per axis.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SpectralField};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

fn sidecar_path(csv_path: &Path) -> std::path::PathBuf {
    csv_path.with_extension("json")
}

/// Writes `path` (CSV) and its `.json` sidecar.
pub fn write_field(field: &SpectralField, path: &Path) -> Result<()> {
    let grid = field.grid();
    let d = grid.dim();
    let mut modes: Vec<_> = field.modes().collect();
    modes.sort_by(|a, b| a.0.cmp(&b.0));
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<String> = (1..=d).map(|j| format!("k_{j}")).collect();
    header.push("re".into());
    header.push("im".into());
    writer.write_record(&header)?;
    for (k, c) in modes {
        let mut row: Vec<String> = k.components().iter().map(|v| v.to_string()).collect();
        row.push(format!("{:e}", c.re));
        row.push(format!("{:e}", c.im));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    let sidecar = FieldSidecar { d, n: grid.points_per_axis(), k: grid.max_mode() };
    serde_json::to_writer_pretty(File::create(sidecar_path(path))?, &sidecar)?;
    Ok(())
}

/// Reads a field written by [`write_field`]; the grid gets the default 3/2 padding.
pub fn read_field(path: &Path) -> Result<SpectralField> {
    let sidecar: FieldSidecar = serde_json::from_reader(File::open(sidecar_path(path))?)?;
    let grid = Grid::new(sidecar.d, sidecar.n)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut reader = csv::Reader::from_path(path)?;
    for record in reader.records() {
        let record = record?;
        if record.len() != sidecar.d + 2 {
            return Err(Error::Parse(format!("expected {} columns, got {}", sidecar.d + 2, record.len())));
        }
        let parse_i = |s: &str| s.trim().parse::<i64>().map_err(|e| Error::Parse(e.to_string()));
        let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        let k: Vec<i64> = (0..sidecar.d).map(|j| parse_i(&record[j])).collect::<Result<_>>()?;
        let idx =
            grid.index_of(&k).ok_or_else(|| Error::Parse(format!("mode {k:?} not resolved on n = {}", sidecar.n)))?;
        coeffs[idx] = Complex64::new(parse_f(&record[sidecar.d])?, parse_f(&record[sidecar.d + 1])?);
    }
    SpectralField::from_coefficients(grid, coeffs)
}
