//! File formats: symbol fields as CSV plus a JSON sidecar, kernel batches as
//! JSON in and CSV out.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelSample, Triple};
use crate::scalar::Real;
use crate::weyl::{PhaseGrid, SymbolField};

#[derive(Serialize, Deserialize)]
struct SymbolRow<T> {
    q: T,
    p: T,
    re: T,
    im: T,
}

/// Everything about a [`SymbolField`] that is not a sample value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSidecar<T> {
    pub grid: PhaseGrid<T>,
    pub real_valued: bool,
    pub real_tolerance: T,
    pub normalization: Option<T>,
    pub max_error_estimate: Option<T>,
    pub invalid_points: usize,
    pub warnings: Vec<String>,
}

impl<T: Real> SymbolSidecar<T> {
    pub fn of(field: &SymbolField<T>) -> Self {
        Self {
            grid: field.grid,
            real_valued: field.real_valued,
            real_tolerance: field.real_tolerance,
            normalization: field.normalization,
            max_error_estimate: field.max_error_estimate,
            invalid_points: field.mask.iter().filter(|m| !**m).count(),
            warnings: field.warnings.clone(),
        }
    }
}

/// Sidecar location for a field CSV: same stem, `.json` extension.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Columns `q,p,re,im`, one row per grid point in row-major order.
pub fn write_symbol_csv<T: Real, W: Write>(field: &SymbolField<T>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for k in 0..field.grid.len() {
        let x = field.grid.point_at(k);
        let v = field.values[k];
        w.serialize(SymbolRow {
            q: x.q,
            p: x.p,
            re: v.re,
            im: v.im,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_symbol_files<T: Real>(field: &SymbolField<T>, csv_path: &Path) -> Result<()> {
    write_symbol_csv(field, BufWriter::new(File::create(csv_path)?))?;
    let mut side = BufWriter::new(File::create(sidecar_path(csv_path))?);
    serde_json::to_writer_pretty(&mut side, &SymbolSidecar::of(field))?;
    side.write_all(b"\n")?;
    side.flush()?;
    Ok(())
}

/// Reads values back against a known grid; coordinates must match it.
pub fn read_symbol_csv<T: Real, R: Read>(input: R, grid: PhaseGrid<T>) -> Result<SymbolField<T>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != ["q", "p", "re", "im"] {
        return Err(Error::Parse(format!("expected header q,p,re,im, got {headers:?}")));
    }
    let mut values = Vec::with_capacity(grid.len());
    let tol = T::lit(1e-9) * (grid.dq().max(grid.dp()));
    for (k, row) in r.deserialize::<SymbolRow<T>>().enumerate() {
        let row = row.map_err(csv_error)?;
        if k >= grid.len() {
            return Err(Error::shape(grid.len(), format!("more than {} rows", grid.len())));
        }
        let x = grid.point_at(k);
        if (row.q - x.q).abs() > tol || (row.p - x.p).abs() > tol {
            return Err(Error::Parse(format!(
                "row {k} at ({}, {}) does not match grid point ({}, {})",
                row.q, row.p, x.q, x.p
            )));
        }
        values.push(Complex::new(row.re, row.im));
    }
    SymbolField::new(grid, values)
}

pub fn read_symbol_files<T: Real>(csv_path: &Path) -> Result<SymbolField<T>> {
    let side: SymbolSidecar<T> = serde_json::from_reader(BufReader::new(File::open(sidecar_path(csv_path))?))?;
    let mut field = read_symbol_csv(BufReader::new(File::open(csv_path)?), side.grid)?;
    field.real_valued = side.real_valued;
    field.real_tolerance = side.real_tolerance;
    field.normalization = side.normalization;
    field.max_error_estimate = side.max_error_estimate;
    field.warnings = side.warnings;
    Ok(field)
}

/// `{"triples": [{q1, p1, q2, p2, q, p}, ...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleBatch<T> {
    pub triples: Vec<Triple<T>>,
}

pub fn read_triples<T: Real>(path: &Path) -> Result<Vec<Triple<T>>> {
    let batch: TripleBatch<T> = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    Ok(batch.triples)
}

#[derive(Serialize)]
struct KernelRow<T> {
    q1: T,
    p1: T,
    q2: T,
    p2: T,
    q: T,
    p: T,
    re: T,
    im: T,
    err: T,
}

/// Columns `q1,p1,q2,p2,q,p,re,im,err`, in input order.
pub fn write_kernel_csv<T: Real, W: Write>(samples: &[KernelSample<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in samples {
        w.serialize(KernelRow {
            q1: s.x1.q,
            p1: s.x1.p,
            q2: s.x2.q,
            p2: s.x2.p,
            q: s.x_out.q,
            p: s.x_out.p,
            re: s.value.re,
            im: s.value.im,
            err: s.error_estimate,
        })
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
