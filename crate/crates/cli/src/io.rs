//! CSV formats.
//!
//! * measures: header `w,x1,...,xd`, one atom per row;
//! * plans: header `i,j,mass`, one row per positive entry;
//! * maps: header `y_idx,w_idx,x1,...,xd,mass`.
//!
//! Floats are written in shortest round-trip form, so files reload bit for bit.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use otrelax::ot::TransportPlan;
use otrelax::otr::MapEntry;
use otrelax::DiscreteMeasure;

use crate::error::{CliError, Result};

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::format(path, format!("{other:?}")),
    }
}

fn coordinate_header(dim: usize) -> impl Iterator<Item = String> {
    (1..=dim).map(|k| format!("x{k}"))
}

pub fn read_measure(path: &Path) -> Result<DiscreteMeasure> {
    let mut rdr = reader(path)?;
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let dim = header.len().saturating_sub(1);
    let expected: Vec<String> = std::iter::once("w".to_string())
        .chain(coordinate_header(dim))
        .collect();
    if dim == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(CliError::format(
            path,
            format!(
                "expected header {}, found {}",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }
    let mut weights = Vec::new();
    let mut points = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        for (col, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                CliError::format(
                    path,
                    format!(
                        "row {}: column {}: not a number: {field:?}",
                        row + 1,
                        &header[col]
                    ),
                )
            })?;
            if col == 0 {
                weights.push(value);
            } else {
                points.push(value);
            }
        }
    }
    DiscreteMeasure::new(dim, points, weights).map_err(|e| CliError::format(path, e.to_string()))
}

pub fn write_measure(path: &Path, mu: &DiscreteMeasure) -> Result<()> {
    let mut w = writer(path)?;
    let header: Vec<String> = std::iter::once("w".to_string())
        .chain(coordinate_header(mu.dim()))
        .collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for (weight, point) in mu.weights().iter().zip(mu.points()) {
        let row = std::iter::once(weight).chain(point).map(|v| v.to_string());
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_plan(path: &Path, plan: &TransportPlan) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["i", "j", "mass"])
        .map_err(|e| csv_err(path, e))?;
    for (i, j, mass) in plan.support(0.0) {
        w.write_record([i.to_string(), j.to_string(), mass.to_string()])
            .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn write_map(path: &Path, map: &[MapEntry], dim: usize) -> Result<()> {
    let mut w = writer(path)?;
    let header: Vec<String> = ["y_idx".to_string(), "w_idx".to_string()]
        .into_iter()
        .chain(coordinate_header(dim))
        .chain(std::iter::once("mass".to_string()))
        .collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for entry in map {
        let row = [entry.y_idx.to_string(), entry.w_idx.to_string()]
            .into_iter()
            .chain(entry.xstar.iter().map(f64::to_string))
            .chain(std::iter::once(entry.mass.to_string()));
        w.write_record(row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `contents` to `path`.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    let mut file = File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| CliError::io(path, e))
}
