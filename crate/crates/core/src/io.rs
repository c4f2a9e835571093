//! Plain-text file formats: matrices as comma-separated rows, vectors as one value
//! per line, reports as JSON. Numbers are written in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let t = field.trim();
    t.parse::<f64>()
        .map_err(|_| Error::Parse(format!("line {line}: cannot parse {t:?} as a number")))
}

fn reader(path: &Path) -> Result<csv::Reader<File>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Reads a dense matrix, one row per line.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = rec
            .iter()
            .map(|f| parse_number(f, i + 1))
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse(format!(
                    "{}: row {} has {} entries, expected {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: empty matrix", path.display())));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(m, n, rows.into_iter().flatten()))
}

/// Reads a vector stored one value per line (a single comma-separated row is
/// accepted as well).
pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let mut values = Vec::new();
    for (i, rec) in reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        for f in rec.iter().filter(|f| !f.is_empty()) {
            values.push(parse_number(f, i + 1)?);
        }
    }
    if values.is_empty() {
        return Err(Error::Parse(format!("{}: empty vector", path.display())));
    }
    Ok(DVector::from_vec(values))
}

pub fn write_matrix_csv(path: &Path, a: &DMatrix<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for row in a.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_csv(path: &Path, v: &DVector<f64>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in v.iter() {
        writeln!(w, "{x}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
