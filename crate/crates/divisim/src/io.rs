//! CSV ingest and output, written atomically.

use std::fs;
use std::io::Write;
use std::path::Path;

use divisim_core::{KdeCurve, QqTable, SampleMatrix};

use crate::Error;

pub fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a single numeric column, with an optional `x` header row.
pub fn read_sample_csv(path: &Path) -> Result<Vec<f64>, Error> {
    let text = read_text(path)?;
    parse_sample_csv(&text)
}

pub fn parse_sample_csv(text: &str) -> Result<Vec<f64>, Error> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.len() != 1 {
            return Err(Error::Csv(format!("line {}: expected one column, found {}", k + 1, record.len())));
        }
        let field = &record[0];
        if k == 0 && field == "x" {
            continue;
        }
        let v: f64 = field.parse().map_err(|_| Error::Csv(format!("line {}: {field:?} is not a number", k + 1)))?;
        values.push(v);
    }
    Ok(values)
}

fn csv_bytes<'a>(header: &[&str], rows: impl Iterator<Item = Vec<f64>> + 'a) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn sample_matrix_csv(s: &SampleMatrix) -> Vec<u8> {
    let names: Vec<&str> = s.column_names().iter().map(String::as_str).collect();
    csv_bytes(&names, (0..s.n_rows()).map(|k| s.row(k).to_vec()))
}

pub fn qq_csv(table: &QqTable) -> Vec<u8> {
    csv_bytes(&["p", "q_empirical", "q_model"], table.rows.iter().map(|r| vec![r.p, r.empirical, r.model]))
}

pub fn kde_csv(curve: &KdeCurve) -> Vec<u8> {
    csv_bytes(&["x", "density"], curve.points.iter().map(|&(x, d)| vec![x, d]))
}

/// Several density columns over one shared grid: `x,<name1>,<name2>,…`.
pub fn kde_wide_csv(grid: &[f64], columns: &[(&str, Vec<f64>)]) -> Vec<u8> {
    let mut header = vec!["x"];
    header.extend(columns.iter().map(|c| c.0));
    csv_bytes(&header, grid.iter().enumerate().map(|(k, &x)| {
        let mut row = vec![x];
        row.extend(columns.iter().map(|c| c.1[k]));
        row
    }))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut builder = tempfile::Builder::new();
    builder.prefix(".divisim-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
