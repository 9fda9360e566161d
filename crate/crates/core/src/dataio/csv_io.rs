use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Parses a headerless, comma-separated numeric matrix (one row per line).
pub fn parse_csv_matrix(reader: impl Read) -> Result<Matrix> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for record in csv.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: match e.kind() {
                csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                    format!("row has {len} fields, expected {expected_len}")
                }
                _ => e.to_string(),
            },
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if cols.is_some_and(|c| c != record.len()) {
            return Err(Error::Parse {
                line,
                msg: format!("row has {} fields, expected {}", record.len(), cols.unwrap_or(0)),
            });
        }
        cols = Some(record.len());
        for (k, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("field {} is not a number: {field:?}", k + 1),
            })?;
            data.push(value);
        }
        rows += 1;
    }
    let cols = cols.ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    Matrix::new(rows, cols, data)
}

pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_csv_matrix(file).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        other => other,
    })
}

/// Formats a matrix as CSV. Values use the shortest decimal form that
/// parses back to the identical `f64` (at most 17 significant digits).
pub fn format_csv_matrix(matrix: &Matrix, out: &mut impl Write) -> std::io::Result<()> {
    for i in 0..matrix.rows() {
        let row = matrix.row(i);
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{v:?}")?;
        }
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_csv_matrix(path: impl AsRef<Path>, matrix: &Matrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    format_csv_matrix(matrix, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}
