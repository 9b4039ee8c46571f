//! Matrix CSV files and JSON documents.
//!
//! Matrices are plain CSV: comma-separated, one row per line, no header.
//! Values are written in Rust's shortest round-trip form, so reading a file
//! back reproduces every bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use outreg::{Mask, Matrix};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

pub fn parse_matrix(text: &str, path: &Path) -> Result<Matrix> {
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| HarnessError::Parse {
            path: path.to_owned(),
            row: i + 1,
            col: 0,
            msg: e.to_string(),
        })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(HarnessError::Parse {
                    path: path.to_owned(),
                    row: i + 1,
                    col: record.len().min(c) + 1,
                    msg: format!("expected {c} fields, found {}", record.len()),
                })
            }
            _ => {}
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| HarnessError::Parse {
                path: path.to_owned(),
                row: i + 1,
                col: j + 1,
                msg: format!("not a number: {field:?}"),
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let Some(cols) = cols else {
        return Err(HarnessError::Format { path: path.to_owned(), msg: "no data rows".into() });
    };
    Ok(Matrix::new(rows, cols, data)?)
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    parse_matrix(&text, path)
}

/// A vector stored either as one row or as one column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(HarnessError::Format {
            path: path.to_owned(),
            msg: format!("expected a single row or column, found {}x{}", m.rows(), m.cols()),
        });
    }
    Ok(m.into_vec())
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    write_text(path, &format_matrix(m))
}

/// Masks are written as 0/1 matrices.
pub fn write_mask(path: &Path, mask: &Mask) -> Result<()> {
    let (rows, cols) = mask.shape();
    let mut out = String::new();
    for i in 0..rows {
        let line: Vec<&str> = (0..cols).map(|j| if mask.get(i, j) { "1" } else { "0" }).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    f.write_all(text.as_bytes()).map_err(|source| HarnessError::Io { path: path.to_owned(), source })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json { path: path.to_owned(), source })
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("m.csv")
    }

    #[test]
    fn single_value() {
        let m = parse_matrix("3.5\n", p()).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert_eq!(m[(0, 0)], 3.5);
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(parse_matrix("", p()), Err(HarnessError::Format { .. })));
        assert!(matches!(parse_matrix("\n\n", p()), Err(HarnessError::Format { .. })));
    }

    #[test]
    fn ragged_row_location() {
        match parse_matrix("1,2,3\n4,5\n", p()) {
            Err(HarnessError::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_numeric_location() {
        match parse_matrix("1,2\n3,x\n", p()) {
            Err(HarnessError::Parse { row, col, .. }) => assert_eq!((row, col), (2, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn extreme_values_round_trip() {
        let vals = vec![1e300, -5e-324, 0.1 + 0.2, -0.0, f64::MAX, f64::MIN_POSITIVE];
        let m = Matrix::new(2, 3, vals.clone()).unwrap();
        let back = parse_matrix(&format_matrix(&m), p()).unwrap();
        for (a, b) in back.as_slice().iter().zip(&vals) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
