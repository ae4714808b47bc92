//! Text matrix file format used for reproducibility snapshots: a header line
//! `rows cols`, then one whitespace-separated row per line. Vectors are
//! written as `n × 1` matrices. Values are printed in scientific notation
//! with full round-trip precision, so rewriting identical data yields
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::CoreError;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

fn io_err<T: Scalar>(path: &Path, e: impl std::fmt::Display) -> CoreError<T> {
    CoreError::Io { path: path.display().to_string(), message: e.to_string() }
}

/// Formats one scalar for the file. `{:e}` prints the shortest decimal that
/// round-trips, so parsing recovers the exact bits.
pub fn format_value<T: Scalar>(v: T) -> String {
    format!("{v:e}")
}

pub fn matrix_to_string<T: Scalar>(m: &Matrix<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row = m.row(i);
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v:e}");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix<T: Scalar>(path: &Path, m: &Matrix<T>) -> Result<(), CoreError<T>> {
    fs::write(path, matrix_to_string(m)).map_err(|e| io_err(path, e))
}

pub fn write_vector<T: Scalar>(path: &Path, v: &[T]) -> Result<(), CoreError<T>> {
    let m = Matrix::from_vec(v.len(), 1, v.to_vec());
    write_matrix(path, &m)
}

pub fn read_matrix<T: Scalar>(path: &Path) -> Result<Matrix<T>, CoreError<T>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_matrix(&text).map_err(|e| io_err(path, e))
}

pub fn parse_matrix<T: Scalar>(text: &str) -> Result<Matrix<T>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty matrix file")?;
    let mut parts = header.split_whitespace();
    let rows: usize =
        parts.next().ok_or("missing row count")?.parse().map_err(|_| "bad row count")?;
    let cols: usize =
        parts.next().ok_or("missing col count")?.parse().map_err(|_| "bad col count")?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| format!("bad value '{tok}' on row {i}"))?;
            data.push(T::c(v));
        }
    }
    if data.len() != rows * cols {
        return Err(format!("expected {} values, found {}", rows * cols, data.len()));
    }
    Ok(Matrix::from_vec(rows, cols, data))
}

pub fn read_vector<T: Scalar>(path: &Path) -> Result<Vec<T>, CoreError<T>> {
    let m = read_matrix(path)?;
    if m.cols() != 1 {
        return Err(CoreError::Io {
            path: path.display().to_string(),
            message: format!("expected a column vector, got {}x{}", m.rows(), m.cols()),
        });
    }
    Ok(m.data().to_vec())
}
