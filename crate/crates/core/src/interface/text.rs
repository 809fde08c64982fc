use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

use super::write_atomic;

pub const MATRIX_HEADER: &str = "# bidfm-matrix v1";

/// Dense text: header comment, `rows cols`, then one whitespace-separated row per line.
/// Values use the shortest representation that parses back to the same double.
pub fn matrix_to_string(m: &Matrix) -> String {
    let mut out = String::with_capacity(m.rows() * m.cols() * 8 + 32);
    out.push_str(MATRIX_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for row in m.row_iter() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, m: &Matrix) -> Result<()> {
    write_atomic(path, matrix_to_string(m).as_bytes())
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    matrix_from_str(&std::fs::read_to_string(path)?)
}

pub fn matrix_from_str(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let (line, dims) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing dimensions line".into()))?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| parse_err(line, format!("bad dimensions: {e}")))?;
    let [rows, cols] = dims[..] else {
        return Err(parse_err(line, "expected `rows cols`".into()));
    };
    let mut data = Vec::with_capacity(rows * cols);
    let mut last = line;
    for r in 0..rows {
        let (line, text) = lines
            .next()
            .ok_or_else(|| parse_err(last + 1, format!("expected {rows} rows, found {r}")))?;
        last = line;
        let before = data.len();
        for tok in text.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?,
            );
        }
        if data.len() - before != cols {
            return Err(parse_err(
                line,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(parse_err(line, format!("data beyond the declared {rows} rows")));
    }
    Matrix::from_vec(rows, cols, data)
}
