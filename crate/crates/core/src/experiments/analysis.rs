use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::absolute_degrees;
use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, Matrix, DEFAULT_SVD_TOL};
use crate::membership::Membership;
use crate::metrics::{ari, hamming_error, nmi};

/// Singular values below this fraction of the largest are treated as zero.
pub const ZERO_SINGULAR_REL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct EigengapEstimate {
    pub k: usize,
    pub singular_values: Vec<f64>,
    /// `σ_k / σ_{k+1}` for `k = 1..m-1`; infinite when `σ_{k+1}` is zero.
    pub ratios: Vec<f64>,
}

/// Picks `K` maximizing `σ_K / σ_{K+1}` among the leading `m` singular values.
/// The first `K` followed by a zero singular value wins outright.
pub fn estimate_k_eigengap(a: &Matrix, m: usize) -> Result<EigengapEstimate> {
    let max_m = a.rows().min(a.cols());
    if m < 2 || m > max_m {
        return Err(Error::Precondition(format!(
            "need 2 <= m <= {max_m} singular values (found {m})"
        )));
    }
    let svd = truncated_svd(a, m, DEFAULT_SVD_TOL)?;
    let s = svd.singular_values;
    if s[0] <= 0.0 {
        return Err(Error::Precondition("the matrix is zero".into()));
    }
    let zero = s[0] * ZERO_SINGULAR_REL;
    let ratios: Vec<f64> = (0..m - 1)
        .map(|k| if s[k + 1] <= zero { f64::INFINITY } else { s[k] / s[k + 1] })
        .collect();
    let k = match ratios.iter().position(|r| r.is_infinite()) {
        Some(i) => i + 1,
        None => {
            let mut best = 0;
            for (i, r) in ratios.iter().enumerate() {
                if *r > ratios[best] {
                    best = i;
                }
            }
            best + 1
        }
    };
    Ok(EigengapEstimate {
        k,
        singular_values: s,
        ratios,
    })
}

/// Absolute row and column sums.
pub fn degree_profiles(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    absolute_degrees(a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMode {
    /// Drop zero-degree rows.
    Rows,
    /// Drop zero-degree columns.
    Cols,
    /// Drop zero-degree rows and zero-degree columns independently.
    RowsCols,
    /// Square matrix: drop node `i` from both sides when its row and column are both empty.
    BothAnd,
    /// Square matrix: drop node `i` from both sides when its row or column is empty.
    BothOr,
}

impl FilterMode {
    pub const ALL: [FilterMode; 5] = [
        FilterMode::Rows,
        FilterMode::Cols,
        FilterMode::RowsCols,
        FilterMode::BothAnd,
        FilterMode::BothOr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FilterMode::Rows => "rows",
            FilterMode::Cols => "cols",
            FilterMode::RowsCols => "rows-cols",
            FilterMode::BothAnd => "both-and",
            FilterMode::BothOr => "both-or",
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FilterMode::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| Error::Config(format!("unknown filter mode {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterResult {
    pub matrix: Matrix,
    /// Original indices of the rows and columns that remain, ascending.
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    pub removed_rows: Vec<usize>,
    pub removed_cols: Vec<usize>,
    /// Zero-degree rows and columns of the input.
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
}

/// Removes zero-degree nodes according to `mode`.
pub fn filter_zero_degree(a: &Matrix, mode: FilterMode) -> Result<FilterResult> {
    let (d_r, d_c) = absolute_degrees(a);
    let zeros = |d: &[f64]| -> Vec<bool> { d.iter().map(|&x| x == 0.0).collect() };
    let (zr, zc) = (zeros(&d_r), zeros(&d_c));
    let (drop_r, drop_c): (Vec<bool>, Vec<bool>) = match mode {
        FilterMode::Rows => (zr.clone(), vec![false; a.cols()]),
        FilterMode::Cols => (vec![false; a.rows()], zc.clone()),
        FilterMode::RowsCols => (zr.clone(), zc.clone()),
        FilterMode::BothAnd | FilterMode::BothOr => {
            if a.rows() != a.cols() {
                return Err(Error::Dimension(format!(
                    "{mode} needs a square matrix (found {}x{})",
                    a.rows(),
                    a.cols()
                )));
            }
            let both: Vec<bool> = zr
                .iter()
                .zip(&zc)
                .map(|(&r, &c)| if mode == FilterMode::BothAnd { r && c } else { r || c })
                .collect();
            (both.clone(), both)
        }
    };
    let split = |flags: &[bool], want: bool| -> Vec<usize> {
        flags.iter().enumerate().filter(|(_, &f)| f == want).map(|(i, _)| i).collect()
    };
    let kept_rows = split(&drop_r, false);
    let kept_cols = split(&drop_c, false);
    if kept_rows.is_empty() || kept_cols.is_empty() {
        return Err(Error::Precondition("filtering removes every node".into()));
    }
    Ok(FilterResult {
        matrix: a.select(&kept_rows, &kept_cols),
        removed_rows: split(&drop_r, true),
        removed_cols: split(&drop_c, true),
        zero_rows: split(&zr, true),
        zero_cols: split(&zc, true),
        kept_rows,
        kept_cols,
    })
}

/// Agreement between the row and column partitions of the same node set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub hamming: f64,
    pub nmi: f64,
    pub ari: f64,
}

pub fn row_column_similarity(rows: &Membership, cols: &Membership) -> Result<Similarity> {
    if rows.len() != cols.len() {
        return Err(Error::Dimension(format!(
            "row and column partitions cover {} and {} nodes",
            rows.len(),
            cols.len()
        )));
    }
    if rows.k() != cols.k() {
        return Err(Error::Precondition(format!(
            "row and column partitions have {} and {} clusters",
            rows.k(),
            cols.k()
        )));
    }
    Ok(Similarity {
        hamming: hamming_error(rows, cols)?,
        nmi: nmi(rows, cols)?,
        ari: ari(rows, cols)?,
    })
}
