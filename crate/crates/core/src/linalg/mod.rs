//! Dense linear algebra used by every detector: matrices, SVDs, row normalization and k-means.

mod kmeans;
mod matrix;
mod svd;

pub use kmeans::{kmeans, KMeansResult, DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
pub use matrix::{axpy, dot, norm, squared_distance, Matrix};
pub use svd::{
    dense_svd, spectral_deviation, spectral_norm, truncated_svd, truncated_svd_with, SvdFactors,
    SvdOptions, DEFAULT_SVD_TOL,
};

/// Rows scaled to unit Euclidean norm.
#[derive(Clone, Debug)]
pub struct RowNormalized {
    pub matrix: Matrix,
    /// Zero-based indices of rows whose norm was below `eps`; they are left untouched.
    pub degenerate: Vec<usize>,
}

pub fn row_normalize(m: &Matrix, eps: f64) -> RowNormalized {
    let mut out = m.clone();
    let mut degenerate = Vec::new();
    for i in 0..m.rows() {
        let row = out.row_mut(i);
        let len = norm(row);
        if len < eps {
            degenerate.push(i);
        } else {
            row.iter_mut().for_each(|v| *v /= len);
        }
    }
    RowNormalized {
        matrix: out,
        degenerate,
    }
}
