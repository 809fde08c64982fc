//! Spectral co-clustering of the rows and columns of a bipartite adjacency
//! matrix.
//!
//! [`bisc`] clusters the leading singular vectors directly, [`nbisc`] first
//! scales every singular-vector row to unit length, which removes per-node
//! degree effects. [`disim`], [`dscore`] and [`rdscore`] are comparison
//! baselines built on a regularized Laplacian and on entrywise ratios
//! against the leading singular vector.
//!
//! All detectors assume `K_r ≤ K_c`; when called with `K_r > K_c` they work
//! on `Aᵀ` and swap the two sides of the result.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{
    kmeans, row_normalize, truncated_svd, Matrix, DEFAULT_MAX_ITER, DEFAULT_RESTARTS,
    DEFAULT_SVD_TOL,
};
use crate::membership::Membership;
use crate::rng::{derive_seed, tags};

/// Rows with norm below this are left unnormalized and reported.
pub const DEGENERATE_ROW_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Bisc,
    Nbisc,
    Disim,
    Dscore,
    Rdscore,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Bisc,
        Algorithm::Nbisc,
        Algorithm::Disim,
        Algorithm::Dscore,
        Algorithm::Rdscore,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Bisc => "BiSC",
            Algorithm::Nbisc => "nBiSC",
            Algorithm::Disim => "DI-SIM",
            Algorithm::Dscore => "D-SCORE",
            Algorithm::Rdscore => "rD-SCORE",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "bisc" => Ok(Algorithm::Bisc),
            "nbisc" => Ok(Algorithm::Nbisc),
            "disim" => Ok(Algorithm::Disim),
            "dscore" => Ok(Algorithm::Dscore),
            "rdscore" => Ok(Algorithm::Rdscore),
            _ => Err(Error::Config(format!("unknown algorithm {s:?}"))),
        }
    }
}

impl serde::Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Laplacian regularizer `τ` added to every degree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Regularizer {
    /// Mean absolute degree of the side being regularized.
    Auto,
    Value(f64),
}

/// Clipping bound `T` for D-SCORE ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    /// `log(n)` for a side with `n` nodes.
    Auto,
    Value(f64),
}

#[derive(Clone, Debug)]
pub struct DetectOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
    pub svd_tol: f64,
    pub regularizer: Regularizer,
    pub threshold: Threshold,
    /// Shift negative inputs before building a Laplacian instead of failing.
    pub shift_negative: bool,
}

impl Default for DetectOptions {
    fn default() -> Self {
        DetectOptions {
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            max_iter: DEFAULT_MAX_ITER,
            svd_tol: DEFAULT_SVD_TOL,
            regularizer: Regularizer::Auto,
            threshold: Threshold::Auto,
            shift_negative: true,
        }
    }
}

impl DetectOptions {
    pub fn with_seed(seed: u64) -> Self {
        DetectOptions {
            seed,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub row_objective: f64,
    pub col_objective: f64,
    /// Zero-based rows (columns) whose embedding was too short to normalize.
    pub degenerate_rows: Vec<usize>,
    pub degenerate_cols: Vec<usize>,
    /// Constant added to make the input non-negative (0 when none).
    pub shift: f64,
    /// Number of D-SCORE ratio entries clipped to `±T`.
    pub clipped: usize,
    /// Whether the work was done on `Aᵀ`.
    pub transposed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub row_labels: Membership,
    pub col_labels: Membership,
    pub singular_values: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl DetectionResult {
    fn swap_sides(self) -> DetectionResult {
        let d = self.diagnostics;
        DetectionResult {
            row_labels: self.col_labels,
            col_labels: self.row_labels,
            singular_values: self.singular_values,
            diagnostics: Diagnostics {
                row_objective: d.col_objective,
                col_objective: d.row_objective,
                degenerate_rows: d.degenerate_cols,
                degenerate_cols: d.degenerate_rows,
                shift: d.shift,
                clipped: d.clipped,
                transposed: !d.transposed,
            },
        }
    }
}

pub fn bisc(a: &Matrix, k_r: usize, k_c: usize, seed: u64) -> Result<DetectionResult> {
    detect(Algorithm::Bisc, a, k_r, k_c, &DetectOptions::with_seed(seed))
}

pub fn nbisc(a: &Matrix, k_r: usize, k_c: usize, seed: u64) -> Result<DetectionResult> {
    detect(Algorithm::Nbisc, a, k_r, k_c, &DetectOptions::with_seed(seed))
}

/// Fails on negative entries; shift the input with [`shift_nonnegative`] first.
pub fn disim(
    a: &Matrix,
    k_r: usize,
    k_c: usize,
    regularizer: Regularizer,
    seed: u64,
) -> Result<DetectionResult> {
    let opts = DetectOptions {
        regularizer,
        shift_negative: false,
        ..DetectOptions::with_seed(seed)
    };
    detect(Algorithm::Disim, a, k_r, k_c, &opts)
}

pub fn dscore(
    a: &Matrix,
    k_r: usize,
    k_c: usize,
    threshold: Threshold,
    seed: u64,
) -> Result<DetectionResult> {
    let opts = DetectOptions {
        threshold,
        ..DetectOptions::with_seed(seed)
    };
    detect(Algorithm::Dscore, a, k_r, k_c, &opts)
}

pub fn rdscore(
    a: &Matrix,
    k_r: usize,
    k_c: usize,
    regularizer: Regularizer,
    threshold: Threshold,
    seed: u64,
) -> Result<DetectionResult> {
    let opts = DetectOptions {
        regularizer,
        threshold,
        shift_negative: false,
        ..DetectOptions::with_seed(seed)
    };
    detect(Algorithm::Rdscore, a, k_r, k_c, &opts)
}

/// Adds `max(0, −min A) + 0.01·range(A)` (range taken as 1 when zero) to
/// every entry when `A` has a negative entry; returns `A` unchanged otherwise.
pub fn shift_nonnegative(a: &Matrix) -> (Matrix, f64) {
    let min = a.min_value();
    if min >= 0.0 {
        return (a.clone(), 0.0);
    }
    let range = a.max_value() - min;
    let range = if range > 0.0 { range } else { 1.0 };
    let shift = -min + 0.01 * range;
    (a.map(|v| v + shift), shift)
}

/// Runs `alg` with the given options.
pub fn detect(
    alg: Algorithm,
    a: &Matrix,
    k_r: usize,
    k_c: usize,
    opts: &DetectOptions,
) -> Result<DetectionResult> {
    let (n_r, n_c) = a.shape();
    if k_r == 0 || k_c == 0 {
        return Err(Error::Dimension("K_r and K_c must be at least 1".into()));
    }
    if k_r > n_r || k_c > n_c {
        return Err(Error::Dimension(format!(
            "cannot form {k_r} row and {k_c} column clusters from a {n_r}×{n_c} matrix"
        )));
    }
    if !a.is_finite() {
        return Err(Error::Dimension("input has non-finite entries".into()));
    }
    if k_r > k_c {
        return Ok(oriented(alg, &a.transpose(), k_c, k_r, opts)?.swap_sides());
    }
    oriented(alg, a, k_r, k_c, opts)
}

fn oriented(
    alg: Algorithm,
    a: &Matrix,
    k_r: usize,
    k_c: usize,
    opts: &DetectOptions,
) -> Result<DetectionResult> {
    let k = k_r;
    if matches!(alg, Algorithm::Dscore | Algorithm::Rdscore) && k < 2 {
        return Err(Error::Unsupported(format!(
            "{alg} needs at least two singular vectors (min(K_r, K_c) = {k})"
        )));
    }
    let mut diagnostics = Diagnostics::default();
    let laplacian;
    let input = match alg {
        Algorithm::Disim | Algorithm::Rdscore => {
            let shifted;
            let base = if a.min_value() < 0.0 {
                if !opts.shift_negative {
                    return Err(Error::Precondition(format!(
                        "{alg} needs a non-negative matrix; shift it first"
                    )));
                }
                let (s, shift) = shift_nonnegative(a);
                diagnostics.shift = shift;
                shifted = s;
                &shifted
            } else {
                a
            };
            laplacian = regularized_laplacian(base, opts.regularizer)?;
            &laplacian
        }
        _ => a,
    };

    let svd = truncated_svd(input, k, opts.svd_tol)?;
    let (row_embed, col_embed) = match alg {
        Algorithm::Bisc => (svd.left.clone(), svd.right.clone()),
        Algorithm::Nbisc | Algorithm::Disim => {
            let r = row_normalize(&svd.left, DEGENERATE_ROW_EPS);
            let c = row_normalize(&svd.right, DEGENERATE_ROW_EPS);
            diagnostics.degenerate_rows = r.degenerate;
            diagnostics.degenerate_cols = c.degenerate;
            (r.matrix, c.matrix)
        }
        Algorithm::Dscore | Algorithm::Rdscore => {
            let (r, clipped_r) = ratio_matrix(&svd.left, opts.threshold);
            let (c, clipped_c) = ratio_matrix(&svd.right, opts.threshold);
            diagnostics.clipped = clipped_r + clipped_c;
            (r, c)
        }
    };

    // One stream for both sides keeps the result independent of orientation.
    let seed = derive_seed(opts.seed, tags::DETECT_KMEANS, 0);
    let rows = kmeans(&row_embed, k_r, seed, opts.restarts, opts.max_iter)?;
    let cols = kmeans(&col_embed, k_c, seed, opts.restarts, opts.max_iter)?;
    diagnostics.row_objective = rows.objective;
    diagnostics.col_objective = cols.objective;
    Ok(DetectionResult {
        row_labels: rows.labels,
        col_labels: cols.labels,
        singular_values: svd.singular_values,
        diagnostics,
    })
}

/// `D_r(τ_r)^{-1/2} A D_c(τ_c)^{-1/2}` with absolute degrees.
pub fn regularized_laplacian(a: &Matrix, regularizer: Regularizer) -> Result<Matrix> {
    let (d_r, d_c) = absolute_degrees(a);
    let tau = |d: &[f64]| -> Result<f64> {
        match regularizer {
            Regularizer::Auto => Ok(d.iter().sum::<f64>() / d.len() as f64),
            Regularizer::Value(t) if t >= 0.0 && t.is_finite() => Ok(t),
            Regularizer::Value(t) => Err(Error::Precondition(format!(
                "regularizer must be non-negative (found {t})"
            ))),
        }
    };
    let (tau_r, tau_c) = (tau(&d_r)?, tau(&d_c)?);
    let inv_sqrt = |d: f64| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 };
    let s_r: Vec<f64> = d_r.iter().map(|&d| inv_sqrt(d + tau_r)).collect();
    let s_c: Vec<f64> = d_c.iter().map(|&d| inv_sqrt(d + tau_c)).collect();
    Ok(Matrix::from_fn(a.rows(), a.cols(), |i, j| s_r[i] * a[(i, j)] * s_c[j]))
}

pub(crate) fn absolute_degrees(a: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let mut d_r = vec![0.0; a.rows()];
    let mut d_c = vec![0.0; a.cols()];
    for (i, row) in a.row_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            d_r[i] += v.abs();
            d_c[j] += v.abs();
        }
    }
    (d_r, d_c)
}

/// `R(i, k) = U(i, k+1) / U(i, 1)` clipped to `[−T, T]`.
fn ratio_matrix(u: &Matrix, threshold: Threshold) -> (Matrix, usize) {
    let n = u.rows();
    let t = match threshold {
        Threshold::Auto => (n as f64).ln().max(1.0),
        Threshold::Value(t) => t,
    };
    let mut clipped = 0;
    let r = Matrix::from_fn(n, u.cols() - 1, |i, k| {
        let ratio = u[(i, k + 1)] / u[(i, 0)];
        let ratio = if ratio.is_nan() { 0.0 } else { ratio };
        if ratio.abs() > t {
            clipped += 1;
            t.copysign(ratio)
        } else {
            ratio
        }
    });
    (r, clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BiDcdfmParams, BiDfmParams, MixingMatrix};

    fn same_partition(a: &Membership, b: &Membership) -> bool {
        let mut map = vec![usize::MAX; a.k()];
        a.labels().iter().zip(b.labels()).all(|(&x, &y)| {
            if map[x] == usize::MAX {
                map[x] = y;
            }
            map[x] == y
        }) && {
            let mut back = vec![usize::MAX; b.k()];
            b.labels().iter().zip(a.labels()).all(|(&x, &y)| {
                if back[x] == usize::MAX {
                    back[x] = y;
                }
                back[x] == y
            })
        }
    }

    fn cyclic(n: usize, k: usize) -> Membership {
        Membership::new((0..n).map(|i| i % k).collect(), k).unwrap()
    }

    #[test]
    fn population_recovery_plain() {
        let params = BiDfmParams {
            row: cyclic(60, 2),
            col: cyclic(90, 3),
            p: MixingMatrix::p1(),
            rho: 0.5,
        };
        let omega = params.expected_adjacency().unwrap();
        for r in [bisc(&omega, 2, 3, 1).unwrap(), nbisc(&omega, 2, 3, 1).unwrap()] {
            assert!(same_partition(&r.row_labels, &params.row));
            assert!(same_partition(&r.col_labels, &params.col));
        }
    }

    #[test]
    fn population_recovery_degree_corrected() {
        let n_r = 60;
        let n_c = 90;
        let params = BiDcdfmParams {
            row: cyclic(n_r, 2),
            col: cyclic(n_c, 3),
            p: MixingMatrix::p1(),
            theta_r: (0..n_r).map(|i| 0.1 + 0.9 * ((i * 37 % 61) as f64) / 61.0).collect(),
            theta_c: (0..n_c).map(|j| 0.1 + 0.9 * ((j * 53 % 89) as f64) / 89.0).collect(),
        };
        let omega = params.expected_adjacency().unwrap();
        let r = nbisc(&omega, 2, 3, 4).unwrap();
        assert!(same_partition(&r.row_labels, &params.row));
        assert!(same_partition(&r.col_labels, &params.col));
        let d = dscore(&omega, 2, 3, Threshold::Auto, 4).unwrap();
        assert!(same_partition(&d.row_labels, &params.row));
        assert!(same_partition(&d.col_labels, &params.col));
    }

    #[test]
    fn single_cluster() {
        let a = Matrix::filled(5, 7, 1.0);
        let r = bisc(&a, 1, 1, 0).unwrap();
        assert!(r.row_labels.labels().iter().all(|&l| l == 0));
        assert!(r.col_labels.labels().iter().all(|&l| l == 0));
        let r = disim(&Matrix::filled(4, 4, 1.0), 1, 1, Regularizer::Auto, 0).unwrap();
        assert_eq!(r.row_labels.k(), 1);
    }

    #[test]
    fn transposes_when_more_row_clusters() {
        let params = BiDfmParams {
            row: cyclic(30, 2),
            col: cyclic(45, 3),
            p: MixingMatrix::p2(),
            rho: 1.0,
        };
        let omega = params.expected_adjacency().unwrap();
        let a = bisc(&omega, 2, 3, 9).unwrap();
        let b = bisc(&omega.transpose(), 3, 2, 9).unwrap();
        assert!(b.diagnostics.transposed);
        assert_eq!(a.row_labels, b.col_labels);
        assert_eq!(a.col_labels, b.row_labels);
    }

    #[test]
    fn laplacian_baselines_guard_negative_input() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        assert!(matches!(
            disim(&a, 1, 1, Regularizer::Auto, 0),
            Err(Error::Precondition(_))
        ));
        let r = detect(Algorithm::Disim, &a, 1, 1, &DetectOptions::default()).unwrap();
        assert!((r.diagnostics.shift - 1.02).abs() < 1e-15);
        assert!(matches!(
            rdscore(&Matrix::filled(4, 4, 1.0), 1, 1, Regularizer::Auto, Threshold::Auto, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn balanced_ratios_are_not_clipped() {
        let u = Matrix::from_rows(&[vec![0.5, 0.5], vec![0.5, -0.5], vec![0.5, 0.5], vec![0.5, -0.5]])
            .unwrap();
        let (r, clipped) = ratio_matrix(&u, Threshold::Auto);
        assert_eq!(clipped, 0);
        assert_eq!(r.as_slice(), &[1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn shift_formula() {
        let (s, shift) = shift_nonnegative(&Matrix::from_rows(&[vec![-1.0, 1.0]]).unwrap());
        assert!((shift - 1.02).abs() < 1e-15);
        assert!((s.min_value() - 0.02).abs() < 1e-15);
        let (_, shift) = shift_nonnegative(&Matrix::filled(2, 2, -3.0));
        assert!((shift - 3.01).abs() < 1e-15);
        let a = Matrix::filled(2, 2, 0.5);
        assert_eq!(shift_nonnegative(&a), (a, 0.0));
    }

    #[test]
    fn algorithm_names_parse() {
        for alg in Algorithm::ALL {
            assert_eq!(alg.name().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("spectral".parse::<Algorithm>().is_err());
    }
}
