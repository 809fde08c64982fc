//! Singular value decompositions.
//!
//! Two routes live here. [`dense_svd`] is a one-sided Jacobi SVD used for
//! small matrices (the projected problems inside the Lanczos solver, mixing
//! matrices, and so on). [`truncated_svd`] computes the leading `k` singular
//! triplets of a large dense matrix with Golub-Kahan-Lanczos
//! bidiagonalization, full reorthogonalization and thick restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::{axpy, dot, norm, Matrix};
use crate::error::{Error, Result};

/// Default residual tolerance of [`truncated_svd`], relative to the largest singular value.
pub const DEFAULT_SVD_TOL: f64 = 1e-10;

/// Fixed seed for Lanczos start vectors, so decompositions are reproducible.
const START_VECTOR_SEED: u64 = 0x6b5f_2d31_a7c4_0e19;

/// The `k` leading singular triplets of a matrix.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    /// `n × k`, orthonormal columns.
    pub left: Matrix,
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// `m × k`, orthonormal columns.
    pub right: Matrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `left · diag(s) · rightᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let (n, k) = self.left.shape();
        let m = self.right.rows();
        Matrix::from_fn(n, m, |i, j| {
            (0..k)
                .map(|l| self.left[(i, l)] * self.singular_values[l] * self.right[(j, l)])
                .sum()
        })
    }

    /// Swaps the roles of left and right factors (the SVD of the transpose).
    pub fn transposed(self) -> SvdFactors {
        SvdFactors {
            left: self.right,
            singular_values: self.singular_values,
            right: self.left,
        }
    }

    /// Flips column signs so the largest-magnitude entry of each left vector is positive.
    pub fn canonicalize_signs(&mut self) {
        for l in 0..self.singular_values.len() {
            let mut best = 0.0_f64;
            let mut sign = 1.0;
            for i in 0..self.left.rows() {
                let v = self.left[(i, l)];
                if v.abs() > best {
                    best = v.abs();
                    sign = v.signum();
                }
            }
            if sign < 0.0 {
                for i in 0..self.left.rows() {
                    self.left[(i, l)] = -self.left[(i, l)];
                }
                for j in 0..self.right.rows() {
                    self.right[(j, l)] = -self.right[(j, l)];
                }
            }
        }
    }
}

/// Tuning knobs of the Lanczos solver.
#[derive(Clone, Copy, Debug)]
pub struct SvdOptions {
    /// A triplet is accepted when `‖Aᵀu − σv‖ ≤ tol · σ₁`.
    pub tol: f64,
    /// Cap on Lanczos steps; `None` means `1000 · k`.
    pub max_iter: Option<usize>,
}

impl Default for SvdOptions {
    fn default() -> Self {
        SvdOptions {
            tol: DEFAULT_SVD_TOL,
            max_iter: None,
        }
    }
}

/// Leading `k` singular triplets of `m`, signs canonicalized.
pub fn truncated_svd(m: &Matrix, k: usize, tol: f64) -> Result<SvdFactors> {
    truncated_svd_with(
        m,
        k,
        &SvdOptions {
            tol,
            ..SvdOptions::default()
        },
    )
}

pub fn truncated_svd_with(m: &Matrix, k: usize, opts: &SvdOptions) -> Result<SvdFactors> {
    let (rows, cols) = m.shape();
    let min_dim = rows.min(cols);
    if k == 0 || k > min_dim {
        return Err(Error::Dimension(format!(
            "truncated SVD rank {k} outside 1..={min_dim} for a {rows}x{cols} matrix"
        )));
    }
    if !m.is_finite() {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Precondition("SVD tolerance must be positive".into()));
    }
    let max_iter = opts.max_iter.unwrap_or(1000 * k).max(1);

    // Work on the orientation with cols <= rows so a full right basis spans R^cols.
    let mut factors = if cols <= rows {
        lanczos_svd(m, k, opts.tol, max_iter)?
    } else {
        lanczos_svd(&m.transpose(), k, opts.tol, max_iter)?.transposed()
    };
    factors.canonicalize_signs();
    Ok(factors)
}

/// Thick-restart Golub-Kahan-Lanczos. Requires `a.cols() <= a.rows()`.
fn lanczos_svd(a: &Matrix, k: usize, tol: f64, max_iter: usize) -> Result<SvdFactors> {
    let p = a.cols();
    let n = a.rows();
    let basis_cap = p.min((2 * k + 30).max(40));
    let keep = (k + (basis_cap - k) / 2).min(basis_cap.saturating_sub(1)).max(k.min(basis_cap));

    let anorm = a.frobenius_norm();
    let breakdown = 1e-14 * anorm.max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(START_VECTOR_SEED);

    let mut left: Vec<Vec<f64>> = Vec::with_capacity(basis_cap);
    let mut right: Vec<Vec<f64>> = Vec::with_capacity(basis_cap + 1);
    // b[i][j] = left_iᵀ A right_j, upper triangular apart from the restart spike.
    let mut b = vec![vec![0.0; basis_cap]; basis_cap];

    let start = random_orthonormal_to(&right, p, &mut rng);
    right.push(start);

    let mut steps = 0usize;
    loop {
        let mut residual = vec![0.0; p];
        let mut beta = 0.0;
        while left.len() < basis_cap {
            let j = left.len();
            let mut w = a.mul_vec(&right[j]);
            for _ in 0..2 {
                for (i, u) in left.iter().enumerate() {
                    let c = dot(u, &w);
                    b[i][j] += c;
                    axpy(-c, u, &mut w);
                }
            }
            let alpha = norm(&w);
            b[j][j] = alpha;
            let u = if alpha > breakdown {
                w.iter().map(|x| x / alpha).collect()
            } else {
                random_orthonormal_to(&left, n, &mut rng)
            };
            left.push(u);
            steps += 1;

            let mut r = a.tr_mul_vec(&left[j]);
            for _ in 0..2 {
                for v in &right {
                    let c = dot(v, &r);
                    axpy(-c, v, &mut r);
                }
            }
            beta = norm(&r);
            residual = r;
            if left.len() < basis_cap {
                let v = if beta > breakdown && right.len() < p {
                    residual.iter().map(|x| x / beta).collect()
                } else {
                    random_orthonormal_to(&right, p, &mut rng)
                };
                right.push(v);
            }
        }

        let m = left.len();
        let projected = Matrix::from_fn(m, m, |i, j| b[i][j]);
        let small = dense_svd(&projected);
        let sigma_max = small.singular_values[0];
        let worst = (0..k)
            .map(|i| beta * small.left[(m - 1, i)].abs())
            .fold(0.0_f64, f64::max);

        let full_basis = m == p;
        if worst <= tol * sigma_max || full_basis {
            let left_vecs = combine(&left, &small.left, k);
            let right_vecs = combine(&right[..m], &small.right, k);
            return Ok(SvdFactors {
                left: columns_to_matrix(&left_vecs, n),
                singular_values: small.singular_values[..k].to_vec(),
                right: columns_to_matrix(&right_vecs, p),
            });
        }
        if steps >= max_iter {
            return Err(Error::Convergence {
                iterations: steps,
                residual: worst / sigma_max.max(f64::MIN_POSITIVE),
            });
        }

        // Thick restart: keep the best `keep` Ritz pairs and continue from the residual.
        // The coupling column b[i][keep] is rebuilt by the reorthogonalization sweep.
        let new_left = combine(&left, &small.left, keep);
        let new_right = combine(&right[..m], &small.right, keep);
        left = new_left;
        right = new_right;
        for row in b.iter_mut() {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        for i in 0..keep {
            b[i][i] = small.singular_values[i];
        }
        let next = if beta > breakdown {
            residual.iter().map(|x| x / beta).collect()
        } else {
            random_orthonormal_to(&right, p, &mut rng)
        };
        right.push(next);
    }
}

/// Columns `basis · coeffs[:, 0..count]`.
fn combine(basis: &[Vec<f64>], coeffs: &Matrix, count: usize) -> Vec<Vec<f64>> {
    let dim = basis.first().map_or(0, Vec::len);
    (0..count)
        .map(|c| {
            let mut out = vec![0.0; dim];
            for (i, v) in basis.iter().enumerate() {
                let w = coeffs[(i, c)];
                if w != 0.0 {
                    axpy(w, v, &mut out);
                }
            }
            out
        })
        .collect()
}

fn columns_to_matrix(cols: &[Vec<f64>], rows: usize) -> Matrix {
    Matrix::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

fn random_orthonormal_to(basis: &[Vec<f64>], dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    for _ in 0..16 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return v;
        }
    }
    // Basis already spans the space; any unit vector keeps the recurrence finite.
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

/// Full thin SVD by one-sided Jacobi rotations: `k = min(rows, cols)` triplets,
/// sorted descending, signs canonicalized. Intended for small matrices.
pub fn dense_svd(m: &Matrix) -> SvdFactors {
    let (rows, cols) = m.shape();
    let mut f = if cols <= rows {
        jacobi(m)
    } else {
        jacobi(&m.transpose()).transposed()
    };
    f.canonicalize_signs();
    f
}

/// One-sided Jacobi on a tall matrix (`cols <= rows`).
fn jacobi(m: &Matrix) -> SvdFactors {
    let (rows, cols) = m.shape();
    let mut w: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(f64, usize)> = w.iter().map(|c| norm(c)).zip(0..).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let sigma_max = order.first().map_or(0.0, |o| o.0);
    let cutoff = sigma_max * 1e-300_f64.max(f64::EPSILON * rows as f64 * 1e-3);
    let mut left: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut pending = Vec::new();
    for (pos, &(s, j)) in order.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            left.push(w[j].iter().map(|x| x / s).collect());
        } else {
            left.push(Vec::new());
            pending.push(pos);
        }
    }
    // Null directions: complete to an orthonormal set.
    for pos in pending {
        let basis: Vec<Vec<f64>> = left.iter().filter(|c| !c.is_empty()).cloned().collect();
        let mut filled = None;
        for e in 0..rows {
            let mut cand = vec![0.0; rows];
            cand[e] = 1.0;
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &cand);
                    axpy(-c, q, &mut cand);
                }
            }
            let nc = norm(&cand);
            if nc > 1e-6 {
                cand.iter_mut().for_each(|x| *x /= nc);
                filled = Some(cand);
                break;
            }
        }
        left[pos] = filled.unwrap_or_else(|| vec![0.0; rows]);
    }

    let singular_values: Vec<f64> = order.iter().map(|o| o.0).collect();
    let right: Vec<Vec<f64>> = order.iter().map(|&(_, j)| v[j].clone()).collect();
    SvdFactors {
        left: columns_to_matrix(&left, rows),
        singular_values,
        right: columns_to_matrix(&right, cols),
    }
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q);
    let cp = &mut head[p];
    let cq = &mut tail[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Spectral norm `‖a − b‖`.
pub fn spectral_deviation(a: &Matrix, b: &Matrix) -> Result<f64> {
    let diff = a.sub(b)?;
    spectral_norm(&diff)
}

pub fn spectral_norm(m: &Matrix) -> Result<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0.0);
    }
    Ok(truncated_svd(m, 1, DEFAULT_SVD_TOL)?.singular_values[0])
}
