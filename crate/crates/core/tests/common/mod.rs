//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use bidfm::model::{BiDcdfmParams, BiDfmParams, MixingMatrix, ModelParams};
use bidfm::{Matrix, Membership};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Singular values from nalgebra, descending.
pub fn oracle_singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = to_na(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn random_matrix(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

/// Random orthogonal matrix from the QR factor of a Gaussian-ish matrix.
pub fn random_orthogonal(n: usize, r: &mut ChaCha8Rng) -> Matrix {
    let g = to_na(&random_matrix(n, n, r));
    from_na(&g.qr().q())
}

/// Labels with every cluster used at least once.
pub fn covering_labels(n: usize, k: usize, r: &mut ChaCha8Rng) -> Membership {
    assert!(n >= k);
    let mut labels: Vec<usize> = (0..k).collect();
    labels.extend((k..n).map(|_| r.random_range(0..k)));
    labels.shuffle(r);
    Membership::new(labels, k).unwrap()
}

pub fn any_labels(n: usize, k: usize, r: &mut ChaCha8Rng) -> Membership {
    Membership::new((0..n).map(|_| r.random_range(0..k)).collect(), k).unwrap()
}

/// Random valid instance with `K_r = 2`, `K_c = 3` and the given mixing matrix.
pub fn random_instance(n_r: usize, n_c: usize, p: MixingMatrix, degree: bool, r: &mut ChaCha8Rng) -> ModelParams {
    let row = covering_labels(n_r, p.k_r(), r);
    let col = covering_labels(n_c, p.k_c(), r);
    let rho: f64 = r.random_range(0.1..1.0);
    if degree {
        let theta = |n: usize, r: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n).map(|_| rho.sqrt() * r.random_range(0.05..1.0)).collect()
        };
        let theta_r = theta(n_r, r);
        let theta_c = theta(n_c, r);
        ModelParams::DegreeCorrected(BiDcdfmParams { row, col, p, theta_r, theta_c })
    } else {
        ModelParams::Plain(BiDfmParams { row, col, p, rho })
    }
}

/// `Ω(i, j) = Σ_k Σ_l s_r(i) Z_r(i, k) P(k, l) Z_c(j, l) s_c(j)` with explicit one-hot sums.
pub fn omega_by_loops(params: &ModelParams) -> Matrix {
    let zr = params.row().to_one_hot();
    let zc = params.col().to_one_hot();
    let p = params.mixing().values();
    let (sr, sc): (Vec<f64>, Vec<f64>) = match params {
        ModelParams::Plain(b) => (vec![b.rho; zr.rows()], vec![1.0; zc.rows()]),
        ModelParams::DegreeCorrected(d) => (d.theta_r.clone(), d.theta_c.clone()),
    };
    Matrix::from_fn(zr.rows(), zc.rows(), |i, j| {
        let mut acc = 0.0;
        for k in 0..zr.cols() {
            for l in 0..zc.cols() {
                acc += zr.row(i)[k] * p.row(k)[l] * zc.row(j)[l];
            }
        }
        sr[i] * acc * sc[j]
    })
}

/// All permutations of `0..k`, by recursive insertion.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `min_J ‖Ẑ J − Z‖₀ / 2` over permutation matrices, both partitions with the same `K`.
pub fn brute_misassigned(est: &Membership, truth: &Membership) -> u64 {
    let k = est.k().max(truth.k());
    let z_hat = est.with_k(k).unwrap().to_one_hot();
    let z = truth.with_k(k).unwrap().to_one_hot();
    permutations(k)
        .into_iter()
        .map(|perm| {
            let mut nonzero = 0u64;
            for i in 0..z.rows() {
                for l in 0..k {
                    // (Ẑ J)(i, l) = Σ_m Ẑ(i, m) J(m, l), J(m, perm[m]) = 1
                    let zj: f64 = (0..k).filter(|&m| perm[m] == l).map(|m| z_hat.row(i)[m]).sum();
                    if zj != z.row(i)[l] {
                        nonzero += 1;
                    }
                }
            }
            nonzero / 2
        })
        .min()
        .unwrap()
}

fn joint(est: &Membership, truth: &Membership) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = truth.len() as f64;
    let mut c = vec![vec![0u32; est.k()]; truth.k()];
    for (&t, &e) in truth.labels().iter().zip(est.labels()) {
        c[t][e] += 1;
    }
    let ct: Vec<u32> = c.iter().map(|r| r.iter().sum()).collect();
    let ce: Vec<u32> = (0..est.k()).map(|l| c.iter().map(|r| r[l]).sum()).collect();
    let prob = |v: &[u32]| -> Vec<f64> { v.iter().map(|&x| f64::from(x) / n).collect() };
    (c.iter().map(|r| prob(r)).collect(), prob(&ct), prob(&ce))
}

/// `2 I(T; E) / (H(T) + H(E))` from probabilities; 1 when both entropies vanish.
pub fn brute_nmi(est: &Membership, truth: &Membership) -> f64 {
    let (p, pt, pe) = joint(est, truth);
    let h = |v: &[f64]| -> f64 { v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum() };
    let mut mi = 0.0;
    for (k, row) in p.iter().enumerate() {
        for (l, &x) in row.iter().enumerate() {
            if x > 0.0 {
                mi += x * (x / (pt[k] * pe[l])).ln();
            }
        }
    }
    let den = h(&pt) + h(&pe);
    if den == 0.0 {
        1.0
    } else {
        2.0 * mi / den
    }
}

/// Adjusted Rand index from explicit pair enumeration.
pub fn brute_ari(est: &Membership, truth: &Membership) -> f64 {
    let (e, t) = (est.labels(), truth.labels());
    let n = t.len();
    let (mut both, mut only_t, mut only_e, mut total) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            let st = t[i] == t[j];
            let se = e[i] == e[j];
            total += 1.0;
            if st && se {
                both += 1.0;
            }
            if st {
                only_t += 1.0;
            }
            if se {
                only_e += 1.0;
            }
        }
    }
    let expected = only_t * only_e / total;
    let den = 0.5 * (only_t + only_e) - expected;
    if den == 0.0 {
        let same = (0..n).all(|i| (0..n).all(|j| (t[i] == t[j]) == (e[i] == e[j])));
        return if same { 1.0 } else { 0.0 };
    }
    (both - expected) / den
}

/// `min_π max_k (|C_k ∩ Ĉ^c_π(k)| + |C^c_k ∩ Ĉ_π(k)|) / |C_k|` by set counting.
pub fn brute_criterion_f(est: &Membership, truth: &Membership) -> f64 {
    let k = est.k().max(truth.k());
    let (e, t) = (est.labels(), truth.labels());
    permutations(k)
        .into_iter()
        .map(|perm| {
            (0..k)
                .map(|c| {
                    let size = t.iter().filter(|&&x| x == c).count();
                    let miss = (0..t.len())
                        .filter(|&i| (t[i] == c) != (e[i] == perm[c]))
                        .count();
                    match (miss, size) {
                        (0, _) => 0.0,
                        (_, 0) => f64::INFINITY,
                        (m, s) => m as f64 / s as f64,
                    }
                })
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest k-means objective over every 2-partition of the rows.
pub fn exhaustive_two_means(x: &Matrix) -> f64 {
    let n = x.rows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << (n - 1)) {
        let mut sse = 0.0;
        for side in [true, false] {
            let members: Vec<usize> = (0..n).filter(|&i| ((mask >> i) & 1 == 1) == side).collect();
            let mut centroid = vec![0.0; x.cols()];
            for &i in &members {
                for (c, v) in centroid.iter_mut().zip(x.row(i)) {
                    *c += v / members.len() as f64;
                }
            }
            for &i in &members {
                sse += x.row(i).iter().zip(&centroid).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
            }
        }
        best = best.min(sse);
    }
    best
}
