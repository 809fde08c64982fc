mod common;

use bidfm::linalg::{dense_svd, kmeans, truncated_svd, Matrix, DEFAULT_SVD_TOL};
use bidfm::metrics::{ari, criterion_f, misassigned, nmi};
use bidfm::model::{BiDcdfmParams, MixingMatrix, ModelParams};
use bidfm::theory::population_svd_oracle;
use common::*;
use rand::Rng;

#[test]
fn truncated_svd_matches_nalgebra() {
    let mut r = rng(1);
    for case in 0..40 {
        let (m, n) = (r.random_range(2..=50), r.random_range(2..=50));
        let k = r.random_range(1..=m.min(n).min(8));
        let a = random_matrix(m, n, &mut r);
        let svd = truncated_svd(&a, k, DEFAULT_SVD_TOL).unwrap();
        let want = oracle_singular_values(&a);
        for i in 0..k {
            assert!(
                (svd.singular_values[i] - want[i]).abs() < 1e-8,
                "case {case}: σ_{i} {} vs {}",
                svd.singular_values[i],
                want[i]
            );
            let av = a.mul_vec(&svd.right.column(i));
            let u = svd.left.column(i);
            let resid: f64 = av
                .iter()
                .zip(&u)
                .map(|(x, y)| (x - svd.singular_values[i] * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid < 1e-8, "case {case}: residual {resid}");
        }
    }
}

#[test]
fn dense_svd_matches_nalgebra() {
    let mut r = rng(2);
    for _ in 0..20 {
        let a = random_matrix(r.random_range(1..=12), r.random_range(1..=12), &mut r);
        let got = dense_svd(&a).singular_values;
        let want = oracle_singular_values(&a);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10);
        }
    }
}

#[test]
fn expected_adjacency_matches_triple_loop() {
    let mut r = rng(3);
    for case in 0..60 {
        let (n_r, n_c) = (r.random_range(3..=20), r.random_range(3..=30));
        let p = if case % 2 == 0 { MixingMatrix::p1() } else { MixingMatrix::p2() };
        let params = random_instance(n_r, n_c, p, case % 4 >= 2, &mut r);
        let got = params.expected_adjacency().unwrap();
        let want = omega_by_loops(&params);
        assert!(got.max_abs_diff(&want).unwrap() < 1e-12);
    }
}

#[test]
fn population_rank_is_min_k() {
    let mut r = rng(4);
    for case in 0..30 {
        let p = if case % 2 == 0 { MixingMatrix::p1() } else { MixingMatrix::p2() };
        let params = random_instance(r.random_range(5..40), r.random_range(5..40), p, case % 3 == 0, &mut r);
        let s = oracle_singular_values(&params.expected_adjacency().unwrap());
        assert!(s[2] < 1e-9 * s[0], "σ_3/σ_1 = {}", s[2] / s[0]);
        assert!(s[1] > 1e-6 * s[0]);
    }
}

#[test]
fn constant_theta_reproduces_plain_model() {
    let mut r = rng(5);
    for _ in 0..20 {
        let params = random_instance(15, 25, MixingMatrix::p2(), false, &mut r);
        let ModelParams::Plain(plain) = &params else { unreachable!() };
        let dc = ModelParams::DegreeCorrected(plain.to_degree_corrected());
        let a = params.expected_adjacency().unwrap();
        let b = dc.expected_adjacency().unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            assert!((x - y).abs() <= 1e-14 * x.abs().max(1e-300));
        }
    }
}

#[test]
fn metrics_match_brute_force() {
    let mut r = rng(6);
    for _ in 0..300 {
        let n = r.random_range(2..=12);
        let k = r.random_range(1..=5);
        let est = any_labels(n, k, &mut r);
        let truth = any_labels(n, k, &mut r);
        assert_eq!(misassigned(&est, &truth).unwrap(), brute_misassigned(&est, &truth));
        let (a, b) = (nmi(&est, &truth).unwrap(), brute_nmi(&est, &truth));
        assert!((a - b).abs() < 1e-12, "nmi {a} vs {b}: {:?} {:?}", est.labels(), truth.labels());
        let (a, b) = (ari(&est, &truth).unwrap(), brute_ari(&est, &truth));
        assert!((a - b).abs() < 1e-12, "ari {a} vs {b}: {:?} {:?}", est.labels(), truth.labels());
        let f = criterion_f(&est, &truth).unwrap();
        let g = brute_criterion_f(&est, &truth);
        assert!(f == g || (f - g).abs() < 1e-12, "{f} vs {g}");
    }
}

#[test]
fn kmeans_reaches_exhaustive_two_partition_optimum() {
    let mut r = rng(7);
    for case in 0..25 {
        let n = r.random_range(3..=10);
        let x = Matrix::from_fn(n, 2, |i, _| {
            let blob = if i % 2 == 0 { 0.0 } else { r.random_range(0.0..3.0) };
            blob + r.random_range(-1.0..1.0)
        });
        let best = exhaustive_two_means(&x);
        let got = kmeans(&x, 2, case, 20, 300).unwrap();
        assert!(got.objective <= best * (1.0 + 1e-9) + 1e-12, "case {case}: {} vs {best}", got.objective);
    }
}

#[test]
fn analytic_population_svd_matches_nalgebra() {
    let mut r = rng(8);
    for _ in 0..15 {
        let ModelParams::DegreeCorrected(params) =
            random_instance(r.random_range(5..60), r.random_range(5..60), MixingMatrix::p1(), true, &mut r)
        else {
            unreachable!()
        };
        let params: BiDcdfmParams = params;
        let svd = population_svd_oracle(&params).unwrap();
        let want = oracle_singular_values(&params.expected_adjacency().unwrap());
        for (g, w) in svd.singular_values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-8 * w.max(1.0));
        }
    }
}
