mod common;

use bidfm::detect::{bisc, nbisc, Algorithm};
use bidfm::experiments::{filter_zero_degree, preset, run_simulation, FilterMode};
use bidfm::interface::{matrix_from_str, matrix_to_string, read_edge_list, write_edge_list, EdgeListOptions};
use bidfm::linalg::{kmeans, row_normalize, truncated_svd, Matrix, DEFAULT_SVD_TOL};
use bidfm::metrics::{ari, hamming_error, nmi};
use bidfm::model::{BiDcdfmParams, BiDfmParams, MixingMatrix, ModelParams};
use bidfm::sampling::{sample_adjacency, DistributionSpec};
use bidfm::theory::{
    check_assumption1, check_assumption2, deviation_bound_bidcdfm, deviation_bound_bidfm,
    error_envelope_bidcdfm, error_envelope_bidfm, gamma_tau, population_svd_oracle, TheoryInputs,
};
use common::*;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    let seed = std::env::var("BIDFM_PROPTEST_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0x5eed);
    ProptestConfig {
        cases,
        rng_seed: proptest::test_runner::RngSeed::Fixed(seed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols).prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

fn sized_matrix(max: usize) -> impl Strategy<Value = Matrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| matrix(r, c))
}

fn instance(degree: bool) -> impl Strategy<Value = ModelParams> {
    (any::<u64>(), 6usize..60, 6usize..60, any::<bool>()).prop_map(move |(seed, n_r, n_c, signed)| {
        let p = if signed { MixingMatrix::p2() } else { MixingMatrix::p1() };
        random_instance(n_r, n_c, p, degree, &mut rng(seed))
    })
}

fn perm_of(k: usize, seed: u64) -> Vec<usize> {
    let all = permutations(k);
    all[(seed % all.len() as u64) as usize].clone()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn kmeans_is_rotation_invariant(seed in any::<u64>(), n in 6usize..40, d in 1usize..5) {
        let mut r = rng(seed);
        let x = random_matrix(n, d, &mut r);
        let o = random_orthogonal(d, &mut r);
        let xo = x.matmul(&o).unwrap();
        let a = kmeans(&x, 3.min(n), seed, 4, 100).unwrap();
        let b = kmeans(&xo, 3.min(n), seed, 4, 100).unwrap();
        prop_assert_eq!(a.labels, b.labels);
    }

    #[test]
    fn truncated_svd_agrees_with_dense_oracle(m in sized_matrix(50), k in 1usize..6) {
        let k = k.min(m.rows().min(m.cols()));
        let got = truncated_svd(&m, k, DEFAULT_SVD_TOL).unwrap();
        let want = oracle_singular_values(&m);
        for i in 0..k {
            prop_assert!((got.singular_values[i] - want[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn kmeans_objective_never_increases(m in sized_matrix(30), k in 1usize..5, seed in any::<u64>()) {
        let k = k.min(m.rows());
        let res = kmeans(&m, k, seed, 3, 300).unwrap();
        for w in res.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn row_normalize_is_idempotent(m in sized_matrix(20)) {
        let once = row_normalize(&m, 1e-12);
        let twice = row_normalize(&once.matrix, 1e-12);
        for i in 0..m.rows() {
            if once.degenerate.contains(&i) {
                continue;
            }
            for (a, b) in once.matrix.row(i).iter().zip(twice.matrix.row(i)) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn population_recovery_plain(params in instance(false)) {
        let omega = params.expected_adjacency().unwrap();
        for res in [bisc(&omega, 2, 3, 1).unwrap(), nbisc(&omega, 2, 3, 1).unwrap()] {
            prop_assert_eq!(hamming_error(&res.row_labels, params.row()).unwrap(), 0.0);
            prop_assert_eq!(hamming_error(&res.col_labels, params.col()).unwrap(), 0.0);
        }
    }

    #[test]
    fn population_recovery_degree_corrected(params in instance(true)) {
        let omega = params.expected_adjacency().unwrap();
        let res = nbisc(&omega, 2, 3, 1).unwrap();
        prop_assert_eq!(hamming_error(&res.row_labels, params.row()).unwrap(), 0.0);
        prop_assert_eq!(hamming_error(&res.col_labels, params.col()).unwrap(), 0.0);
    }

    #[test]
    fn cluster_order_does_not_matter(seed in any::<u64>()) {
        let params = random_instance(40, 60, MixingMatrix::p1(), false, &mut rng(seed));
        let ModelParams::Plain(p) = &params else { unreachable!() };
        let (pr, pc) = (perm_of(2, seed), perm_of(3, seed >> 8));
        // Permute cluster order in Z and the matching rows/columns of P.
        let mut q = Matrix::zeros(2, 3);
        for k in 0..2 {
            for l in 0..3 {
                q.row_mut(pr[k])[pc[l]] = p.p.get(k, l);
            }
        }
        let permuted = BiDfmParams {
            row: p.row.relabel(&pr).unwrap(),
            col: p.col.relabel(&pc).unwrap(),
            p: MixingMatrix::new(q),
            rho: p.rho,
        };
        let a = sample_adjacency(&params.expected_adjacency().unwrap(), &DistributionSpec::bernoulli(), seed).unwrap();
        let b = sample_adjacency(&permuted.expected_adjacency().unwrap(), &DistributionSpec::bernoulli(), seed).unwrap();
        prop_assert_eq!(&a, &b);
        let ra = bisc(&a, 2, 3, 0).unwrap();
        let rb = bisc(&b, 2, 3, 0).unwrap();
        prop_assert_eq!(
            hamming_error(&ra.row_labels, params.row()).unwrap(),
            hamming_error(&rb.row_labels, &permuted.row).unwrap()
        );
        prop_assert_eq!(
            hamming_error(&ra.col_labels, params.col()).unwrap(),
            hamming_error(&rb.col_labels, &permuted.col).unwrap()
        );
    }

    #[test]
    fn transposing_swaps_sides(seed in any::<u64>()) {
        let params = random_instance(30, 45, MixingMatrix::p1(), false, &mut rng(seed));
        let a = sample_adjacency(&params.expected_adjacency().unwrap(), &DistributionSpec::bernoulli(), seed).unwrap();
        let fwd = bisc(&a, 2, 3, 5).unwrap();
        let back = bisc(&a.transpose(), 3, 2, 5).unwrap();
        prop_assert_eq!(&fwd.row_labels, &back.col_labels);
        prop_assert_eq!(&fwd.col_labels, &back.row_labels);
        // Equal K: same partitions up to relabeling.
        let sq = bisc(&a, 2, 2, 5).unwrap();
        let sq_t = bisc(&a.transpose(), 2, 2, 5).unwrap();
        prop_assert_eq!(hamming_error(&sq.row_labels, &sq_t.col_labels).unwrap(), 0.0);
        prop_assert_eq!(hamming_error(&sq.col_labels, &sq_t.row_labels).unwrap(), 0.0);
    }

    #[test]
    fn nbisc_ignores_population_scale(params in instance(true), c in 0.01f64..100.0) {
        let omega = params.expected_adjacency().unwrap();
        let a = nbisc(&omega, 2, 3, 2).unwrap();
        let b = nbisc(&omega.scale(c), 2, 3, 2).unwrap();
        prop_assert_eq!(a.row_labels, b.row_labels);
        prop_assert_eq!(a.col_labels, b.col_labels);
    }

    #[test]
    fn metrics_ignore_label_names(seed in any::<u64>(), n in 2usize..30, k in 1usize..6) {
        let mut r = rng(seed);
        let est = any_labels(n, k, &mut r);
        let truth = any_labels(n, k, &mut r);
        let p = perm_of(k, seed);
        let q = perm_of(k, seed / 7);
        let (e2, t2) = (est.relabel(&p).unwrap(), truth.relabel(&q).unwrap());
        prop_assert_eq!(hamming_error(&est, &truth).unwrap(), hamming_error(&e2, &t2).unwrap());
        prop_assert!((nmi(&est, &truth).unwrap() - nmi(&e2, &t2).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&est, &truth).unwrap() - ari(&e2, &t2).unwrap()).abs() < 1e-12);
        prop_assert!((nmi(&est, &truth).unwrap() - nmi(&truth, &est).unwrap()).abs() < 1e-12);
        prop_assert!((ari(&est, &truth).unwrap() - ari(&truth, &est).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn perfect_scores_coincide(seed in any::<u64>(), n in 4usize..30, k in 2usize..4) {
        let mut r = rng(seed);
        let truth = covering_labels(n, k, &mut r);
        let est = if seed % 2 == 0 { truth.relabel(&perm_of(k, seed)).unwrap() } else { covering_labels(n, k, &mut r) };
        let h = hamming_error(&est, &truth).unwrap() == 0.0;
        let m = (nmi(&est, &truth).unwrap() - 1.0).abs() < 1e-12;
        let a = (ari(&est, &truth).unwrap() - 1.0).abs() < 1e-12;
        prop_assert_eq!(h, m);
        prop_assert_eq!(h, a);
    }

    #[test]
    fn constant_theta_reduces_theory(params in instance(false)) {
        let ModelParams::Plain(p) = &params else { unreachable!() };
        let dc = ModelParams::DegreeCorrected(p.to_degree_corrected());
        let dist = DistributionSpec::normal(0.7);
        let g1 = gamma_tau(&dist, &params).unwrap();
        let g2 = gamma_tau(&dist, &dc).unwrap();
        prop_assert!((g1.gamma - g2.gamma).abs() <= 1e-12 * g1.gamma);
        let i1 = TheoryInputs::from_params(&params, g1.gamma, 1.0).unwrap();
        let i2 = TheoryInputs::from_params(&dc, g2.gamma, 1.0).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        prop_assert!(close(deviation_bound_bidfm(&i1, 1.0), deviation_bound_bidcdfm(&i2, 1.0).unwrap()));
        prop_assert!(close(
            check_assumption1(&i1).ratio.unwrap(),
            check_assumption2(&i2).unwrap().ratio.unwrap()
        ));
        let e1 = error_envelope_bidfm(&i1, 1.0).unwrap();
        let e2 = error_envelope_bidcdfm(&i2, 1.0).unwrap();
        prop_assert!(close(e1.f_r, e2.f_r), "{} vs {}", e1.f_r, e2.f_r);
    }

    #[test]
    fn population_svd_oracle_agrees(params in instance(true)) {
        let ModelParams::DegreeCorrected(p) = &params else { unreachable!() };
        let p: &BiDcdfmParams = p;
        let oracle = population_svd_oracle(p).unwrap();
        let svd = truncated_svd(&p.expected_adjacency().unwrap(), 2, DEFAULT_SVD_TOL).unwrap();
        for (a, b) in oracle.singular_values.iter().zip(&svd.singular_values) {
            prop_assert!((a - b).abs() < 1e-8 * a.max(1.0));
        }
    }

    #[test]
    fn filtering_keeps_entries(seed in any::<u64>(), n in 2usize..25) {
        let mut r = rng(seed);
        let mut a = random_matrix(n, n, &mut r);
        for i in 0..n {
            if (seed >> (i % 64)) & 1 == 1 {
                a.row_mut(i).fill(0.0);
            }
        }
        for mode in FilterMode::ALL {
            let Ok(f) = filter_zero_degree(&a, mode) else { continue };
            for (ii, &i) in f.kept_rows.iter().enumerate() {
                for (jj, &j) in f.kept_cols.iter().enumerate() {
                    prop_assert_eq!(f.matrix.row(ii)[jj].to_bits(), a.row(i)[j].to_bits());
                }
            }
            prop_assert_eq!(f.kept_rows.len() + f.removed_rows.len(), n);
        }
    }

    #[test]
    fn matrix_text_is_bit_exact(m in sized_matrix(12)) {
        let back = matrix_from_str(&matrix_to_string(&m)).unwrap();
        for (a, b) in m.as_slice().iter().zip(back.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn edge_list_round_trip(seed in any::<u64>(), rows in 1usize..15, cols in 1usize..15) {
        let mut r = rng(seed);
        let m = Matrix::from_fn(rows, cols, |_, _| if rand::Rng::random_bool(&mut r, 0.3) { rand::Rng::random_range(&mut r, -3.0..3.0) } else { 0.0 });
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tsv");
        write_edge_list(&path, &m).unwrap();
        match read_edge_list(&path, &EdgeListOptions::default()) {
            Ok(read) => prop_assert_eq!(read.matrix, m),
            Err(_) => prop_assert!(m.as_slice().iter().all(|&v| v == 0.0)),
        }
    }
}

fn grid_inputs() -> TheoryInputs {
    TheoryInputs {
        n_r: 400,
        n_c: 600,
        k_r: 2,
        k_c: 3,
        sigma_kr_p: 0.7,
        rho: 0.4,
        gamma: 1.3,
        tau: 1.0,
        n_r_min: 150,
        n_r_max: 250,
        n_c_min: 150,
        n_c_max: 250,
        delta_c: Some(0.09),
        degree: None,
    }
}

#[test]
fn envelopes_move_the_right_way() {
    let base = grid_inputs();
    let f = |i: &TheoryInputs| error_envelope_bidfm(i, 1.0).unwrap();
    let b = f(&base);
    type Tweak = fn(&mut TheoryInputs);
    let decreasing: [(&str, Tweak); 4] = [
        ("rho", |i| i.rho *= 1.1),
        ("n_r_min", |i| i.n_r_min += 10),
        ("n_c_min", |i| i.n_c_min += 10),
        ("sigma", |i| i.sigma_kr_p *= 1.1),
    ];
    for (name, tweak) in decreasing {
        let mut i = base.clone();
        tweak(&mut i);
        let e = f(&i);
        assert!(e.f_r <= b.f_r && e.f_c <= b.f_c, "{name}");
        assert!(e.f_r < b.f_r || e.f_c < b.f_c, "{name}");
    }
    let mut i = base.clone();
    i.gamma *= 1.1;
    let e = f(&i);
    assert!(e.f_r > b.f_r && e.f_c > b.f_c);
}

#[test]
fn simulation_is_reproducible_and_schedule_free() {
    let mut c = preset("sim1a").unwrap();
    c.values = vec![0.3, 0.8];
    c.replicates = 4;
    c.algorithms = vec![Algorithm::Bisc, Algorithm::Dscore];
    let a = run_simulation(&c).unwrap();
    let b = run_simulation(&c).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    c.parallel = false;
    let s = run_simulation(&c).unwrap();
    assert_eq!(a.to_csv(), s.to_csv());
    assert_eq!(a.to_long_csv(), s.to_long_csv());
}

#[test]
fn population_mode_has_zero_error_everywhere() {
    for name in ["sim1b", "sim2a", "sim3c"] {
        let mut c = preset(name).unwrap();
        c.values.truncate(3);
        c.replicates = 1;
        c.population = true;
        c.algorithms = vec![Algorithm::Bisc, Algorithm::Nbisc];
        if c.model == bidfm::model::ModelKind::Bidcdfm {
            c.algorithms = vec![Algorithm::Nbisc];
        }
        let r = run_simulation(&c).unwrap();
        for p in &r.points {
            assert_eq!(p.error_rate.mean, 0.0, "{name} {} {}", p.algorithm, p.value);
        }
    }
}

#[test]
fn sampling_moments_per_law() {
    let omega = Matrix::from_rows(&[vec![0.1, 0.5, 0.9, 0.0], vec![0.3, 0.7, 1.0, 0.2], vec![0.05, 0.4, 0.6, 0.8]]).unwrap();
    let signed = omega.map(|x| 2.0 * x - 1.0);
    let reps = 100_000;
    let cases = [
        (DistributionSpec::bernoulli(), &omega),
        (DistributionSpec::poisson(), &omega),
        (DistributionSpec::normal(0.5), &signed),
        (DistributionSpec::signed(), &signed),
    ];
    for (dist, om) in cases {
        // Row i*4+j holds `reps` independent draws with mean Ω(i, j).
        let tiled = Matrix::from_fn(12, reps, |r, _| om.row(r / 4)[r % 4]);
        let a = sample_adjacency(&tiled, &dist, 17).unwrap();
        for r in 0..12 {
            let w = om.row(r / 4)[r % 4];
            let var = dist.variance(w);
            let xs = a.row(r);
            let mean = xs.iter().sum::<f64>() / reps as f64;
            assert!((mean - w).abs() <= 4.0 * (var / reps as f64).sqrt() + 1e-15, "{:?} mean {mean} vs {w}", dist.kind);
            if var > 0.0 {
                let v = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
                assert!((v - var).abs() <= 0.1 * var, "{:?} variance {v} vs {var}", dist.kind);
            }
        }
    }
}
