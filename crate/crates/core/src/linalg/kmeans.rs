//! Seeded k-means (k-means++ initialization, Lloyd iterations, best of several restarts).

use rand::Rng;
use rayon::prelude::*;

use super::matrix::{squared_distance, Matrix};
use crate::error::{Error, Result};
use crate::membership::Membership;
use crate::rng::{stream, tags};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;

#[derive(Clone, Debug)]
pub struct KMeansResult {
    pub labels: Membership,
    /// `K × d`.
    pub centroids: Matrix,
    /// Sum of squared distances of points to their centroid.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each Lloyd update of the winning restart.
    pub objective_trace: Vec<f64>,
}

/// Best of `restarts` seeded k-means++/Lloyd runs on the rows of `x`.
///
/// Restarts run in parallel; each draws from its own stream derived from
/// `(seed, restart)`, and the lowest objective wins with ties going to the
/// earliest restart, so the result does not depend on thread scheduling.
pub fn kmeans(
    x: &Matrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iter: usize,
) -> Result<KMeansResult> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::Dimension(format!(
            "k-means with K = {k} needs 1 <= K <= {n} points"
        )));
    }
    if restarts == 0 || max_iter == 0 {
        return Err(Error::Precondition("restarts and max_iter must be positive".into()));
    }
    let runs: Vec<KMeansResult> = (0..restarts)
        .into_par_iter()
        .map(|r| single_run(x, k, seed, r as u64, max_iter))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, cand| if cand.objective < best.objective { cand } else { best })
        .expect("restarts > 0");
    Ok(best)
}

fn single_run(x: &Matrix, k: usize, seed: u64, restart: u64, max_iter: usize) -> KMeansResult {
    let mut rng = stream(seed, tags::KMEANS_RESTART, restart);
    let mut centroids = plus_plus_init(x, k, &mut rng);
    let n = x.rows();
    let mut labels = vec![usize::MAX; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let changed = assign(x, &centroids, &mut labels);
        repair_empty(x, &mut centroids, &mut labels, k);
        if !changed && iterations > 1 {
            converged = true;
            trace.push(objective(x, &centroids, &labels));
            break;
        }
        centroids = update_centroids(x, &labels, k, &centroids);
        trace.push(objective(x, &centroids, &labels));
    }

    let objective = objective(x, &centroids, &labels);
    KMeansResult {
        labels: Membership::new(labels, k).expect("labels < k"),
        centroids,
        objective,
        iterations,
        converged,
        objective_trace: trace,
    }
}

fn plus_plus_init<R: Rng>(x: &Matrix, k: usize, rng: &mut R) -> Matrix {
    let n = x.rows();
    let d = x.cols();
    let mut centroids = Matrix::zeros(k, d);
    let first = rng.random_range(0..n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| squared_distance(x.row(i), centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 && total.is_finite() {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, dist) in nearest.iter_mut().enumerate() {
            let dn = squared_distance(x.row(i), centroids.row(c));
            if dn < *dist {
                *dist = dn;
            }
        }
    }
    centroids
}

/// Nearest-centroid assignment; ties go to the lowest centroid index.
fn assign(x: &Matrix, centroids: &Matrix, labels: &mut [usize]) -> bool {
    let mut changed = false;
    for (i, label) in labels.iter_mut().enumerate() {
        let point = x.row(i);
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for c in 0..centroids.rows() {
            let dist = squared_distance(point, centroids.row(c));
            if dist < best_d {
                best_d = dist;
                best = c;
            }
        }
        if *label != best {
            *label = best;
            changed = true;
        }
    }
    changed
}

/// Moves the point farthest from its centroid into each empty cluster.
fn repair_empty(x: &Matrix, centroids: &mut Matrix, labels: &mut [usize], k: usize) {
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        let mut far = None;
        let mut far_d = -1.0;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let dist = squared_distance(x.row(i), centroids.row(l));
            if dist > far_d {
                far_d = dist;
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        labels[i] = empty;
        centroids.row_mut(empty).copy_from_slice(x.row(i));
    }
}

fn update_centroids(x: &Matrix, labels: &[usize], k: usize, previous: &Matrix) -> Matrix {
    let d = x.cols();
    let mut sums = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] == 0 {
            sums.row_mut(c).copy_from_slice(previous.row(c));
        } else {
            let inv = counts[c] as f64;
            sums.row_mut(c).iter_mut().for_each(|v| *v /= inv);
        }
    }
    sums
}

fn objective(x: &Matrix, centroids: &Matrix, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_distance(x.row(i), centroids.row(l)))
        .sum()
}
