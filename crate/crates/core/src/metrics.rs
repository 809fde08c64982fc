//! Agreement between two partitions of the same node set.
//!
//! Every measure is computed from the confusion matrix and is invariant to
//! relabeling clusters on either side.

use crate::error::{Error, Result};
use crate::membership::Membership;

/// `counts[k][l]` = nodes in truth cluster `k` and estimated cluster `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
    pub n: u64,
}

impl ConfusionMatrix {
    pub fn new(estimated: &Membership, truth: &Membership) -> Result<Self> {
        if estimated.len() != truth.len() {
            return Err(Error::Dimension(format!(
                "partitions cover {} and {} nodes",
                estimated.len(),
                truth.len()
            )));
        }
        let mut counts = vec![vec![0u64; estimated.k()]; truth.k()];
        for (&e, &t) in estimated.labels().iter().zip(truth.labels()) {
            counts[t][e] += 1;
        }
        Ok(ConfusionMatrix {
            counts,
            n: truth.len() as u64,
        })
    }

    pub fn truth_sizes(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn estimate_sizes(&self) -> Vec<u64> {
        let cols = self.counts.first().map_or(0, Vec::len);
        (0..cols).map(|l| self.counts.iter().map(|r| r[l]).sum()).collect()
    }

    /// Square copy padded with empty clusters.
    fn padded(&self) -> Vec<Vec<u64>> {
        let k = self.counts.len().max(self.counts.first().map_or(0, Vec::len));
        let mut out = vec![vec![0u64; k]; k];
        for (i, row) in self.counts.iter().enumerate() {
            out[i][..row.len()].copy_from_slice(row);
        }
        out
    }

    /// True when the two partitions coincide up to relabeling.
    pub fn is_relabeling(&self) -> bool {
        let rows_ok = self.counts.iter().all(|r| r.iter().filter(|&&c| c > 0).count() <= 1);
        let cols = self.counts.first().map_or(0, Vec::len);
        let cols_ok = (0..cols).all(|l| self.counts.iter().filter(|r| r[l] > 0).count() <= 1);
        rows_ok && cols_ok
    }
}

/// Minimum-cost perfect assignment on a square matrix; returns the column
/// assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // Potentials formulation, 1-based with a dummy column 0.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Nodes left over after the best one-to-one matching of clusters.
pub fn misassigned(estimated: &Membership, truth: &Membership) -> Result<u64> {
    let c = ConfusionMatrix::new(estimated, truth)?;
    let square = c.padded();
    let cost: Vec<Vec<i64>> = square
        .iter()
        .map(|r| r.iter().map(|&x| -(x as i64)).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let matched: u64 = assignment.iter().enumerate().map(|(k, &l)| square[k][l]).sum();
    Ok(c.n - matched)
}

/// Fraction of misassigned nodes under the best cluster matching.
pub fn hamming_error(estimated: &Membership, truth: &Membership) -> Result<f64> {
    let bad = misassigned(estimated, truth)?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    Ok(bad as f64 / truth.len() as f64)
}

/// Normalized mutual information `2·I / (H_truth + H_estimate)`, with
/// `0·log 0 = 0`. Two single-cluster partitions score 1.
pub fn nmi(estimated: &Membership, truth: &Membership) -> Result<f64> {
    let c = ConfusionMatrix::new(estimated, truth)?;
    if c.n == 0 {
        return Err(Error::Precondition("NMI needs at least one node".into()));
    }
    let n = c.n as f64;
    let rows = c.truth_sizes();
    let cols = c.estimate_sizes();
    let mut num = 0.0;
    for (k, row) in c.counts.iter().enumerate() {
        for (l, &ckl) in row.iter().enumerate() {
            if ckl > 0 {
                let ckl = ckl as f64;
                num += ckl * (ckl * n / (rows[k] as f64 * cols[l] as f64)).ln();
            }
        }
    }
    let entropy = |sizes: &[u64]| -> f64 {
        sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| s as f64 * (s as f64 / n).ln())
            .sum()
    };
    let den = entropy(&rows) + entropy(&cols);
    if den == 0.0 || c.is_relabeling() {
        return Ok(1.0);
    }
    Ok((-2.0 * num / den).clamp(0.0, 1.0))
}

fn choose2(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand index from exact integer pair counts. A vanishing
/// denominator gives 1 for identical partitions and 0 otherwise.
pub fn ari(estimated: &Membership, truth: &Membership) -> Result<f64> {
    let c = ConfusionMatrix::new(estimated, truth)?;
    if c.n < 2 {
        return Err(Error::Precondition("ARI needs at least two nodes".into()));
    }
    let pairs = choose2(c.n);
    let index: i128 = c.counts.iter().flatten().map(|&x| choose2(x)).sum();
    let a: i128 = c.truth_sizes().into_iter().map(choose2).sum();
    let b: i128 = c.estimate_sizes().into_iter().map(choose2).sum();
    // Both sides multiplied by 2·C(n, 2).
    let num = 2 * (pairs * index - a * b);
    let den = pairs * (a + b) - 2 * a * b;
    if den == 0 {
        return Ok(if c.is_relabeling() { 1.0 } else { 0.0 });
    }
    Ok(num as f64 / den as f64)
}

/// `min_π max_k (|C_k \ Ĉ_π(k)| + |Ĉ_π(k) \ C_k|) / |C_k|`.
///
/// Exhaustive over permutations for up to eight clusters, bottleneck
/// matching beyond that. A padded (empty) truth cluster matched to a
/// nonempty estimated cluster costs `+∞`.
pub fn criterion_f(estimated: &Membership, truth: &Membership) -> Result<f64> {
    let c = ConfusionMatrix::new(estimated, truth)?;
    let square = c.padded();
    let k = square.len();
    let truth_sizes: Vec<u64> = square.iter().map(|r| r.iter().sum()).collect();
    let est_sizes: Vec<u64> = (0..k).map(|l| square.iter().map(|r| r[l]).sum()).collect();
    let cost: Vec<Vec<f64>> = (0..k)
        .map(|t| {
            (0..k)
                .map(|e| {
                    let miss = truth_sizes[t] + est_sizes[e] - 2 * square[t][e];
                    match (miss, truth_sizes[t]) {
                        (0, _) => 0.0,
                        (_, 0) => f64::INFINITY,
                        (m, s) => m as f64 / s as f64,
                    }
                })
                .collect()
        })
        .collect();
    if k == 0 {
        return Ok(0.0);
    }
    Ok(if k <= 8 {
        bottleneck_by_enumeration(&cost)
    } else {
        bottleneck_by_matching(&cost)
    })
}

fn bottleneck_by_enumeration(cost: &[Vec<f64>]) -> f64 {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = f64::INFINITY;
    let score = |p: &[usize]| (0..k).map(|i| cost[i][p[i]]).fold(0.0, f64::max);
    best = best.min(score(&perm));
    // Heap's algorithm, iterative.
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(score(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn bottleneck_by_matching(cost: &[Vec<f64>]) -> f64 {
    let mut levels: Vec<f64> = cost.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(cost, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

fn perfect_matching(cost: &[Vec<f64>], limit: f64) -> bool {
    let k = cost.len();
    let mut owner = vec![usize::MAX; k];
    fn augment(
        i: usize,
        cost: &[Vec<f64>],
        limit: f64,
        seen: &mut [bool],
        owner: &mut [usize],
    ) -> bool {
        for j in 0..cost.len() {
            if cost[i][j] <= limit && !seen[j] {
                seen[j] = true;
                if owner[j] == usize::MAX || augment(owner[j], cost, limit, seen, owner) {
                    owner[j] = i;
                    return true;
                }
            }
        }
        false
    }
    (0..k).all(|i| augment(i, cost, limit, &mut vec![false; k], &mut owner))
}

/// Per-side metrics and their combination: worst error, weakest NMI and ARI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricsReport {
    pub error_rate_r: f64,
    pub error_rate_c: f64,
    pub error_rate: f64,
    pub nmi_r: f64,
    pub nmi_c: f64,
    pub nmi: f64,
    pub ari_r: f64,
    pub ari_c: f64,
    pub ari: f64,
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "error_rate_r,error_rate_c,error_rate,nmi_r,nmi_c,nmi,ari_r,ari_c,ari";

    pub fn to_csv_row(&self) -> String {
        [
            self.error_rate_r,
            self.error_rate_c,
            self.error_rate,
            self.nmi_r,
            self.nmi_c,
            self.nmi,
            self.ari_r,
            self.ari_c,
            self.ari,
        ]
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
    }
}

pub fn combined_report(
    est_r: &Membership,
    truth_r: &Membership,
    est_c: &Membership,
    truth_c: &Membership,
) -> Result<MetricsReport> {
    let error_rate_r = hamming_error(est_r, truth_r)?;
    let error_rate_c = hamming_error(est_c, truth_c)?;
    let nmi_r = nmi(est_r, truth_r)?;
    let nmi_c = nmi(est_c, truth_c)?;
    let ari_r = ari(est_r, truth_r)?;
    let ari_c = ari(est_c, truth_c)?;
    Ok(MetricsReport {
        error_rate_r,
        error_rate_c,
        error_rate: error_rate_r.max(error_rate_c),
        nmi_r,
        nmi_c,
        nmi: nmi_r.min(nmi_c),
        ari_r,
        ari_c,
        ari: ari_r.min(ari_c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(labels: &[usize]) -> Membership {
        Membership::from_one_based(labels, None).unwrap()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming_error(&m(&[1, 2, 2]), &m(&[1, 2, 2])).unwrap(), 0.0);
        assert_eq!(hamming_error(&m(&[2, 2, 1, 1]), &m(&[1, 1, 2, 2])).unwrap(), 0.0);
        let e = hamming_error(&m(&[1, 1, 2, 3, 3, 3]), &m(&[1, 1, 2, 2, 3, 3])).unwrap();
        assert!((e - 1.0 / 6.0).abs() < 1e-15);
        assert!(hamming_error(&m(&[1, 2]), &m(&[1, 2, 2])).is_err());
    }

    #[test]
    fn hamming_pads_unequal_k() {
        let e = hamming_error(&m(&[1, 1, 1, 1]), &m(&[1, 1, 2, 2])).unwrap();
        assert_eq!(e, 0.5);
    }

    #[test]
    fn nmi_examples() {
        assert_eq!(nmi(&m(&[1, 2, 1, 3]), &m(&[3, 1, 3, 2])).unwrap(), 1.0);
        let indep = nmi(&m(&[1, 2, 1, 2, 1, 2, 1, 2]), &m(&[1, 1, 1, 1, 2, 2, 2, 2])).unwrap();
        assert!(indep.abs() < 1e-15);
        assert_eq!(nmi(&m(&[1, 1]), &m(&[1, 1])).unwrap(), 1.0);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(ari(&m(&[1, 2, 1, 3]), &m(&[2, 3, 2, 1])).unwrap(), 1.0);
        // Crossed 2×2: index 0, a = b = 2, C(4,2) = 6.
        let v = ari(&m(&[1, 2, 1, 2]), &m(&[1, 1, 2, 2])).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        // Singletons vs [1,1,2,2]: index 0, a = 0 → 0.
        assert_eq!(ari(&m(&[1, 2, 3, 4]), &m(&[1, 1, 2, 2])).unwrap(), 0.0);
        assert_eq!(ari(&m(&[1, 2, 3]), &m(&[3, 1, 2])).unwrap(), 1.0);
        assert!(ari(&m(&[1]), &m(&[1])).is_err());
    }

    #[test]
    fn criterion_f_examples() {
        assert_eq!(criterion_f(&m(&[1, 2, 2]), &m(&[1, 2, 2])).unwrap(), 0.0);
        assert_eq!(criterion_f(&m(&[1, 2, 2, 2]), &m(&[1, 1, 2, 2])).unwrap(), 0.5);
        assert_eq!(criterion_f(&m(&[2, 2, 2, 1]), &m(&[1, 1, 1, 2])).unwrap(), 0.0);
    }

    #[test]
    fn criterion_f_matching_agrees_with_enumeration() {
        let truth: Vec<usize> = (0..40).map(|i| i % 9 + 1).collect();
        let est: Vec<usize> = (0..40).map(|i| (i * 7 + i / 9) % 9 + 1).collect();
        let c = ConfusionMatrix::new(&m(&est), &m(&truth)).unwrap();
        let sizes_t = c.truth_sizes();
        let sizes_e = c.estimate_sizes();
        let cost: Vec<Vec<f64>> = (0..9)
            .map(|t| {
                (0..9)
                    .map(|e| (sizes_t[t] + sizes_e[e] - 2 * c.counts[t][e]) as f64 / sizes_t[t] as f64)
                    .collect()
            })
            .collect();
        assert_eq!(bottleneck_by_matching(&cost), bottleneck_by_enumeration(&cost));
    }

    #[test]
    fn combined_uses_worst_side() {
        let truth_r = m(&[1, 1, 2, 2]);
        let truth_c = m(&[1, 1, 2, 2, 3, 3]);
        let est_c = m(&[1, 1, 2, 3, 3, 3]);
        let r = combined_report(&truth_r, &truth_r, &est_c, &truth_c).unwrap();
        assert_eq!(r.error_rate, r.error_rate_c);
        assert!((r.error_rate - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(r.nmi, r.nmi_c);
        assert_eq!(r.ari, r.ari_c);
        let s = combined_report(&est_c, &truth_c, &truth_r, &truth_r).unwrap();
        assert_eq!((s.error_rate, s.nmi, s.ari), (r.error_rate, r.nmi, r.ari));
        assert_eq!(s.error_rate_r, r.error_rate_c);
        assert_eq!(MetricsReport::CSV_HEADER.split(',').count(), r.to_csv_row().split(',').count());
    }
}
