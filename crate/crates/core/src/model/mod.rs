//! Block-model parameters and their expected adjacency matrices.
//!
//! Two models are supported. The plain model scales a block matrix by a
//! single sparsity parameter, `Ω = ρ · Z_r P Z_cᵀ`. The degree-corrected
//! model gives every node its own positive weight,
//! `Ω = Θ_r Z_r P Z_cᵀ Θ_c`, and reduces to the plain model when all weights
//! equal `√ρ`.

mod config;

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{dense_svd, Matrix};
use crate::membership::Membership;
use crate::rng::{stream, tags};

pub use config::{MixingSpec, ModelConfig, ModelKind, ThetaConfig};

/// Tolerance on `max |P| = 1`.
pub const MAX_ABS_TOL: f64 = 1e-12;
/// Smallest singular value of `P` above which it counts as full rank.
pub const RANK_TOL: f64 = 1e-10;
/// Default lower bound of the uniform factor in [`sample_theta`].
pub const DEFAULT_THETA_FLOOR: f64 = 0.05;

/// Block connectivity matrix `P` (`K_r × K_c`).
#[derive(Clone, Debug, PartialEq)]
pub struct MixingMatrix(Matrix);

impl MixingMatrix {
    pub fn new(values: Matrix) -> Self {
        MixingMatrix(values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(MixingMatrix(Matrix::from_rows(rows)?))
    }

    /// Non-negative 2×3 matrix used with Bernoulli edges.
    pub fn p1() -> Self {
        MixingMatrix::from_rows(&[vec![1.0, 0.2, 0.3], vec![0.3, 0.8, 0.2]]).expect("static")
    }

    /// Signed 2×3 matrix used with Normal and signed edges.
    pub fn p2() -> Self {
        MixingMatrix::from_rows(&[vec![-1.0, 0.3, -0.5], vec![-0.4, 0.8, 0.2]]).expect("static")
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn k_r(&self) -> usize {
        self.0.rows()
    }

    pub fn k_c(&self) -> usize {
        self.0.cols()
    }

    #[inline]
    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.0[(k, l)]
    }

    /// `σ_{min(K_r, K_c)}(P)`.
    pub fn sigma_min(&self) -> f64 {
        *dense_svd(&self.0).singular_values.last().unwrap_or(&0.0)
    }

    fn violations(&self, out: &mut Vec<Violation>) {
        if !self.0.is_finite() {
            out.push(Violation::NonFiniteMixing);
            return;
        }
        let max_abs = self.0.max_abs();
        if (max_abs - 1.0).abs() > MAX_ABS_TOL {
            out.push(Violation::MaxAbsNotOne(max_abs));
        }
        let sigma = self.sigma_min();
        if sigma <= RANK_TOL {
            out.push(Violation::RankDeficient(sigma));
        }
    }
}

/// One failed validation rule.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    KOrder { k_r: usize, k_c: usize },
    MixingShape { expected: (usize, usize), found: (usize, usize) },
    EmptyCluster { side: Side, cluster: usize },
    MaxAbsNotOne(f64),
    RankDeficient(f64),
    NonFiniteMixing,
    NonPositiveRho(f64),
    ThetaLength { side: Side, expected: usize, found: usize },
    NonPositiveTheta { side: Side, index: usize, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Row,
    Col,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Row => "row",
            Side::Col => "column",
        })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KOrder { k_r, k_c } => write!(f, "K_r = {k_r} exceeds K_c = {k_c}"),
            Violation::MixingShape { expected, found } => {
                write!(f, "P has shape {found:?}, expected {expected:?}")
            }
            Violation::EmptyCluster { side, cluster } => {
                write!(f, "{side} cluster {} is empty", cluster + 1)
            }
            Violation::MaxAbsNotOne(v) => write!(f, "max|P| ≠ 1 (found {v})"),
            Violation::RankDeficient(s) => write!(f, "P is rank deficient (smallest singular value {s:.3e})"),
            Violation::NonFiniteMixing => write!(f, "P has non-finite entries"),
            Violation::NonPositiveRho(r) => write!(f, "rho must be positive (found {r})"),
            Violation::ThetaLength { side, expected, found } => {
                write!(f, "{side} theta has {found} entries, expected {expected}")
            }
            Violation::NonPositiveTheta { side, index, value } => {
                write!(f, "{side} theta[{index}] = {value} is not positive")
            }
        }
    }
}

fn check(violations: Vec<Violation>) -> Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(violations.iter().map(ToString::to_string).collect()))
    }
}

fn structural_violations(row: &Membership, col: &Membership, p: &MixingMatrix) -> Vec<Violation> {
    let mut out = Vec::new();
    if row.k() > col.k() {
        out.push(Violation::KOrder {
            k_r: row.k(),
            k_c: col.k(),
        });
    }
    if (p.k_r(), p.k_c()) != (row.k(), col.k()) {
        out.push(Violation::MixingShape {
            expected: (row.k(), col.k()),
            found: (p.k_r(), p.k_c()),
        });
    }
    for (side, m) in [(Side::Row, row), (Side::Col, col)] {
        for (cluster, &s) in m.sizes().iter().enumerate() {
            if s == 0 {
                out.push(Violation::EmptyCluster { side, cluster });
            }
        }
    }
    p.violations(&mut out);
    out
}

/// Parameters of the plain (non degree-corrected) model.
#[derive(Clone, Debug, PartialEq)]
pub struct BiDfmParams {
    pub row: Membership,
    pub col: Membership,
    pub p: MixingMatrix,
    pub rho: f64,
}

impl BiDfmParams {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = structural_violations(&self.row, &self.col, &self.p);
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            out.push(Violation::NonPositiveRho(self.rho));
        }
        out
    }

    /// `Ω(i, j) = ρ · P(g_i, g_j)`.
    pub fn expected_adjacency(&self) -> Result<Matrix> {
        check(self.validate())?;
        let (rl, cl) = (self.row.labels(), self.col.labels());
        Ok(Matrix::from_fn(rl.len(), cl.len(), |i, j| {
            self.rho * self.p.get(rl[i], cl[j])
        }))
    }

    /// The same model written with constant degree weights `√ρ`.
    pub fn to_degree_corrected(&self) -> BiDcdfmParams {
        let s = self.rho.sqrt();
        BiDcdfmParams {
            row: self.row.clone(),
            col: self.col.clone(),
            p: self.p.clone(),
            theta_r: vec![s; self.row.len()],
            theta_c: vec![s; self.col.len()],
        }
    }
}

/// Parameters of the degree-corrected model.
#[derive(Clone, Debug, PartialEq)]
pub struct BiDcdfmParams {
    pub row: Membership,
    pub col: Membership,
    pub p: MixingMatrix,
    pub theta_r: Vec<f64>,
    pub theta_c: Vec<f64>,
}

impl BiDcdfmParams {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = structural_violations(&self.row, &self.col, &self.p);
        for (side, theta, n) in [
            (Side::Row, &self.theta_r, self.row.len()),
            (Side::Col, &self.theta_c, self.col.len()),
        ] {
            if theta.len() != n {
                out.push(Violation::ThetaLength {
                    side,
                    expected: n,
                    found: theta.len(),
                });
            }
            for (index, &value) in theta.iter().enumerate() {
                if !(value > 0.0) || !value.is_finite() {
                    out.push(Violation::NonPositiveTheta { side, index, value });
                }
            }
        }
        out
    }

    /// `Ω(i, j) = θ_r(i) · θ_c(j) · P(g_i, g_j)`.
    pub fn expected_adjacency(&self) -> Result<Matrix> {
        check(self.validate())?;
        let (rl, cl) = (self.row.labels(), self.col.labels());
        Ok(Matrix::from_fn(rl.len(), cl.len(), |i, j| {
            self.theta_r[i] * self.theta_c[j] * self.p.get(rl[i], cl[j])
        }))
    }

    pub fn theta_r_range(&self) -> (f64, f64) {
        min_max(&self.theta_r)
    }

    pub fn theta_c_range(&self) -> (f64, f64) {
        min_max(&self.theta_c)
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

/// Either model.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelParams {
    Plain(BiDfmParams),
    DegreeCorrected(BiDcdfmParams),
}

impl ModelParams {
    pub fn validate(&self) -> Vec<Violation> {
        match self {
            ModelParams::Plain(p) => p.validate(),
            ModelParams::DegreeCorrected(p) => p.validate(),
        }
    }

    pub fn check(&self) -> Result<()> {
        check(self.validate())
    }

    pub fn expected_adjacency(&self) -> Result<Matrix> {
        match self {
            ModelParams::Plain(p) => p.expected_adjacency(),
            ModelParams::DegreeCorrected(p) => p.expected_adjacency(),
        }
    }

    pub fn row(&self) -> &Membership {
        match self {
            ModelParams::Plain(p) => &p.row,
            ModelParams::DegreeCorrected(p) => &p.row,
        }
    }

    pub fn col(&self) -> &Membership {
        match self {
            ModelParams::Plain(p) => &p.col,
            ModelParams::DegreeCorrected(p) => &p.col,
        }
    }

    pub fn mixing(&self) -> &MixingMatrix {
        match self {
            ModelParams::Plain(p) => &p.p,
            ModelParams::DegreeCorrected(p) => &p.p,
        }
    }

    pub fn is_degree_corrected(&self) -> bool {
        matches!(self, ModelParams::DegreeCorrected(_))
    }
}

const MAX_MEMBERSHIP_ATTEMPTS: u64 = 1_000_000;

/// Uniform i.i.d. labels, redrawn until every cluster is occupied.
pub fn sample_memberships(n: usize, k: usize, seed: u64) -> Result<Membership> {
    if k == 0 || n < k {
        return Err(Error::Infeasible(format!(
            "cannot fill {k} clusters with {n} nodes"
        )));
    }
    for attempt in 0..MAX_MEMBERSHIP_ATTEMPTS {
        let mut rng = stream(seed, tags::MEMBERSHIP, attempt);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let m = Membership::new(labels, k)?;
        if m.sizes().iter().all(|&s| s > 0) {
            return Ok(m);
        }
    }
    Err(Error::Infeasible(format!(
        "no membership with all {k} clusters occupied after {MAX_MEMBERSHIP_ATTEMPTS} draws"
    )))
}

/// Degree weights `θ(i) = √ρ · u_i` with `u_i` uniform on `(0.05, 1)`.
pub fn sample_theta(n: usize, rho: f64, seed: u64) -> Result<Vec<f64>> {
    sample_theta_with_floor(n, rho, DEFAULT_THETA_FLOOR, seed)
}

pub fn sample_theta_with_floor(n: usize, rho: f64, floor: f64, seed: u64) -> Result<Vec<f64>> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Validation(vec![Violation::NonPositiveRho(rho).to_string()]));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::Precondition(format!("theta floor {floor} must lie in [0, 1)")));
    }
    let scale = rho.sqrt();
    let mut rng = stream(seed, tags::THETA, 0);
    Ok((0..n)
        .map(|_| loop {
            let u = rng.random_range(floor..1.0);
            if u > floor {
                break scale * u;
            }
        })
        .collect())
}
