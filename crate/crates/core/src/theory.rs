//! Distribution constants, sparsity assumptions, noise bounds and
//! misclustering envelopes, plus an analytic construction of the population
//! SVD.
//!
//! Envelopes carry an unknown constant and are order-of-magnitude only.
//! `τ = +∞` stands for a law with unbounded support.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dense_svd, norm, row_normalize, spectral_deviation, truncated_svd, Matrix, SvdFactors,
    DEFAULT_SVD_TOL,
};
use crate::membership::Membership;
use crate::model::{BiDcdfmParams, ModelParams};
use crate::rng::derive_seed;
use crate::sampling::{sample_adjacency, DistributionSpec, EdgeLaw};

/// Entrywise noise scale: the exact `γ` (or `γ_*`), the textbook bound on
/// it, and the almost-sure bound `τ` on `|A − Ω|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaTau {
    pub gamma: f64,
    pub gamma_bound: f64,
    pub tau: f64,
}

impl GammaTau {
    pub fn tau_is_bounded(&self) -> bool {
        self.tau.is_finite()
    }
}

pub fn gamma_tau(dist: &DistributionSpec, params: &ModelParams) -> Result<GammaTau> {
    dist.validate()?;
    let omega = params.expected_adjacency()?;
    dist.check_range(&omega)?;
    let (scale_r, scale_c): (Vec<f64>, Vec<f64>) = match params {
        ModelParams::Plain(p) => (vec![p.rho; omega.rows()], vec![1.0; omega.cols()]),
        ModelParams::DegreeCorrected(p) => (p.theta_r.clone(), p.theta_c.clone()),
    };
    let mut gamma: f64 = 0.0;
    let mut max_abs: f64 = 0.0;
    for i in 0..omega.rows() {
        for (j, &w) in omega.row(i).iter().enumerate() {
            gamma = gamma.max(dist.variance(w) / (scale_r[i] * scale_c[j]));
            max_abs = max_abs.max(w.abs());
        }
    }
    let min_scale = match params {
        ModelParams::Plain(p) => p.rho,
        ModelParams::DegreeCorrected(p) => p.theta_r_range().0 * p.theta_c_range().0,
    };
    let (gamma_bound, tau) = match dist.kind {
        EdgeLaw::Bernoulli => (1.0, 1.0),
        EdgeLaw::Normal => (gamma, f64::INFINITY),
        EdgeLaw::Signed => (1.0 / min_scale, 1.0 + max_abs),
        EdgeLaw::Poisson => (gamma, f64::INFINITY),
    };
    Ok(GammaTau {
        gamma,
        gamma_bound,
        tau,
    })
}

/// `max |A − Ω|`, a stand-in for `τ` when the law has unbounded support.
pub fn empirical_tau(a: &Matrix, omega: &Matrix) -> Result<f64> {
    a.max_abs_diff(omega)
}

/// Degree-weight summaries used by the degree-corrected bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeInputs {
    pub theta_r_min: f64,
    pub theta_r_max: f64,
    pub theta_c_min: f64,
    pub theta_c_max: f64,
    pub theta_r_l1: f64,
    pub theta_c_l1: f64,
    /// Smallest gap between distinct normalized column centroids.
    #[serde(default)]
    pub delta_c_star: Option<f64>,
    /// Smallest row norm of the column factor of the reduced SVD.
    #[serde(default)]
    pub m_vc: Option<f64>,
}

impl DegreeInputs {
    /// `max(θ_r,max ‖θ_c‖₁, θ_c,max ‖θ_r‖₁)`.
    pub fn mixed_mass(&self) -> f64 {
        (self.theta_r_max * self.theta_c_l1).max(self.theta_c_max * self.theta_r_l1)
    }
}

/// Every quantity the assumptions and bounds depend on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryInputs {
    pub n_r: usize,
    pub n_c: usize,
    pub k_r: usize,
    pub k_c: usize,
    /// `σ_{K_r}(P)`.
    pub sigma_kr_p: f64,
    /// Sparsity; for the degree-corrected model, the mean of `θ_r(i)θ_c(j)`.
    pub rho: f64,
    /// `γ` for the plain model, `γ_*` for the degree-corrected one.
    pub gamma: f64,
    /// `+∞` for unbounded laws.
    pub tau: f64,
    pub n_r_min: usize,
    pub n_r_max: usize,
    pub n_c_min: usize,
    pub n_c_max: usize,
    /// Smallest gap between distinct column centroids of the plain model.
    #[serde(default)]
    pub delta_c: Option<f64>,
    #[serde(default)]
    pub degree: Option<DegreeInputs>,
}

impl TheoryInputs {
    /// Reads sizes, weights and centroid gaps off valid parameters.
    pub fn from_params(params: &ModelParams, gamma: f64, tau: f64) -> Result<Self> {
        params.check()?;
        let (rs, cs) = (params.row().sizes(), params.col().sizes());
        let rho = match params {
            ModelParams::Plain(p) => p.rho,
            ModelParams::DegreeCorrected(p) => mean(&p.theta_r) * mean(&p.theta_c),
        };
        let geometry = population_geometry_check(params)?;
        let degree = match params {
            ModelParams::Plain(_) => None,
            ModelParams::DegreeCorrected(p) => {
                let (theta_r_min, theta_r_max) = p.theta_r_range();
                let (theta_c_min, theta_c_max) = p.theta_c_range();
                let reduced = reduced_column_factor(p)?;
                let m_vc = (0..reduced.rows())
                    .map(|k| norm(reduced.row(k)))
                    .fold(f64::INFINITY, f64::min);
                Some(DegreeInputs {
                    theta_r_min,
                    theta_r_max,
                    theta_c_min,
                    theta_c_max,
                    theta_r_l1: p.theta_r.iter().sum(),
                    theta_c_l1: p.theta_c.iter().sum(),
                    delta_c_star: geometry.min_col_gap(),
                    m_vc: Some(m_vc),
                })
            }
        };
        let delta_c = match params {
            ModelParams::Plain(_) => geometry.min_col_gap(),
            ModelParams::DegreeCorrected(_) => None,
        };
        Ok(TheoryInputs {
            n_r: params.row().len(),
            n_c: params.col().len(),
            k_r: params.row().k(),
            k_c: params.col().k(),
            sigma_kr_p: params.mixing().sigma_min(),
            rho,
            gamma,
            tau,
            n_r_min: *rs.iter().min().unwrap_or(&0),
            n_r_max: *rs.iter().max().unwrap_or(&0),
            n_c_min: *cs.iter().min().unwrap_or(&0),
            n_c_max: *cs.iter().max().unwrap_or(&0),
            delta_c,
            degree,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn log_n(&self) -> f64 {
        ((self.n_r + self.n_c) as f64).ln()
    }

    fn max_n(&self) -> f64 {
        self.n_r.max(self.n_c) as f64
    }

    fn degree(&self) -> Result<&DegreeInputs> {
        self.degree
            .as_ref()
            .ok_or_else(|| Error::Precondition("degree-corrected inputs are missing".into()))
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Verdict of an assumption check. Both fields are `None` when `τ` is
/// unbounded and the check is indeterminate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssumptionCheck {
    pub holds: Option<bool>,
    /// Left side over right side.
    pub ratio: Option<f64>,
}

fn compare(lhs: f64, rhs: f64, tau: f64) -> AssumptionCheck {
    if !tau.is_finite() {
        return AssumptionCheck {
            holds: None,
            ratio: None,
        };
    }
    AssumptionCheck {
        holds: Some(lhs >= rhs),
        ratio: Some(lhs / rhs),
    }
}

/// `γρ ≥ τ² log(n_r + n_c) / max(n_r, n_c)`.
pub fn check_assumption1(inputs: &TheoryInputs) -> AssumptionCheck {
    let lhs = inputs.gamma * inputs.rho;
    let rhs = inputs.tau * inputs.tau * inputs.log_n() / inputs.max_n();
    compare(lhs, rhs, inputs.tau)
}

/// `γ_* max(θ_r,max ‖θ_c‖₁, θ_c,max ‖θ_r‖₁) ≥ τ² log(n_r + n_c)`.
pub fn check_assumption2(inputs: &TheoryInputs) -> Result<AssumptionCheck> {
    let d = inputs.degree()?;
    let lhs = inputs.gamma * d.mixed_mass();
    let rhs = inputs.tau * inputs.tau * inputs.log_n();
    Ok(compare(lhs, rhs, inputs.tau))
}

/// `C_α √(γρ max(n_r, n_c) log(n_r + n_c))`.
pub fn deviation_bound_bidfm(inputs: &TheoryInputs, c_alpha: f64) -> f64 {
    c_alpha * (inputs.gamma * inputs.rho * inputs.max_n() * inputs.log_n()).sqrt()
}

/// `C_α √(γ_* max(θ_r,max ‖θ_c‖₁, θ_c,max ‖θ_r‖₁) log(n_r + n_c))`.
pub fn deviation_bound_bidcdfm(inputs: &TheoryInputs, c_alpha: f64) -> Result<f64> {
    let d = inputs.degree()?;
    Ok(c_alpha * (inputs.gamma * d.mixed_mass() * inputs.log_n()).sqrt())
}

/// Row and column misclustering envelopes `(f_r, f_c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub f_r: f64,
    pub f_c: f64,
}

/// Envelopes for the plain model. Without `delta_c` and with `K_r = K_c`,
/// the lower bound `δ_c ≥ √(2 / n_c,max)` is used.
pub fn error_envelope_bidfm(inputs: &TheoryInputs, c: f64) -> Result<Envelope> {
    let delta_c = match (inputs.delta_c, inputs.k_r == inputs.k_c) {
        (Some(d), _) => d,
        (None, true) => (2.0 / inputs.n_c_max as f64).sqrt(),
        (None, false) => {
            return Err(Error::Precondition("delta_c is required when K_r < K_c".into()))
        }
    };
    let (k_r, k_c) = (inputs.k_r as f64, inputs.k_c as f64);
    let (nr_min, nr_max) = (inputs.n_r_min as f64, inputs.n_r_max as f64);
    let nc_min = inputs.n_c_min as f64;
    let common = inputs.max_n() * inputs.log_n()
        / (inputs.sigma_kr_p.powi(2) * inputs.rho * nr_min * nc_min);
    Ok(Envelope {
        f_r: c * inputs.gamma * k_r * k_r * nr_max / nr_min * common,
        f_c: c * inputs.gamma * k_r * k_c / (delta_c * delta_c * nc_min) * common,
    })
}

/// Envelopes for the degree-corrected model. Without `δ_c,*` and `m_Vc`
/// and with `K_r = K_c`, the values `√2` and `1` are used.
pub fn error_envelope_bidcdfm(inputs: &TheoryInputs, c: f64) -> Result<Envelope> {
    let d = inputs.degree()?;
    let equal_k = inputs.k_r == inputs.k_c;
    let delta = match (d.delta_c_star, equal_k) {
        (Some(v), _) => v,
        (None, true) => 2f64.sqrt(),
        (None, false) => {
            return Err(Error::Precondition("delta_c_star is required when K_r < K_c".into()))
        }
    };
    let m_vc = match (d.m_vc, equal_k) {
        (Some(v), _) => v,
        (None, true) => 1.0,
        (None, false) => return Err(Error::Precondition("m_vc is required when K_r < K_c".into())),
    };
    let (k_r, k_c) = (inputs.k_r as f64, inputs.k_c as f64);
    let (nr_min, nr_max) = (inputs.n_r_min as f64, inputs.n_r_max as f64);
    let (nc_min, nc_max) = (inputs.n_c_min as f64, inputs.n_c_max as f64);
    let s2 = inputs.sigma_kr_p.powi(2);
    let top = c * inputs.gamma * d.mixed_mass() * inputs.log_n();
    let f_r = top * d.theta_r_max.powi(2) * k_r * k_r * nr_max
        / (d.theta_r_min.powi(4) * d.theta_c_min.powi(2) * s2 * nr_min * nr_min * nc_min);
    let f_c = top * d.theta_c_max.powi(2) * k_r * k_c * nc_max
        / (d.theta_r_min.powi(2)
            * d.theta_c_min.powi(4)
            * s2
            * delta
            * delta
            * m_vc
            * m_vc
            * nr_min
            * nc_min
            * nc_min);
    Ok(Envelope { f_r, f_c })
}

/// Observed versus predicted distance between two cluster centroids.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CentroidGap {
    pub k: usize,
    pub l: usize,
    pub observed: f64,
    /// `None` where no closed form applies (columns with `K_r < K_c`).
    pub expected: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryReport {
    /// Largest distance of a singular-vector row from its cluster's reference row.
    pub within_r: f64,
    pub within_c: f64,
    pub row_gaps: Vec<CentroidGap>,
    pub col_gaps: Vec<CentroidGap>,
    /// Largest deviation over all within-cluster spreads and closed-form gaps.
    pub max_deviation: f64,
}

impl GeometryReport {
    fn min_col_gap(&self) -> Option<f64> {
        self.col_gaps
            .iter()
            .map(|g| g.observed)
            .min_by(f64::total_cmp)
    }
}

/// Checks the population singular-vector geometry: rows of one cluster
/// coincide, and centroids sit at `√(1/n_k + 1/n_l)` (plain model) or `√2`
/// after row normalization (degree-corrected model). Column gaps have a
/// closed form only when `K_r = K_c`.
pub fn population_geometry_check(params: &ModelParams) -> Result<GeometryReport> {
    let omega = params.expected_adjacency()?;
    let (row, col) = (params.row(), params.col());
    let k = row.k().min(col.k());
    let svd = truncated_svd(&omega, k, DEFAULT_SVD_TOL)?;
    let s = &svd.singular_values;
    if s[k - 1] <= 1e-10 * s[0] {
        return Err(Error::Infeasible(format!(
            "population matrix has rank below {k} (σ_k/σ_1 = {:.3e})",
            s[k - 1] / s[0]
        )));
    }
    let (u_r, u_c) = if params.is_degree_corrected() {
        (
            row_normalize(&svd.left, 0.0).matrix,
            row_normalize(&svd.right, 0.0).matrix,
        )
    } else {
        (svd.left, svd.right)
    };
    let closed_form = |m: &Membership, k: usize, l: usize| -> f64 {
        if params.is_degree_corrected() {
            2f64.sqrt()
        } else {
            let sz = m.sizes();
            (1.0 / sz[k] as f64 + 1.0 / sz[l] as f64).sqrt()
        }
    };
    let (within_r, row_gaps) = side_geometry(&u_r, row, |k, l| Some(closed_form(row, k, l)));
    let equal_k = row.k() == col.k();
    let (within_c, col_gaps) =
        side_geometry(&u_c, col, |k, l| equal_k.then(|| closed_form(col, k, l)));
    let max_deviation = row_gaps
        .iter()
        .chain(&col_gaps)
        .filter_map(|g| g.expected.map(|e| (g.observed - e).abs()))
        .fold(within_r.max(within_c), f64::max);
    Ok(GeometryReport {
        within_r,
        within_c,
        row_gaps,
        col_gaps,
        max_deviation,
    })
}

fn side_geometry(
    u: &Matrix,
    m: &Membership,
    expected: impl Fn(usize, usize) -> Option<f64>,
) -> (f64, Vec<CentroidGap>) {
    let mut reference = vec![usize::MAX; m.k()];
    let mut within: f64 = 0.0;
    for (i, &g) in m.labels().iter().enumerate() {
        if reference[g] == usize::MAX {
            reference[g] = i;
        } else {
            within = within.max(crate::linalg::squared_distance(u.row(i), u.row(reference[g])).sqrt());
        }
    }
    let mut gaps = Vec::new();
    for k in 0..m.k() {
        for l in k + 1..m.k() {
            let observed =
                crate::linalg::squared_distance(u.row(reference[k]), u.row(reference[l])).sqrt();
            gaps.push(CentroidGap {
                k,
                l,
                observed,
                expected: expected(k, l),
            });
        }
    }
    (within, gaps)
}

/// Column-normalized weight indicators `Γ` and the block scales `D`.
fn weighted_blocks(theta: &[f64], m: &Membership) -> (Matrix, Vec<f64>) {
    let total = norm(theta);
    let mut mass = vec![0.0; m.k()];
    for (&t, &g) in theta.iter().zip(m.labels()) {
        mass[g] += t * t;
    }
    let mass: Vec<f64> = mass.into_iter().map(f64::sqrt).collect();
    let gamma = Matrix::from_fn(theta.len(), m.k(), |i, k| {
        if m.labels()[i] == k {
            theta[i] / mass[k]
        } else {
            0.0
        }
    });
    (gamma, mass.iter().map(|x| x / total).collect())
}

fn reduced_problem(p: &BiDcdfmParams) -> (Matrix, Matrix, Matrix) {
    let (gamma_r, d_r) = weighted_blocks(&p.theta_r, &p.row);
    let (gamma_c, d_c) = weighted_blocks(&p.theta_c, &p.col);
    let small = Matrix::from_fn(p.p.k_r(), p.p.k_c(), |k, l| d_r[k] * p.p.get(k, l) * d_c[l]);
    (gamma_r, gamma_c, small)
}

fn reduced_column_factor(p: &BiDcdfmParams) -> Result<Matrix> {
    let (_, _, small) = reduced_problem(p);
    let k = p.p.k_r().min(p.p.k_c());
    Ok(dense_svd(&small).right.leading_columns(k))
}

/// Compact SVD of `Ω` assembled from the SVD of the small matrix
/// `D_r P D_c`: `Λ = ‖θ_r‖‖θ_c‖Σ`, `U_r = Γ_r V_r`, `U_c = Γ_c V_c`.
pub fn population_svd_oracle(params: &BiDcdfmParams) -> Result<SvdFactors> {
    let errs = params.validate();
    if !errs.is_empty() {
        return Err(Error::Validation(errs.iter().map(ToString::to_string).collect()));
    }
    let (gamma_r, gamma_c, small) = reduced_problem(params);
    let k = params.p.k_r().min(params.p.k_c());
    let inner = dense_svd(&small);
    let scale = norm(&params.theta_r) * norm(&params.theta_c);
    let mut out = SvdFactors {
        left: gamma_r.matmul(&inner.left.leading_columns(k))?,
        singular_values: inner.singular_values[..k].iter().map(|s| s * scale).collect(),
        right: gamma_c.matmul(&inner.right.leading_columns(k))?,
    };
    out.canonicalize_signs();
    Ok(out)
}

/// `‖A − Ω‖ / √(γρ max(n_r, n_c) log(n_r + n_c))` over independent draws.
///
/// Draw `d` uses seed `derive_seed(seed, 0, d)`; draws run in parallel.
pub fn deviation_ratios(
    params: &ModelParams,
    dist: &DistributionSpec,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let omega = params.expected_adjacency()?;
    let gt = gamma_tau(dist, params)?;
    let inputs = TheoryInputs {
        n_r: omega.rows(),
        n_c: omega.cols(),
        k_r: params.row().k(),
        k_c: params.col().k(),
        sigma_kr_p: 1.0,
        rho: match params {
            ModelParams::Plain(p) => p.rho,
            ModelParams::DegreeCorrected(_) => {
                return Err(Error::Unsupported(
                    "deviation ratios are defined for the plain model".into(),
                ))
            }
        },
        gamma: gt.gamma,
        tau: gt.tau,
        n_r_min: 1,
        n_r_max: 1,
        n_c_min: 1,
        n_c_max: 1,
        delta_c: None,
        degree: None,
    };
    let scale = deviation_bound_bidfm(&inputs, 1.0);
    (0..draws)
        .into_par_iter()
        .map(|d| {
            let a = sample_adjacency(&omega, dist, derive_seed(seed, 0, d as u64))?;
            Ok(spectral_deviation(&a, &omega)? / scale)
        })
        .collect()
}

/// Assumption verdict, noise bound and envelopes for one set of inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoryReport {
    pub degree_corrected: bool,
    pub c: f64,
    pub c_alpha: f64,
    pub assumption: AssumptionCheck,
    pub deviation_bound: f64,
    pub envelope: Envelope,
}

impl TheoryReport {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let holds = self.assumption.holds.map_or("NA", |h| if h { "true" } else { "false" });
        let model = if self.degree_corrected { "bidcdfm" } else { "bidfm" };
        format!(
            "# bidfm-theory v1\nquantity,value\nmodel,{model}\nc,{}\nc_alpha,{}\nassumption_holds,{holds}\nassumption_ratio,{}\ndeviation_bound,{}\nenvelope_r,{}\nenvelope_c,{}\n",
            self.c,
            self.c_alpha,
            opt(self.assumption.ratio),
            self.deviation_bound,
            self.envelope.f_r,
            self.envelope.f_c
        )
    }
}

/// Evaluates the assumption, deviation bound and envelope for the chosen model.
pub fn theory_report(inputs: &TheoryInputs, degree_corrected: bool, c: f64, c_alpha: f64) -> Result<TheoryReport> {
    let (assumption, deviation_bound, envelope) = if degree_corrected {
        (
            check_assumption2(inputs)?,
            deviation_bound_bidcdfm(inputs, c_alpha)?,
            error_envelope_bidcdfm(inputs, c)?,
        )
    } else {
        (
            check_assumption1(inputs),
            deviation_bound_bidfm(inputs, c_alpha),
            error_envelope_bidfm(inputs, c)?,
        )
    };
    Ok(TheoryReport {
        degree_corrected,
        c,
        c_alpha,
        assumption,
        deviation_bound,
        envelope,
    })
}
