use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::{detect, Algorithm, DetectOptions};
use crate::error::{Error, Result};
use crate::linalg::{DEFAULT_MAX_ITER, DEFAULT_RESTARTS};
use crate::metrics::{combined_report, MetricsReport};
use crate::model::{
    sample_memberships, sample_theta_with_floor, BiDcdfmParams, BiDfmParams, MixingSpec,
    ModelKind, ModelParams, DEFAULT_THETA_FLOOR,
};
use crate::rng::{derive_seed, tags};
use crate::sampling::{sample_adjacency, DistributionSpec, EdgeLaw};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Rho,
    Sigma2,
    /// `n_r = n_c = n`.
    N,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Sigma2 => "sigma2",
            SweepParam::N => "n",
        }
    }
}

fn default_parallel() -> bool {
    true
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}

fn default_theta_floor() -> f64 {
    DEFAULT_THETA_FLOOR
}

/// One parameter sweep.
///
/// For every swept value the memberships (and weights) are drawn once, then
/// `replicates` adjacency matrices are sampled; replicate `r` uses seed
/// `base_seed + r` both for sampling and for the detectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub name: String,
    pub model: ModelKind,
    /// Ignored when sweeping `n`.
    #[serde(default)]
    pub n_r: usize,
    #[serde(default)]
    pub n_c: usize,
    pub k_r: usize,
    pub k_c: usize,
    pub p: MixingSpec,
    /// Fixed sparsity; ignored when sweeping `rho`.
    #[serde(default)]
    pub rho: f64,
    /// Edge law; its `sigma2` is replaced by the swept value when sweeping `sigma2`.
    pub distribution: DistributionSpec,
    pub sweep: SweepParam,
    pub values: Vec<f64>,
    pub replicates: usize,
    pub algorithms: Vec<Algorithm>,
    #[serde(default)]
    pub base_seed: u64,
    /// Use `A = Ω` instead of sampling.
    #[serde(default)]
    pub population: bool,
    #[serde(default = "default_theta_floor")]
    pub theta_floor: f64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.replicates == 0 {
            return fail("replicates must be at least 1".into());
        }
        if self.values.is_empty() {
            return fail("the sweep has no values".into());
        }
        if self.algorithms.is_empty() {
            return fail("no algorithms selected".into());
        }
        if self.values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return fail("swept values must be positive".into());
        }
        if self.sweep == SweepParam::N && self.values.iter().any(|v| v.fract() != 0.0) {
            return fail("swept n values must be integers".into());
        }
        if self.sweep == SweepParam::Sigma2 && self.distribution.kind != EdgeLaw::Normal {
            return fail("sweeping sigma2 needs the normal law".into());
        }
        if self.sweep != SweepParam::Rho && !(self.rho > 0.0) {
            return fail("a fixed positive rho is required".into());
        }
        if self.sweep != SweepParam::N && (self.n_r == 0 || self.n_c == 0) {
            return fail("n_r and n_c are required".into());
        }
        if self.sweep != SweepParam::Sigma2 {
            self.distribution.validate()?;
        }
        let p = self.p.build()?;
        let negative = p.values().min_value() < 0.0;
        if negative && matches!(self.distribution.kind, EdgeLaw::Bernoulli | EdgeLaw::Poisson) {
            return fail(format!(
                "the {} law needs a non-negative mixing matrix",
                self.distribution.kind
            ));
        }
        Ok(())
    }

    fn point(&self, value: f64) -> (usize, usize, f64, DistributionSpec) {
        let mut dist = self.distribution;
        let (mut n_r, mut n_c, mut rho) = (self.n_r, self.n_c, self.rho);
        match self.sweep {
            SweepParam::Rho => rho = value,
            SweepParam::Sigma2 => dist.sigma2 = Some(value),
            SweepParam::N => {
                n_r = value as usize;
                n_c = value as usize;
            }
        }
        (n_r, n_c, rho, dist)
    }

    /// Model parameters for sweep point `index`.
    pub fn params_at(&self, index: usize) -> Result<ModelParams> {
        let (n_r, n_c, rho, _) = self.point(self.values[index]);
        let seed = derive_seed(self.base_seed, tags::SIM_MODEL, index as u64);
        let row = sample_memberships(n_r, self.k_r, derive_seed(seed, tags::MEMBERSHIP, 0))?;
        let col = sample_memberships(n_c, self.k_c, derive_seed(seed, tags::MEMBERSHIP, 1))?;
        let p = self.p.build()?;
        let params = match self.model {
            ModelKind::Bidfm => ModelParams::Plain(BiDfmParams { row, col, p, rho }),
            ModelKind::Bidcdfm => ModelParams::DegreeCorrected(BiDcdfmParams {
                row,
                col,
                p,
                theta_r: sample_theta_with_floor(n_r, rho, self.theta_floor, derive_seed(seed, tags::THETA, 0))?,
                theta_c: sample_theta_with_floor(n_c, rho, self.theta_floor, derive_seed(seed, tags::THETA, 1))?,
            }),
        };
        params.check()?;
        Ok(params)
    }
}

const RHO_GRID_10: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

fn tenths(hi: usize) -> Vec<f64> {
    (1..=hi).map(|i| i as f64 / 10.0).collect()
}

fn even_tenths(hi: usize) -> Vec<f64> {
    (1..=hi / 2).map(|i| (2 * i) as f64 / 10.0).collect()
}

fn steps(lo: usize, hi: usize, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(|n| n as f64).collect()
}

pub const PRESET_NAMES: [&str; 14] = [
    "sim1a", "sim1b", "sim1c", "sim1d", "sim2a", "sim2b", "sim2c", "sim2d", "sim2e", "sim2f",
    "sim3a", "sim3b", "sim3c", "sim3d",
];

/// Named sweeps with `K_r = 2`, `K_c = 3`, 50 replicates and all five detectors.
pub fn preset(name: &str) -> Result<SimulationConfig> {
    use ModelKind::{Bidcdfm, Bidfm};
    use SweepParam::{Sigma2, Rho, N};
    let bern = DistributionSpec::bernoulli();
    let normal = DistributionSpec::normal(1.0);
    let signed = DistributionSpec::signed();
    #[rustfmt::skip]
    let (model, n_r, n_c, rho, dist, p, sweep, values) = match name {
        "sim1a" => (Bidfm, 200, 300, 0.0, bern, "P1", Rho, RHO_GRID_10.to_vec()),
        "sim1b" => (Bidcdfm, 600, 900, 0.0, bern, "P1", Rho, RHO_GRID_10.to_vec()),
        "sim1c" => (Bidfm, 0, 0, 0.5, bern, "P1", N, steps(50, 500, 50)),
        "sim1d" => (Bidcdfm, 0, 0, 0.5, bern, "P1", N, steps(500, 3000, 500)),
        "sim2a" => (Bidfm, 200, 300, 0.0, normal, "P2", Rho, tenths(20)),
        "sim2b" => (Bidcdfm, 600, 900, 0.0, normal, "P2", Rho, tenths(20)),
        "sim2c" => (Bidfm, 200, 300, 0.5, normal, "P2", Sigma2, even_tenths(20)),
        "sim2d" => (Bidcdfm, 600, 900, 3.0, normal, "P2", Sigma2, even_tenths(20)),
        "sim2e" => (Bidfm, 0, 0, 0.5, normal, "P2", N, steps(50, 500, 50)),
        "sim2f" => (Bidcdfm, 0, 0, 1.0, normal, "P2", N, steps(500, 3000, 500)),
        "sim3a" => (Bidfm, 100, 150, 0.0, signed, "P2", Rho, RHO_GRID_10.to_vec()),
        "sim3b" => (Bidcdfm, 1000, 1500, 0.0, signed, "P2", Rho, RHO_GRID_10.to_vec()),
        "sim3c" => (Bidfm, 0, 0, 0.5, signed, "P2", N, steps(50, 500, 50)),
        "sim3d" => (Bidcdfm, 0, 0, 1.0, signed, "P2", N, steps(500, 3000, 250)),
        other => {
            return Err(Error::Config(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(SimulationConfig {
        name: name.to_string(),
        model,
        n_r,
        n_c,
        k_r: 2,
        k_c: 3,
        p: MixingSpec::Preset(p.to_string()),
        rho,
        distribution: dist,
        sweep,
        values,
        replicates: 50,
        algorithms: Algorithm::ALL.to_vec(),
        base_seed: 0,
        population: false,
        theta_floor: DEFAULT_THETA_FLOOR,
        restarts: DEFAULT_RESTARTS,
        parallel: true,
    })
}

/// Outcome of one algorithm on one replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicateRecord {
    pub algorithm: Algorithm,
    pub value: f64,
    pub replicate: usize,
    pub seed: u64,
    pub outcome: std::result::Result<MetricsReport, String>,
}

/// Mean and standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
}

impl Summary {
    fn of(xs: &[f64]) -> Summary {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Summary {
                mean: f64::NAN,
                se: f64::NAN,
            };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Summary { mean, se }
    }
}

/// Averages for one algorithm at one swept value.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub algorithm: Algorithm,
    pub value: f64,
    pub error_rate: Summary,
    pub nmi: Summary,
    pub ari: Summary,
    /// Replicates that produced metrics.
    pub replicates: usize,
    pub failures: usize,
    pub seed_first: u64,
    pub seed_last: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub name: String,
    pub sweep: SweepParam,
    pub points: Vec<CurvePoint>,
    pub records: Vec<ReplicateRecord>,
}

impl ExperimentReport {
    pub fn point(&self, algorithm: Algorithm, value: f64) -> Option<&CurvePoint> {
        self.points
            .iter()
            .find(|p| p.algorithm == algorithm && p.value == value)
    }

    /// One row per algorithm and swept value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("# bidfm experiment report v1\n");
        out.push_str(
            "experiment,algorithm,sweep,value,replicates,failures,error_rate,error_rate_se,nmi,nmi_se,ari,ari_se,seed_first,seed_last\n",
        );
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.name,
                p.algorithm,
                self.sweep.name(),
                p.value,
                p.replicates,
                p.failures,
                p.error_rate.mean,
                p.error_rate.se,
                p.nmi.mean,
                p.nmi.se,
                p.ari.mean,
                p.ari.se,
                p.seed_first,
                p.seed_last
            );
        }
        out
    }

    /// One row per algorithm, swept value and metric.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("# bidfm experiment report (long) v1\n");
        out.push_str("experiment,algorithm,sweep,value,metric,mean,se,replicates\n");
        for p in &self.points {
            for (metric, s) in [("error_rate", p.error_rate), ("nmi", p.nmi), ("ari", p.ari)] {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    self.name,
                    p.algorithm,
                    self.sweep.name(),
                    p.value,
                    metric,
                    s.mean,
                    s.se,
                    p.replicates
                );
            }
        }
        out
    }
}

/// Runs the sweep. Detector failures are recorded per replicate; model or
/// sampling failures abort the run.
pub fn run_simulation(config: &SimulationConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let opts = |seed: u64| DetectOptions {
        seed,
        restarts: config.restarts,
        max_iter: DEFAULT_MAX_ITER,
        ..DetectOptions::default()
    };
    let mut records = Vec::new();
    for (index, &value) in config.values.iter().enumerate() {
        let params = config.params_at(index)?;
        let omega = params.expected_adjacency()?;
        let (_, _, _, dist) = config.point(value);
        let one = |rep: usize| -> Result<Vec<ReplicateRecord>> {
            let seed = config.base_seed.wrapping_add(rep as u64);
            let sampled;
            let a = if config.population {
                &omega
            } else {
                sampled = sample_adjacency(&omega, &dist, seed)?;
                &sampled
            };
            Ok(config
                .algorithms
                .iter()
                .map(|&algorithm| {
                    let outcome = detect(algorithm, a, config.k_r, config.k_c, &opts(seed))
                        .and_then(|r| {
                            combined_report(&r.row_labels, params.row(), &r.col_labels, params.col())
                        })
                        .map_err(|e| e.to_string());
                    ReplicateRecord {
                        algorithm,
                        value,
                        replicate: rep,
                        seed,
                        outcome,
                    }
                })
                .collect())
        };
        let per_rep: Vec<Vec<ReplicateRecord>> = if config.parallel {
            (0..config.replicates)
                .into_par_iter()
                .map(one)
                .collect::<Result<_>>()?
        } else {
            (0..config.replicates).map(one).collect::<Result<_>>()?
        };
        records.extend(per_rep.into_iter().flatten());
    }
    let mut points = Vec::new();
    for &value in &config.values {
        for &algorithm in &config.algorithms {
            let mine: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.algorithm == algorithm && r.value == value)
                .collect();
            let ok: Vec<&MetricsReport> = mine.iter().filter_map(|r| r.outcome.as_ref().ok()).collect();
            let pick = |f: fn(&MetricsReport) -> f64| -> Vec<f64> { ok.iter().map(|m| f(m)).collect() };
            points.push(CurvePoint {
                algorithm,
                value,
                error_rate: Summary::of(&pick(|m| m.error_rate)),
                nmi: Summary::of(&pick(|m| m.nmi)),
                ari: Summary::of(&pick(|m| m.ari)),
                replicates: ok.len(),
                failures: mine.len() - ok.len(),
                seed_first: config.base_seed,
                seed_last: config.base_seed.wrapping_add(config.replicates as u64 - 1),
            });
        }
    }
    Ok(ExperimentReport {
        name: config.name.clone(),
        sweep: config.sweep,
        points,
        records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_published_setups() {
        let c = preset("sim2c").unwrap();
        assert_eq!((c.n_r, c.n_c, c.rho), (200, 300, 0.5));
        assert_eq!(c.sweep, SweepParam::Sigma2);
        assert_eq!(c.values.len(), 10);
        assert_eq!(c.values[0], 0.2);
        assert_eq!(c.values[9], 2.0);
        assert_eq!(c.distribution.kind, EdgeLaw::Normal);
        assert_eq!(c.p, MixingSpec::Preset("P2".into()));

        let c = preset("sim3b").unwrap();
        assert_eq!((c.n_r, c.n_c, c.model), (1000, 1500, ModelKind::Bidcdfm));
        assert_eq!(c.values, RHO_GRID_10.to_vec());

        let c = preset("sim1d").unwrap();
        assert_eq!(c.values, vec![500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0]);
        assert_eq!(preset("sim3d").unwrap().values.len(), 11);
        assert_eq!(preset("sim2a").unwrap().values.len(), 20);
        for name in PRESET_NAMES {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            assert_eq!(c.replicates, 50);
        }
        assert!(preset("sim4a").is_err());
    }

    #[test]
    fn population_mode_recovers_everything() {
        let mut c = preset("sim1a").unwrap();
        c.replicates = 1;
        c.algorithms = vec![Algorithm::Bisc, Algorithm::Nbisc];
        c.population = true;
        let r = run_simulation(&c).unwrap();
        assert_eq!(r.points.len(), 20);
        assert!(r.points.iter().all(|p| p.error_rate.mean == 0.0 && p.failures == 0));
    }

    #[test]
    fn incompatible_law_is_rejected() {
        let mut c = preset("sim1a").unwrap();
        c.p = MixingSpec::Preset("P2".into());
        assert!(matches!(run_simulation(&c), Err(Error::Config(_))));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = preset("sim2d").unwrap();
        assert_eq!(SimulationConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
    }
}
