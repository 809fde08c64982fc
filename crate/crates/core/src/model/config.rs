use serde::{Deserialize, Serialize};

use super::{
    sample_memberships, sample_theta_with_floor, BiDcdfmParams, BiDfmParams, MixingMatrix,
    ModelParams, DEFAULT_THETA_FLOOR,
};
use crate::error::{Error, Result};
use crate::membership::Membership;
use crate::rng::{derive_seed, tags};
use crate::sampling::DistributionSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bidfm,
    Bidcdfm,
}

/// `P` as a preset name (`"P1"`, `"P2"`) or explicit row-major rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixingSpec {
    Preset(String),
    Rows(Vec<Vec<f64>>),
}

impl MixingSpec {
    pub fn build(&self) -> Result<MixingMatrix> {
        match self {
            MixingSpec::Preset(name) => match name.to_ascii_uppercase().as_str() {
                "P1" => Ok(MixingMatrix::p1()),
                "P2" => Ok(MixingMatrix::p2()),
                other => Err(Error::Config(format!("unknown mixing preset {other:?}"))),
            },
            MixingSpec::Rows(rows) => MixingMatrix::from_rows(rows),
        }
    }
}

/// Degree weights: drawn as `√ρ · U(floor, 1)` or given explicitly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaConfig {
    Explicit { theta_r: Vec<f64>, theta_c: Vec<f64> },
    Generated { floor: f64 },
}

/// Model description as read from a TOML file.
///
/// ```toml
/// model = "bidcdfm"
/// n_r = 200
/// n_c = 300
/// k_r = 2
/// k_c = 3
/// rho = 0.5
/// p = "P1"            # or [[1.0, 0.2, 0.3], [0.3, 0.8, 0.2]]
/// seed = 7
/// theta = { floor = 0.05 }
/// distribution = { kind = "bernoulli" }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub n_r: usize,
    pub n_c: usize,
    pub k_r: usize,
    pub k_c: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    pub p: MixingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaConfig>,
    /// One-based explicit labels; drawn uniformly when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_labels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub col_labels: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
}

impl ModelConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Materializes memberships and weights, then validates.
    pub fn build(&self) -> Result<ModelParams> {
        let row = self.labels(self.row_labels.as_deref(), self.n_r, self.k_r, 0)?;
        let col = self.labels(self.col_labels.as_deref(), self.n_c, self.k_c, 1)?;
        let p = self.p.build()?;
        let params = match self.model {
            ModelKind::Bidfm => {
                let rho = self
                    .rho
                    .ok_or_else(|| Error::Config("bidfm needs `rho`".into()))?;
                ModelParams::Plain(BiDfmParams { row, col, p, rho })
            }
            ModelKind::Bidcdfm => {
                let (theta_r, theta_c) = match &self.theta {
                    Some(ThetaConfig::Explicit { theta_r, theta_c }) => {
                        (theta_r.clone(), theta_c.clone())
                    }
                    other => {
                        let floor = match other {
                            Some(ThetaConfig::Generated { floor }) => *floor,
                            _ => DEFAULT_THETA_FLOOR,
                        };
                        let rho = self.rho.ok_or_else(|| {
                            Error::Config("generated theta needs `rho`".into())
                        })?;
                        (
                            sample_theta_with_floor(self.n_r, rho, floor, derive_seed(self.seed, tags::THETA, 0))?,
                            sample_theta_with_floor(self.n_c, rho, floor, derive_seed(self.seed, tags::THETA, 1))?,
                        )
                    }
                };
                ModelParams::DegreeCorrected(BiDcdfmParams {
                    row,
                    col,
                    p,
                    theta_r,
                    theta_c,
                })
            }
        };
        params.check()?;
        Ok(params)
    }

    fn labels(&self, explicit: Option<&[usize]>, n: usize, k: usize, side: u64) -> Result<Membership> {
        match explicit {
            Some(labels) => {
                if labels.len() != n {
                    return Err(Error::Config(format!(
                        "expected {n} labels, found {}",
                        labels.len()
                    )));
                }
                Membership::from_one_based(labels, Some(k))
            }
            None => sample_memberships(n, k, derive_seed(self.seed, tags::MEMBERSHIP, side)),
        }
    }
}
