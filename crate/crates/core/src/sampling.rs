//! Edge samplers: draw `A` with independent entries and `E[A] = Ω`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{stream, tags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeLaw {
    Bernoulli,
    Normal,
    Signed,
    Poisson,
}

impl EdgeLaw {
    pub fn name(self) -> &'static str {
        match self {
            EdgeLaw::Bernoulli => "bernoulli",
            EdgeLaw::Normal => "normal",
            EdgeLaw::Signed => "signed",
            EdgeLaw::Poisson => "poisson",
        }
    }

    /// Admissible mean values, for error messages.
    pub fn interval(self) -> &'static str {
        match self {
            EdgeLaw::Bernoulli => "[0, 1]",
            EdgeLaw::Normal => "(-inf, inf)",
            EdgeLaw::Signed => "[-1, 1]",
            EdgeLaw::Poisson => "[0, inf)",
        }
    }

    fn admits(self, omega: f64) -> bool {
        match self {
            EdgeLaw::Bernoulli => (0.0..=1.0).contains(&omega),
            EdgeLaw::Normal => omega.is_finite(),
            EdgeLaw::Signed => (-1.0..=1.0).contains(&omega),
            EdgeLaw::Poisson => omega >= 0.0 && omega.is_finite(),
        }
    }
}

impl fmt::Display for EdgeLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EdgeLaw {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bernoulli" => Ok(EdgeLaw::Bernoulli),
            "normal" | "gaussian" => Ok(EdgeLaw::Normal),
            "signed" => Ok(EdgeLaw::Signed),
            "poisson" => Ok(EdgeLaw::Poisson),
            other => Err(Error::Config(format!("unknown edge distribution {other:?}"))),
        }
    }
}

/// Edge law plus its parameters. `sigma2` is the Normal variance and must be
/// present exactly when `kind` is Normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub kind: EdgeLaw,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

impl DistributionSpec {
    pub fn bernoulli() -> Self {
        DistributionSpec {
            kind: EdgeLaw::Bernoulli,
            sigma2: None,
        }
    }

    pub fn normal(sigma2: f64) -> Self {
        DistributionSpec {
            kind: EdgeLaw::Normal,
            sigma2: Some(sigma2),
        }
    }

    pub fn signed() -> Self {
        DistributionSpec {
            kind: EdgeLaw::Signed,
            sigma2: None,
        }
    }

    pub fn poisson() -> Self {
        DistributionSpec {
            kind: EdgeLaw::Poisson,
            sigma2: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.sigma2) {
            (EdgeLaw::Normal, Some(s)) if s > 0.0 && s.is_finite() => Ok(()),
            (EdgeLaw::Normal, Some(s)) => Err(Error::Config(format!(
                "normal variance must be positive and finite (found {s})"
            ))),
            (EdgeLaw::Normal, None) => Err(Error::Config("normal law needs `sigma2`".into())),
            (law, Some(_)) => Err(Error::Config(format!("`sigma2` is only valid for normal, not {law}"))),
            (_, None) => Ok(()),
        }
    }

    /// First entry of `omega` outside the admissible range, if any.
    pub fn check_range(&self, omega: &Matrix) -> Result<()> {
        for i in 0..omega.rows() {
            for (j, &v) in omega.row(i).iter().enumerate() {
                if !self.kind.admits(v) {
                    return Err(Error::Domain {
                        row: i,
                        col: j,
                        value: v,
                        interval: self.kind.interval(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Exact variance of one entry with mean `omega`.
    pub fn variance(&self, omega: f64) -> f64 {
        match self.kind {
            EdgeLaw::Bernoulli => omega * (1.0 - omega),
            EdgeLaw::Normal => self.sigma2.unwrap_or(f64::NAN),
            EdgeLaw::Signed => 1.0 - omega * omega,
            EdgeLaw::Poisson => omega,
        }
    }
}

/// Variance of one entry and its contribution to `γ` (variance divided by
/// `ρ` or by `θ_r(i)θ_c(j)`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub variance: f64,
    pub gamma_contribution: f64,
}

pub fn distribution_moments(dist: &DistributionSpec, omega: f64, scale: f64) -> Result<Moments> {
    dist.validate()?;
    if !dist.kind.admits(omega) {
        return Err(Error::Domain {
            row: 0,
            col: 0,
            value: omega,
            interval: dist.kind.interval(),
        });
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Precondition(format!("scale must be positive (found {scale})")));
    }
    let variance = dist.variance(omega);
    Ok(Moments {
        variance,
        gamma_contribution: variance / scale,
    })
}

/// Draws `A` entrywise from the law with mean `Ω(i, j)`.
///
/// Row `i` uses its own generator derived from `(seed, i)`, so rows may be
/// filled in parallel without changing the result.
pub fn sample_adjacency(omega: &Matrix, dist: &DistributionSpec, seed: u64) -> Result<Matrix> {
    dist.validate()?;
    dist.check_range(omega)?;
    let cols = omega.cols();
    let mut data = vec![0.0; omega.rows() * cols];
    let sd = dist.sigma2.map(f64::sqrt).unwrap_or(0.0);
    data.par_chunks_mut(cols.max(1))
        .enumerate()
        .for_each(|(i, out)| {
            let mut rng = stream(seed, tags::ADJACENCY_ROW, i as u64);
            for (o, &w) in out.iter_mut().zip(omega.row(i)) {
                *o = draw(dist.kind, w, sd, &mut rng);
            }
        });
    Matrix::from_vec(omega.rows(), cols, data)
}

fn draw<R: Rng>(law: EdgeLaw, omega: f64, sd: f64, rng: &mut R) -> f64 {
    match law {
        EdgeLaw::Bernoulli => f64::from(rng.random::<f64>() < omega),
        EdgeLaw::Normal => Normal::new(omega, sd).expect("sd > 0").sample(rng),
        EdgeLaw::Signed => {
            if rng.random::<f64>() < 0.5 * (1.0 + omega) {
                1.0
            } else {
                -1.0
            }
        }
        EdgeLaw::Poisson => {
            if omega == 0.0 {
                0.0
            } else {
                Poisson::new(omega).expect("lambda > 0").sample(rng)
            }
        }
    }
}
