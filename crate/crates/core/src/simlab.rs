// SPDX-License-Identifier: MIT OR Apache-2.0

//! Three-cluster simulation scenarios and a Monte Carlo runner that scores
//! E-Divisive estimates against the known change points.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::divisive::{e_divisive, DivisiveConfig};
use crate::energy::TimeSeries;
use crate::error::{Error, Result};
use crate::eval::{adjusted_rand, rand_index, Partition};
use crate::rng;

const DATA_DOMAIN: u64 = 1;
const DETECT_DOMAIN: u64 = 2;

/// Distribution G of the middle cluster. The outer clusters are standard
/// normal in the scenario's dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// N(μ, 1).
    UniMean { mu: f64 },
    /// N(0, σ²).
    UniVariance { variance: f64 },
    /// Student t with ν degrees of freedom.
    UniTail { dof: f64 },
    /// N₂((μ, μ), I).
    BiMean { mu: f64 },
    /// N₂(0, Σ_ρ), unit variances and correlation ρ.
    BiCorrelation { rho: f64 },
    /// N_d(0, Σ): with `noise`, only coordinates 1 and 2 are correlated (ρ);
    /// without, every pair is.
    DimCorrelation { dim: usize, noise: bool, rho: f64 },
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UniMean { .. } => "uni-mean",
            Self::UniVariance { .. } => "uni-variance",
            Self::UniTail { .. } => "uni-tail",
            Self::BiMean { .. } => "bi-mean",
            Self::BiCorrelation { .. } => "bi-correlation",
            Self::DimCorrelation { .. } => "dim-correlation",
        }
    }

    pub fn param(&self) -> f64 {
        match *self {
            Self::UniMean { mu } | Self::BiMean { mu } => mu,
            Self::UniVariance { variance } => variance,
            Self::UniTail { dof } => dof,
            Self::BiCorrelation { rho } | Self::DimCorrelation { rho, .. } => rho,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Self::UniMean { .. } | Self::UniVariance { .. } | Self::UniTail { .. } => 1,
            Self::BiMean { .. } | Self::BiCorrelation { .. } => 2,
            Self::DimCorrelation { dim, .. } => dim,
        }
    }

    pub fn noise(&self) -> bool {
        matches!(self, Self::DimCorrelation { noise: true, .. })
    }

    fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::invalid(format!("{}: {what}", self.name())));
        match *self {
            Self::UniMean { mu } | Self::BiMean { mu } if !mu.is_finite() => bad("mean must be finite"),
            Self::UniVariance { variance } if !(variance > 0.0 && variance.is_finite()) => {
                bad("variance must be positive")
            }
            Self::UniTail { dof } if !(dof > 0.0 && dof.is_finite()) => {
                bad("degrees of freedom must be positive")
            }
            Self::BiCorrelation { rho } | Self::DimCorrelation { rho, .. } if rho.is_nan() || rho.abs() >= 1.0 => {
                bad("correlation must satisfy |rho| < 1")
            }
            Self::DimCorrelation { dim, .. } if dim < 2 => bad("dimension must be >= 2"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    /// Series length T, a multiple of 3.
    pub len: usize,
    pub seed: u64,
}

impl Scenario {
    pub fn new(kind: ScenarioKind, len: usize, seed: u64) -> Result<Self> {
        let s = Self { kind, len, seed };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.len == 0 || !self.len.is_multiple_of(3) {
            return Err(Error::invalid(format!(
                "series length must be a positive multiple of 3; got {}",
                self.len
            )));
        }
        self.kind.validate()
    }

    /// Change points at T/3 and 2T/3.
    pub fn truth(&self) -> Partition {
        let third = self.len / 3;
        Partition::new(vec![third, 2 * third], self.len).expect("valid thirds")
    }
}

/// Lower-triangular factor L with L Lᵀ = `cov` (row-major `d × d`).
pub fn cholesky(cov: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let v = cov[i * d + i] - s;
                if v <= 0.0 {
                    return Err(Error::invalid("covariance matrix is not positive definite"));
                }
                l[i * d + i] = v.sqrt();
            } else {
                l[i * d + j] = (cov[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    Ok(l)
}

fn correlation_matrix(d: usize, rho: f64, only_first_pair: bool) -> Vec<f64> {
    let mut cov = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            cov[i * d + j] = if i == j {
                1.0
            } else if !only_first_pair || (i < 2 && j < 2) {
                rho
            } else {
                0.0
            };
        }
    }
    cov
}

enum Middle {
    Shifted(f64),
    Scaled(f64),
    StudentT(ChiSquared<f64>, f64),
    Correlated(Vec<f64>),
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Draws the series and its true partition. Identical scenarios give
/// bit-identical series.
pub fn generate(scn: &Scenario) -> Result<(TimeSeries, Partition)> {
    scn.validate()?;
    let d = scn.kind.dim();
    let middle = match scn.kind {
        ScenarioKind::UniMean { mu } | ScenarioKind::BiMean { mu } => Middle::Shifted(mu),
        ScenarioKind::UniVariance { variance } => Middle::Scaled(variance.sqrt()),
        ScenarioKind::UniTail { dof } => Middle::StudentT(
            ChiSquared::new(dof).map_err(|e| Error::invalid(e.to_string()))?,
            dof,
        ),
        ScenarioKind::BiCorrelation { rho } => Middle::Correlated(cholesky(&correlation_matrix(2, rho, false), 2)?),
        ScenarioKind::DimCorrelation { dim, noise, rho } => {
            Middle::Correlated(cholesky(&correlation_matrix(dim, rho, noise), dim)?)
        }
    };

    let mut rng = rng::substream(scn.seed, 0, 0);
    let third = scn.len / 3;
    let mut data = Vec::with_capacity(scn.len * d);
    let mut z = vec![0.0; d];
    for t in 0..scn.len {
        z.iter_mut().for_each(|v| *v = normal(&mut rng));
        if t < third || t >= 2 * third {
            data.extend_from_slice(&z);
            continue;
        }
        match &middle {
            Middle::Shifted(mu) => data.extend(z.iter().map(|v| v + mu)),
            Middle::Scaled(sd) => data.extend(z.iter().map(|v| v * sd)),
            Middle::StudentT(chi, dof) => {
                let denom = (chi.sample(&mut rng) / dof).sqrt();
                data.extend(z.iter().map(|v| v / denom));
            }
            Middle::Correlated(l) => {
                for i in 0..d {
                    data.push((0..=i).map(|k| l[i * d + k] * z[k]).sum());
                }
            }
        }
    }
    Ok((TimeSeries::new(data, scn.len, d)?, scn.truth()))
}

/// Outcome of a single replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub data_seed: u64,
    pub change_points: Vec<usize>,
    pub rand: f64,
    pub adjusted_rand: f64,
    pub runtime_s: f64,
}

/// Aggregate over the replicates of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub scenario: String,
    pub param: f64,
    pub d: usize,
    pub noise: bool,
    #[serde(rename = "T")]
    pub len: usize,
    pub replications: usize,
    pub mean_rand: f64,
    /// Sample standard deviation of the replicate Rand indices over √reps;
    /// 0 for a single replicate.
    pub se_rand: f64,
    pub mean_adjusted_rand: f64,
    pub mean_change_points: f64,
    pub mean_runtime_s: f64,
    pub permutations: usize,
    pub significance: f64,
    pub min_size: usize,
    pub seed: u64,
    pub generator: String,
    #[serde(skip)]
    pub outcomes: Vec<ReplicateOutcome>,
}

/// Scenario of replicate `index` of a study seeded by `scn.seed`.
pub fn replicate_scenario(scn: &Scenario, index: usize) -> Scenario {
    Scenario {
        seed: rng::derive_seed(scn.seed, DATA_DOMAIN, index as u64),
        ..*scn
    }
}

fn run_replicate(scn: &Scenario, index: usize, detector: &DivisiveConfig) -> Result<ReplicateOutcome> {
    let rep = replicate_scenario(scn, index);
    let (series, truth) = generate(&rep)?;
    let cfg = DivisiveConfig {
        seed: rng::derive_seed(scn.seed, DETECT_DOMAIN, index as u64),
        ..detector.clone()
    };
    let start = Instant::now();
    let result = e_divisive(&series, &cfg)?;
    let runtime_s = start.elapsed().as_secs_f64();
    let est = &result.final_partition;
    Ok(ReplicateOutcome {
        data_seed: rep.seed,
        change_points: est.boundaries().to_vec(),
        rand: rand_index(&truth, est)?,
        adjusted_rand: adjusted_rand(&truth, est)?,
        runtime_s,
    })
}

fn mean(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.sum::<f64>() / n as f64
}

/// Runs `replications` independent replicates of `scn` through E-Divisive.
/// Replicates run in parallel; each draws from its own seed substream.
pub fn run_study(scn: &Scenario, replications: usize, detector: &DivisiveConfig) -> Result<StudyReport> {
    scn.validate()?;
    detector.validate()?;
    if replications == 0 {
        return Err(Error::invalid("replications must be >= 1"));
    }
    let outcomes: Vec<ReplicateOutcome> = (0..replications)
        .into_par_iter()
        .map(|i| run_replicate(scn, i, detector))
        .collect::<Result<_>>()?;

    let n = outcomes.len();
    let mean_rand = mean(outcomes.iter().map(|o| o.rand), n);
    let se_rand = if n > 1 {
        let var = outcomes.iter().map(|o| (o.rand - mean_rand).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(StudyReport {
        scenario: scn.kind.name().to_string(),
        param: scn.kind.param(),
        d: scn.kind.dim(),
        noise: scn.kind.noise(),
        len: scn.len,
        replications: n,
        mean_rand,
        se_rand,
        mean_adjusted_rand: mean(outcomes.iter().map(|o| o.adjusted_rand), n),
        mean_change_points: mean(outcomes.iter().map(|o| o.change_points.len() as f64), n),
        mean_runtime_s: mean(outcomes.iter().map(|o| o.runtime_s), n),
        permutations: detector.permutations,
        significance: detector.significance,
        min_size: detector.min_size,
        seed: scn.seed,
        generator: rng::GENERATOR_ID.to_string(),
        outcomes,
    })
}

/// Writes report rows as CSV with a header line.
pub fn write_csv<W: Write>(reports: &[StudyReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
