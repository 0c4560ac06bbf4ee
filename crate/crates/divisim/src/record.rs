//! JSON records for distributions, fit reports and model files.

use std::sync::Arc;

use divisim_core::{BetaMatrix, Distribution, FitReport, MarginalReinjection, RiskFactorModel};
use serde::{Deserialize, Serialize};

use crate::Error;

/// One distribution, tagged by `family`:
///
/// ```json
/// {"family": "gamma", "shape": 2.0, "scale": 3.0}
/// {"family": "ggc", "atoms": [[0.5, 1.0], [1.5, 10.0]]}
/// {"family": "compound_poisson", "rate": 3.0, "severity": {"family": "gamma", "shape": 1.0, "scale": 1.0}}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionRecord {
    Zero,
    Gamma { shape: f64, scale: f64 },
    Gaussian { mean: f64, variance: f64 },
    Poisson { rate: f64 },
    CompoundPoisson { rate: f64, severity: Box<DistributionRecord> },
    NegativeBinomial { size: f64, prob: f64 },
    /// Read-only alias for a negative binomial of size 1.
    #[serde(skip_serializing)]
    Geometric { prob: f64 },
    Pareto { shape: f64 },
    Lognormal { log_mean: f64, log_sd: f64 },
    Ggc { atoms: Vec<[f64; 2]> },
}

impl DistributionRecord {
    pub fn to_distribution(&self) -> Result<Distribution, Error> {
        let d = match self {
            Self::Zero => Distribution::DegenerateZero,
            Self::Gamma { shape, scale } => Distribution::gamma(*shape, *scale)?,
            Self::Gaussian { mean, variance } => Distribution::gaussian(*mean, *variance)?,
            Self::Poisson { rate } => Distribution::poisson(*rate)?,
            Self::CompoundPoisson { rate, severity } => Distribution::compound_poisson(*rate, severity.to_distribution()?)?,
            Self::NegativeBinomial { size, prob } => Distribution::negative_binomial(*size, *prob)?,
            Self::Geometric { prob } => Distribution::geometric(*prob)?,
            Self::Pareto { shape } => Distribution::pareto(*shape)?,
            Self::Lognormal { log_mean, log_sd } => Distribution::lognormal(*log_mean, *log_sd)?,
            Self::Ggc { atoms } => Distribution::gamma_convolution(atoms.iter().map(|a| (a[0], a[1])))?,
        };
        Ok(d)
    }
}

impl From<&Distribution> for DistributionRecord {
    fn from(d: &Distribution) -> Self {
        match d {
            Distribution::DegenerateZero => Self::Zero,
            Distribution::Gamma(p) => Self::Gamma { shape: p.shape(), scale: p.scale() },
            Distribution::Gaussian(p) => Self::Gaussian { mean: p.mean(), variance: p.variance() },
            Distribution::Poisson(p) => Self::Poisson { rate: p.rate() },
            Distribution::CompoundPoisson(p) => {
                Self::CompoundPoisson { rate: p.rate(), severity: Box::new(Self::from(Arc::as_ref(p.severity()))) }
            }
            Distribution::NegativeBinomial(p) => Self::NegativeBinomial { size: p.size(), prob: p.prob() },
            Distribution::Pareto(p) => Self::Pareto { shape: p.shape() },
            Distribution::LogNormal(p) => Self::Lognormal { log_mean: p.log_mean(), log_sd: p.log_sd() },
            Distribution::GammaConvolution(m) => Self::Ggc { atoms: m.atoms().iter().map(|&(a, s)| [a, s]).collect() },
        }
    }
}

pub fn parse_distribution(text: &str) -> Result<Distribution, Error> {
    let record: DistributionRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    record.to_distribution()
}

pub fn distribution_json(d: &Distribution) -> String {
    serde_json::to_string(&DistributionRecord::from(d)).expect("records always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReportRecord {
    pub fitted: DistributionRecord,
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub grid_used: Vec<f64>,
    pub objective_trace: Vec<f64>,
}

impl From<&FitReport> for FitReportRecord {
    fn from(r: &FitReport) -> Self {
        Self {
            fitted: DistributionRecord::from(&r.fitted),
            objective_value: r.objective_value,
            iterations: r.iterations,
            converged: r.converged,
            grid_used: r.grid_used.clone(),
            objective_trace: r.objective_trace.clone(),
        }
    }
}

/// Model file: marginals, the β matrix (rows = marginals, columns = factors)
/// and optional reinjection targets, one per marginal or null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelRecord {
    pub marginals: Vec<DistributionRecord>,
    pub beta: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reinject: Vec<Option<DistributionRecord>>,
}

/// A validated model file.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub model: RiskFactorModel,
    pub reinjection: MarginalReinjection,
}

impl ModelRecord {
    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<ModelSpec, Error> {
        let marginals = self
            .marginals
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_distribution().map_err(|e| e.context(format!("marginal {}", i + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        let beta = BetaMatrix::new(&self.beta)?;
        let model = RiskFactorModel::new(marginals, beta)?;
        let reinjection = if self.reinject.is_empty() {
            MarginalReinjection::default()
        } else {
            if self.reinject.len() != self.marginals.len() {
                return Err(Error::Parse(format!(
                    "reinject lists {} targets for {} marginals",
                    self.reinject.len(),
                    self.marginals.len()
                )));
            }
            let targets = self
                .reinject
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    r.as_ref()
                        .map(|r| r.to_distribution().map_err(|e| e.context(format!("reinject target {}", i + 1))))
                        .transpose()
                })
                .collect::<Result<Vec<_>, _>>()?;
            MarginalReinjection::new(targets)?
        };
        Ok(ModelSpec { model, reinjection })
    }
}

impl From<&ModelSpec> for ModelRecord {
    fn from(spec: &ModelSpec) -> Self {
        Self {
            marginals: spec.model.marginals().iter().map(DistributionRecord::from).collect(),
            beta: spec.model.beta().to_rows(),
            reinject: spec.reinjection.targets().iter().map(|t| t.as_ref().map(DistributionRecord::from)).collect(),
        }
    }
}
