//! Exact β-piece extraction for the parametrically divisible families.
//!
//! The β-piece of X is the law whose log-Laplace transform is β·ψ_X. For
//! the families below it stays in the same family:
//!
//! | family               | β-piece                 |
//! |----------------------|-------------------------|
//! | Gamma(α, s)          | Gamma(βα, s)            |
//! | Gaussian(μ, σ²)      | Gaussian(βμ, βσ²)       |
//! | Poisson(λ)           | Poisson(βλ)             |
//! | CompoundPoisson(λ,D) | CompoundPoisson(βλ, D)  |
//! | NegBinomial(r, p)    | NegBinomial(βr, p)      |
//! | GGC(ν)               | GGC(βν)                 |
//!
//! Pareto and LogNormal are divisible but have no parametric pieces; they
//! must be replaced by a fitted approximant first.

use alloc::format;
use alloc::vec::Vec;

use crate::distributions::{
    CompoundPoissonParams, Distribution, GammaParams, GaussianParams, NegativeBinomialParams, PoissonParams,
};
use crate::{Error, Result};

/// A piece size β ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PieceWeight(f64);

impl PieceWeight {
    pub fn new(beta: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&beta) {
            Ok(Self(beta))
        } else {
            Err(Error::Domain(format!("piece weight must lie in [0, 1], got {beta}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

/// Weights of a split of one law into independent pieces; they sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecePartition {
    weights: Vec<PieceWeight>,
}

impl PiecePartition {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(weights: impl IntoIterator<Item = f64>) -> Result<Self> {
        let weights = weights.into_iter().map(PieceWeight::new).collect::<Result<Vec<_>>>()?;
        if weights.is_empty() {
            return Err(Error::InvalidPartition("no weights".into()));
        }
        let sum: f64 = weights.iter().map(|w| w.0).sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::InvalidPartition(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { weights })
    }

    /// n equal weights 1/n.
    pub fn equal(n: usize) -> Result<Self> {
        Self::new(core::iter::repeat_n(1.0 / n as f64, n))
    }

    pub fn weights(&self) -> &[PieceWeight] {
        &self.weights
    }
}

/// True when the pieces of `d` have a known parametric form.
pub fn is_parametrically_divisible(d: &Distribution) -> bool {
    !matches!(d, Distribution::Pareto(_) | Distribution::LogNormal(_))
}

/// The β-piece of `d`.
pub fn piece(d: &Distribution, w: PieceWeight) -> Result<Distribution> {
    if !is_parametrically_divisible(d) {
        return Err(Error::NotParametricallyDivisible(d.family()));
    }
    let beta = w.get();
    if beta == 0.0 {
        return Ok(Distribution::DegenerateZero);
    }
    if beta == 1.0 {
        return Ok(d.clone());
    }
    // A positive parameter times β can still underflow; that piece is 0.
    let zero_if_underflow = |r: Result<Distribution>| match r {
        Err(Error::InvalidParameter(_)) => Ok(Distribution::DegenerateZero),
        other => other,
    };
    match d {
        Distribution::DegenerateZero => Ok(Distribution::DegenerateZero),
        Distribution::Gamma(g) => {
            zero_if_underflow(GammaParams::new(beta * g.shape(), g.scale()).map(Distribution::Gamma))
        }
        Distribution::Gaussian(g) => zero_if_underflow(
            GaussianParams::new(beta * g.mean(), beta * g.variance()).map(Distribution::Gaussian),
        ),
        Distribution::Poisson(p) => zero_if_underflow(PoissonParams::new(beta * p.rate()).map(Distribution::Poisson)),
        Distribution::CompoundPoisson(cp) => zero_if_underflow(
            CompoundPoissonParams::new(beta * cp.rate(), cp.severity().clone()).map(Distribution::CompoundPoisson),
        ),
        Distribution::NegativeBinomial(nb) => zero_if_underflow(
            NegativeBinomialParams::new(beta * nb.size(), nb.prob()).map(Distribution::NegativeBinomial),
        ),
        Distribution::GammaConvolution(m) => {
            let scaled = m.scaled(beta);
            if scaled.is_empty() {
                Ok(Distribution::DegenerateZero)
            } else {
                Ok(Distribution::GammaConvolution(scaled))
            }
        }
        Distribution::Pareto(_) | Distribution::LogNormal(_) => unreachable!("checked above"),
    }
}

/// One piece per weight; the pieces' transforms add up to ψ_d.
pub fn partition(d: &Distribution, p: &PiecePartition) -> Result<Vec<Distribution>> {
    p.weights().iter().map(|&w| piece(d, w)).collect()
}
