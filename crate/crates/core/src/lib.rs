//! Parametric divisibility of positive loss distributions.
//!
//! A distribution is divisible when its β-piece (the law whose log-Laplace
//! transform is β times the original one) exists. For the Gamma family and
//! finite Gamma convolutions the pieces stay in the family, which makes the
//! additive risk factor model
//!
//! ```text
//! X_i = Σ_j Q_{i,j}(U_j),   Q_{i,j} the quantile of the β_{i,j}-piece of X_i
//! ```
//!
//! cheap to sample. This crate holds the numerical core:
//!
//! - [`distributions`]: the supported families with transforms, quantiles and samplers,
//! - [`divisibility`]: exact piece extraction,
//! - [`fitting`]: Gamma and Gamma-convolution approximants of arbitrary positive laws,
//! - [`riskfactor`]: the risk factor model and its sampler,
//! - [`diagnostics`]: QQ tables, kernel densities, ranks, KS and Kendall's τ.
//!
//! The crate is `no_std` and only needs `alloc`. File formats and the
//! command line live in the `divisim` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
mod math;
pub mod quadrature;
pub mod special;

pub mod diagnostics;
pub mod distributions;
pub mod divisibility;
pub mod fitting;
pub mod riskfactor;

pub use error::{Error, Result};

pub use diagnostics::{KdeCurve, QqRow, QqTable};
pub use distributions::{
    CompoundPoissonParams, Distribution, GammaParams, GaussianParams, LogNormalParams,
    NegativeBinomialParams, ParetoParams, PoissonParams, ThorinAtomicMeasure,
};
pub use divisibility::{PiecePartition, PieceWeight};
pub use fitting::{FitReport, GgcOptions, LaplaceGrid, ShiftedMoments};
pub use riskfactor::{BetaMatrix, MarginalReinjection, ModelSample, PieceSample, RiskFactorModel, SampleMatrix};
