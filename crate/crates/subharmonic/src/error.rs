//! Unified error type for the library.
//!
//! Every fallible operation in the crate returns [`Error`]. Variants map
//! one-to-one onto the distinct failure modes of dataset preparation,
//! Bayes factor evaluation, posterior normalization, and the simulation
//! drivers, so callers can match on the condition they care about without
//! string inspection.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All error conditions raised by this crate.
#[derive(Debug, Clone, PartialEq, Error)]
#[non_exhaustive]
pub enum Error {
    /// A predictor column has zero variance and cannot be standardized.
    #[error("predictor column {0:?} is constant and cannot be scaled to unit norm")]
    ConstantColumn(String),

    /// The full design matrix does not have full column rank after centering.
    #[error("design matrix is rank deficient: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    /// Too few observations to fit and score the full model.
    #[error("{rows} rows are too few for {cols} predictors: need rows > cols + 1")]
    TooFewRows { rows: usize, cols: usize },

    /// A submodel's triangular factor is numerically singular.
    #[error("model {model} lost numerical rank in the QR solve (diagonal ratio {ratio:.3e})")]
    NumericalRankLoss { model: String, ratio: f64 },

    /// Exhaustive enumeration was requested over too many predictors.
    #[error("cannot enumerate all subsets of {p} predictors (cap is {cap})")]
    TooManyModels { p: usize, cap: usize },

    /// The mixture integral is infinite for the requested exponents.
    #[error("mixture integral diverges: {reason}")]
    DivergentIntegral { reason: String },

    /// Adaptive quadrature exceeded its refinement budget.
    #[error("quadrature did not converge: {reason}")]
    NonConvergent { reason: String },

    /// An argument fell outside the domain of the requested operation.
    #[error("domain error: {reason}")]
    DomainError { reason: String },

    /// The null model cannot be scored under the centered parameterization.
    #[error("the null model has no finite Bayes factor under the centered parameterization")]
    NullModelForbidden,

    /// A model fits exactly, so scale-based scores are undefined.
    #[error("model {model} fits exactly (R^2 = 1), so its Bayes factor is undefined")]
    PerfectFit { model: String },

    /// The requested norm moment is infinite for this error family.
    #[error("norm moment diverges: {reason}")]
    MomentDiverges { reason: String },

    /// The error family does not support the requested closed-form quantity.
    #[error("unsupported error family: {reason}")]
    UnsupportedFamily { reason: String },

    /// A posterior was requested over an empty model set.
    #[error("cannot normalize posterior probabilities over an empty model set")]
    EmptyModelSet,

    /// A custom prior assigned a negative weight to a model.
    #[error("model {model} has negative prior weight {weight}")]
    NegativeWeight { model: String, weight: f64 },
}

impl Error {
    /// Stable machine-readable code for this error, used by CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::ConstantColumn(_) => "ConstantColumn",
            Error::RankDeficient { .. } => "RankDeficient",
            Error::TooFewRows { .. } => "TooFewRows",
            Error::NumericalRankLoss { .. } => "NumericalRankLoss",
            Error::TooManyModels { .. } => "TooManyModels",
            Error::DivergentIntegral { .. } => "DivergentIntegral",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::DomainError { .. } => "DomainError",
            Error::NullModelForbidden => "NullModelForbidden",
            Error::PerfectFit { .. } => "PerfectFit",
            Error::MomentDiverges { .. } => "MomentDiverges",
            Error::UnsupportedFamily { .. } => "UnsupportedFamily",
            Error::EmptyModelSet => "EmptyModelSet",
            Error::NegativeWeight { .. } => "NegativeWeight",
        }
    }
}
