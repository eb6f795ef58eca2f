//! Posterior model probabilities, rankings, and tie reports.
//!
//! Every scoring method produces one log Bayes factor per model against the
//! full model as the common base; a model prior turns those into posterior
//! probabilities by log-sum-exp normalization. [`select`] runs the whole
//! pipeline over an enumerated (or custom) model set and returns a
//! [`SelectionReport`] with per-model records, a ranking per method, and
//! flagged near-ties.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    integral_spec_from_fit, log_bf_bic, log_bf_laplace, log_integral_j,
    log_integral_laplace_exact, GPriorSpec, Method, Variant, DEFAULT_REL_TOL,
};
use crate::error::{Error, Result};
use crate::regression::{
    enumerate_models, fit_models, fit_submodel, Dataset, FitSummary, ModelId,
    DEFAULT_ENUMERATION_CAP,
};

/// Posterior gap below which two adjacently ranked models are reported as a
/// near-tie instead of silently ordered. Pairs whose posteriors are both
/// below this mass are not flagged: the zero tail of a large model space
/// would otherwise drown the report in meaningless pairs.
pub const TIE_EPSILON: f64 = 1e-6;

// =============================================================================
// Model priors
// =============================================================================

/// Prior distribution over candidate models.
#[derive(Debug, Clone)]
pub enum ModelPrior {
    /// Equal mass on every non-null subset; the null model has prior zero.
    /// The default, and the only prior compatible with scoring methods that
    /// are undefined at the null model.
    UniformNonNull,
    /// Equal mass on every subset including the null model.
    UniformAll,
    /// Explicit non-negative weights summing to one over their support.
    Custom(BTreeMap<ModelId, f64>),
}

impl ModelPrior {
    /// Short stable label for reports.
    pub fn label(&self) -> &'static str {
        match self {
            ModelPrior::UniformNonNull => "uniform-nonnull",
            ModelPrior::UniformAll => "uniform-all",
            ModelPrior::Custom(_) => "custom",
        }
    }

    /// Whether the prior puts positive mass on the null model.
    pub fn admits_null(&self) -> bool {
        match self {
            ModelPrior::UniformNonNull => false,
            ModelPrior::UniformAll => true,
            ModelPrior::Custom(weights) => {
                weights.get(&ModelId::NULL).is_some_and(|w| *w > 0.0)
            }
        }
    }
}

// Validates a custom weight table: non-negative finite weights that sum to
// one within 1e-9.
fn validate_custom_weights(weights: &BTreeMap<ModelId, f64>) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    let mut sum = 0.0;
    for (model, weight) in weights {
        if !weight.is_finite() || *weight < 0.0 {
            return Err(Error::NegativeWeight {
                model: model.to_string(),
                weight: *weight,
            });
        }
        sum += *weight;
    }
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::DomainError {
            reason: format!("custom prior weights sum to {sum}, expected 1"),
        });
    }
    Ok(())
}

// =============================================================================
// Posterior probabilities
// =============================================================================

/// Turns per-model log Bayes factors (all against the same base model) into
/// posterior model probabilities under `prior`.
///
/// Computed as `p = pi exp(l - m) / sum pi exp(l - m)` with `m` the largest
/// log score, so the normalization never overflows. Models with zero prior
/// mass (the null model under [`ModelPrior::UniformNonNull`], or zero-weight
/// entries of a custom prior) receive posterior exactly zero.
pub fn posterior_probabilities(
    log_bfs: &BTreeMap<ModelId, f64>,
    prior: &ModelPrior,
) -> Result<BTreeMap<ModelId, f64>> {
    if log_bfs.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    for (model, value) in log_bfs {
        if !value.is_finite() {
            return Err(Error::DomainError {
                reason: format!("log Bayes factor of model {model} is {value}"),
            });
        }
    }
    let weight_of = |model: &ModelId| -> Result<f64> {
        Ok(match prior {
            ModelPrior::UniformNonNull => {
                if model.is_null() {
                    0.0
                } else {
                    1.0
                }
            }
            ModelPrior::UniformAll => 1.0,
            ModelPrior::Custom(weights) => *weights.get(model).ok_or(Error::DomainError {
                reason: format!("custom prior has no weight for model {model}"),
            })?,
        })
    };
    if let ModelPrior::Custom(weights) = prior {
        validate_custom_weights(weights)?;
        for (model, weight) in weights {
            if *weight > 0.0 && !log_bfs.contains_key(model) {
                return Err(Error::DomainError {
                    reason: format!(
                        "custom prior puts mass {weight} on model {model}, which has no score"
                    ),
                });
            }
        }
    }

    // Log-weighted scores over the support.
    let mut support: Vec<(ModelId, f64)> = Vec::with_capacity(log_bfs.len());
    for (model, value) in log_bfs {
        let w = weight_of(model)?;
        if w > 0.0 {
            support.push((*model, w.ln() + value));
        }
    }
    if support.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    let shift = support
        .iter()
        .map(|(_, s)| *s)
        .fold(f64::NEG_INFINITY, f64::max);
    let denom: f64 = support.iter().map(|(_, s)| (s - shift).exp()).sum();

    let mut posterior: BTreeMap<ModelId, f64> =
        log_bfs.keys().map(|model| (*model, 0.0)).collect();
    for (model, score) in support {
        posterior.insert(model, (score - shift).exp() / denom);
    }
    Ok(posterior)
}

// =============================================================================
// Selection reports
// =============================================================================

/// Configuration echo attached to every report.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionMeta {
    /// Number of observations.
    pub n: usize,
    /// Number of candidate predictors.
    pub p: usize,
    /// Prior tail exponent.
    pub nu: f64,
    /// Prior sharpness exponent at g = 0.
    pub k: f64,
    /// Intercept-handling variant.
    pub variant: Variant,
    /// Scoring methods, in request order.
    pub methods: Vec<Method>,
    /// Model prior label.
    pub prior: String,
    /// Quadrature relative tolerance used by the exact method.
    pub rel_tol: f64,
}

/// One scored model.
#[derive(Debug, Clone, Serialize)]
pub struct ModelRecord {
    /// Model identifier (predictor bitmask).
    pub model: ModelId,
    /// Names of the active predictors.
    pub vars: Vec<String>,
    /// Number of active predictors.
    pub q: usize,
    /// Centered coefficient of determination.
    pub r2: f64,
    /// Zero-intercept coefficient of determination.
    pub r2_check: f64,
    /// Log Bayes factor against the full model, per method.
    pub log_bf: BTreeMap<Method, f64>,
    /// Posterior model probability, per method.
    pub posterior: BTreeMap<Method, f64>,
}

/// Full output of a model-selection run.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionReport {
    /// Configuration echo.
    pub meta: SelectionMeta,
    /// Per-model records in ascending mask order.
    pub records: Vec<ModelRecord>,
    /// Models sorted by posterior (descending; ties by ascending mask),
    /// per method.
    pub rankings: BTreeMap<Method, Vec<ModelId>>,
    /// Adjacent ranked pairs whose posteriors differ by less than
    /// [`TIE_EPSILON`] (both above that mass), per method.
    pub ties: BTreeMap<Method, Vec<(ModelId, ModelId)>>,
}

impl SelectionReport {
    /// The top-ranked model for `method`, if that method was requested.
    pub fn top_model(&self, method: Method) -> Option<ModelId> {
        self.rankings.get(&method).and_then(|r| r.first().copied())
    }
}

// Posterior-descending ranking with ascending-mask tie-break.
fn ranked(posterior: &BTreeMap<ModelId, f64>) -> Vec<ModelId> {
    let mut models: Vec<ModelId> = posterior.keys().copied().collect();
    models.sort_by(|a, b| {
        posterior[b]
            .partial_cmp(&posterior[a])
            .expect("posteriors are finite")
            .then(a.0.cmp(&b.0))
    });
    models
}

// Flags adjacent near-ties in a ranking.
fn near_ties(
    ranking: &[ModelId],
    posterior: &BTreeMap<ModelId, f64>,
) -> Vec<(ModelId, ModelId)> {
    let mut ties = Vec::new();
    for pair in ranking.windows(2) {
        let (pa, pb) = (posterior[&pair[0]], posterior[&pair[1]]);
        if (pa - pb).abs() < TIE_EPSILON && pa >= TIE_EPSILON && pb >= TIE_EPSILON {
            ties.push((pair[0], pair[1]));
        }
    }
    ties
}

/// Scores every admissible model with every requested method and assembles
/// the posterior report. Equivalent to [`select_with_options`] at the
/// default quadrature tolerance and enumeration cap.
pub fn select(
    data: &Dataset,
    spec: &GPriorSpec,
    methods: &[Method],
    prior: &ModelPrior,
) -> Result<SelectionReport> {
    select_with_options(data, spec, methods, prior, DEFAULT_REL_TOL, DEFAULT_ENUMERATION_CAP)
}

/// [`select`] with explicit quadrature tolerance and enumeration cap.
///
/// The admissible model set is every subset of the predictors (null model
/// included exactly when the prior admits it) for the uniform priors, or
/// the positive-weight support of a custom prior. Methods that require a
/// positive centered R-squared are rejected up front with
/// [`Error::NullModelForbidden`] when the admissible set contains the null
/// model under the centered variant, rather than failing midway through.
pub fn select_with_options(
    data: &Dataset,
    spec: &GPriorSpec,
    methods: &[Method],
    prior: &ModelPrior,
    rel_tol: f64,
    cap: usize,
) -> Result<SelectionReport> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::DomainError {
            reason: "at least one scoring method is required".to_string(),
        });
    }
    let mut requested: Vec<Method> = Vec::new();
    for &m in methods {
        if !requested.contains(&m) {
            requested.push(m);
        }
    }
    if requested.contains(&Method::LaplacePhi) && spec.variant == Variant::Check {
        return Err(Error::DomainError {
            reason: "the laplace method is defined for the centered variant only".to_string(),
        });
    }

    let models: Vec<ModelId> = match prior {
        ModelPrior::UniformNonNull => enumerate_models(data.p(), false, cap)?,
        ModelPrior::UniformAll => enumerate_models(data.p(), true, cap)?,
        ModelPrior::Custom(weights) => {
            validate_custom_weights(weights)?;
            let full = ModelId::full(data.p());
            for model in weights.keys() {
                if !full.is_superset_of(*model) {
                    return Err(Error::DomainError {
                        reason: format!(
                            "custom prior model {model} references predictors beyond p = {}",
                            data.p()
                        ),
                    });
                }
            }
            weights
                .iter()
                .filter(|(_, w)| **w > 0.0)
                .map(|(m, _)| *m)
                .collect()
        }
    };
    if models.is_empty() {
        return Err(Error::EmptyModelSet);
    }
    let needs_positive_r2 = requested.iter().any(|m| {
        matches!(
            m,
            Method::ExactQuadrature | Method::LaplacePhi | Method::LaplaceExactMode
        )
    });
    if spec.variant == Variant::Centered
        && needs_positive_r2
        && models.iter().any(|m| m.is_null())
    {
        return Err(Error::NullModelForbidden);
    }

    let fits = fit_models(data, &models)?;
    let full = ModelId::full(data.p());
    let full_fit = match fits.iter().find(|f| f.model == full) {
        Some(fit) => fit.clone(),
        None => fit_submodel(data, full)?,
    };

    let mut log_bf_by_method: BTreeMap<Method, BTreeMap<ModelId, f64>> = BTreeMap::new();
    for &method in &requested {
        let scored: Result<Vec<(ModelId, f64)>> = match method {
            Method::Bic => fits
                .iter()
                .map(|f| Ok((f.model, log_bf_bic(f, &full_fit, data.n(), data.p())?.value)))
                .collect(),
            Method::LaplacePhi => fits
                .iter()
                .map(|f| {
                    Ok((
                        f.model,
                        log_bf_laplace(f, &full_fit, data.n(), data.p(), spec.nu)?.value,
                    ))
                })
                .collect(),
            Method::ExactQuadrature => {
                let base_spec = integral_spec_from_fit(&full_fit, data.n(), spec)?;
                let base = log_integral_j(&base_spec, rel_tol)?;
                fits.par_iter()
                    .map(|f: &FitSummary| {
                        let model_spec = integral_spec_from_fit(f, data.n(), spec)?;
                        Ok((f.model, log_integral_j(&model_spec, rel_tol)? - base))
                    })
                    .collect()
            }
            Method::LaplaceExactMode => {
                let base_spec = integral_spec_from_fit(&full_fit, data.n(), spec)?;
                let base = log_integral_laplace_exact(&base_spec)?;
                fits.par_iter()
                    .map(|f: &FitSummary| {
                        let model_spec = integral_spec_from_fit(f, data.n(), spec)?;
                        Ok((f.model, log_integral_laplace_exact(&model_spec)? - base))
                    })
                    .collect()
            }
        };
        log_bf_by_method.insert(method, scored?.into_iter().collect());
    }

    let mut posterior_by_method: BTreeMap<Method, BTreeMap<ModelId, f64>> = BTreeMap::new();
    let mut rankings: BTreeMap<Method, Vec<ModelId>> = BTreeMap::new();
    let mut ties: BTreeMap<Method, Vec<(ModelId, ModelId)>> = BTreeMap::new();
    for &method in &requested {
        let posterior = posterior_probabilities(&log_bf_by_method[&method], prior)?;
        let ranking = ranked(&posterior);
        ties.insert(method, near_ties(&ranking, &posterior));
        rankings.insert(method, ranking);
        posterior_by_method.insert(method, posterior);
    }

    let records: Vec<ModelRecord> = fits
        .iter()
        .map(|f| ModelRecord {
            model: f.model,
            vars: f
                .model
                .indices()
                .iter()
                .map(|&i| data.names()[i - 1].clone())
                .collect(),
            q: f.q,
            r2: f.r2,
            r2_check: f.r2_check,
            log_bf: requested
                .iter()
                .map(|m| (*m, log_bf_by_method[m][&f.model]))
                .collect(),
            posterior: requested
                .iter()
                .map(|m| (*m, posterior_by_method[m][&f.model]))
                .collect(),
        })
        .collect();

    Ok(SelectionReport {
        meta: SelectionMeta {
            n: data.n(),
            p: data.p(),
            nu: spec.nu,
            k: spec.k,
            variant: spec.variant,
            methods: requested,
            prior: prior.label().to_string(),
            rel_tol,
        },
        records,
        rankings,
        ties,
    })
}

// =============================================================================
// Tests
// =============================================================================
