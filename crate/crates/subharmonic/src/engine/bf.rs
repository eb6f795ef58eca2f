//! Exact Bayes factors of fitted submodels against the full model.
//!
//! These functions bridge the regression layer and the integral engine:
//! each [`FitSummary`] is turned into an [`IntegralSpec`] under the chosen
//! prior configuration, and the log Bayes factor is the difference of the
//! two log integrals. Under the centered variant the null model has
//! `R^2 = 0`, which collapses the numerator integral; it is rejected up
//! front as [`Error::NullModelForbidden`]. The check variant replaces
//! `R^2` with the uncentered ratio `1 - RSS / ||y||^2`, which is positive
//! for the null model too, so the null model is admitted there.

use crate::error::{Error, Result};
use crate::regression::FitSummary;

use super::laplace::log_integral_laplace_exact;
use super::quadrature::log_integral_j;
use super::{GPriorSpec, IntegralSpec, LogBayesFactor, Method, Variant, DEFAULT_REL_TOL};

/// Builds the integral specification for one fitted model under `gspec`.
pub(crate) fn integral_spec_from_fit(
    fit: &FitSummary,
    n: usize,
    gspec: &GPriorSpec,
) -> Result<IntegralSpec> {
    gspec.validate()?;
    let spec = match gspec.variant {
        Variant::Centered => {
            if fit.q == 0 || fit.r2 <= 0.0 {
                return Err(Error::NullModelForbidden);
            }
            let r = 1.0 - fit.r2;
            if r <= 0.0 {
                return Err(Error::PerfectFit {
                    model: fit.model.to_string(),
                });
            }
            IntegralSpec::centered(n, fit.q, r, gspec.nu, gspec.k)
        }
        Variant::Check => {
            let r = 1.0 - fit.r2_check;
            if r <= 0.0 {
                return Err(Error::PerfectFit {
                    model: fit.model.to_string(),
                });
            }
            IntegralSpec::check(n, fit.q, r, gspec.nu, gspec.k)
        }
    };
    spec.validate()?;
    Ok(spec)
}

/// Exact log Bayes factor of `fit_g` against `fit_f` by adaptive
/// quadrature at `rel_tol`.
pub fn log_bf_exact_with_tol(
    fit_g: &FitSummary,
    fit_f: &FitSummary,
    n: usize,
    gspec: &GPriorSpec,
    rel_tol: f64,
) -> Result<LogBayesFactor> {
    let spec_g = integral_spec_from_fit(fit_g, n, gspec)?;
    let spec_f = integral_spec_from_fit(fit_f, n, gspec)?;
    let value = log_integral_j(&spec_g, rel_tol)? - log_integral_j(&spec_f, rel_tol)?;
    Ok(LogBayesFactor {
        value,
        method: Method::ExactQuadrature,
    })
}

/// Exact log Bayes factor at the default quadrature tolerance.
pub fn log_bf_exact(
    fit_g: &FitSummary,
    fit_f: &FitSummary,
    n: usize,
    gspec: &GPriorSpec,
) -> Result<LogBayesFactor> {
    log_bf_exact_with_tol(fit_g, fit_f, n, gspec, DEFAULT_REL_TOL)
}

/// Log Bayes factor with each integral replaced by its exact-mode Laplace
/// approximation; the sharper of the two closed approximations at small n.
pub fn log_bf_exact_mode(
    fit_g: &FitSummary,
    fit_f: &FitSummary,
    n: usize,
    gspec: &GPriorSpec,
) -> Result<LogBayesFactor> {
    let spec_g = integral_spec_from_fit(fit_g, n, gspec)?;
    let spec_f = integral_spec_from_fit(fit_f, n, gspec)?;
    let value = log_integral_laplace_exact(&spec_g)? - log_integral_laplace_exact(&spec_f)?;
    Ok(LogBayesFactor {
        value,
        method: Method::LaplaceExactMode,
    })
}

// =============================================================================
// Tests
// =============================================================================
