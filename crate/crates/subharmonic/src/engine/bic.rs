//! The BIC-style Bayes factor.
//!
//! The Schwarz approximation of the Bayes factor of a submodel `gamma`
//! against the full model depends only on the two coefficients of
//! determination and the dimension counts:
//!
//! ```text
//! log BF = (1/2) [ -n log(1 - R2_gamma) - q_gamma log n
//!                  + n log(1 - R2_full) + p log n ]
//! ```
//!
//! It is the common baseline every other method in this crate is compared
//! against, and the only one defined for the null model.

use crate::error::{Error, Result};
use crate::regression::FitSummary;

use super::{LogBayesFactor, Method};

/// BIC-style log Bayes factor of `fit_g` against the full model `fit_f`.
///
/// `n` is the number of observations and `p` the full model's predictor
/// count. A saturated fit (`R^2 = 1`) on either side has no finite value
/// and is rejected as [`Error::PerfectFit`]. The null model is permitted;
/// its `R^2` is zero and the first log term vanishes.
pub fn log_bf_bic(fit_g: &FitSummary, fit_f: &FitSummary, n: usize, p: usize) -> Result<LogBayesFactor> {
    for fit in [fit_g, fit_f] {
        if fit.r2 >= 1.0 {
            return Err(Error::PerfectFit {
                model: fit.model.to_string(),
            });
        }
    }
    let nf = n as f64;
    // Grouped so that a model compared against itself cancels exactly.
    let value = 0.5
        * (nf * ((-fit_f.r2).ln_1p() - (-fit_g.r2).ln_1p())
            + (p as f64 - fit_g.q as f64) * nf.ln());
    Ok(LogBayesFactor {
        value,
        method: Method::Bic,
    })
}

// =============================================================================
// Tests
// =============================================================================
