//! Bayes factor engine: the g-mixture integral, its Laplace approximations,
//! BIC factors, and error-model correction terms.
//!
//! # Background
//!
//! Every submodel score in this crate reduces to the one-dimensional integral
//!
//! ```text
//! J = integral over g in (0, inf) of
//!     g^(nu/2 - 1) (1 + 1/g)^(-k/2) (1 + g)^((n-q-1)/2) (1 + r g)^(-E) dg
//! ```
//!
//! where `r` is the complement of a model's coefficient of determination and
//! `E` is the outer exponent (`(n-1)/2` in the centered parameterization).
//! The log Bayes factor of a submodel against the full model is the
//! difference of two such log integrals. The integral is finite exactly when
//! `-k < nu < q` for the effective coefficient count `q`.
//!
//! # Implementation
//!
//! All arithmetic stays in the natural-log domain. The integrand is
//! transformed by `tau = log g`, whose log-integrand
//!
//! ```text
//! h(tau) = (nu/2) tau + A log(1+e^tau) - (k/2) log(1+e^-tau) - E log(1+r e^tau)
//! ```
//!
//! (with `A = (n-q-1)/2`) is smooth and unimodal, decaying with slope
//! `(nu+k)/2` on the left and `(q-nu)/2` on the right. Its mode has a closed
//! form as the positive root of a quadratic, which anchors both the adaptive
//! quadrature window and the Laplace approximations.

mod bf;
mod bic;
mod laplace;
mod moments;
mod quadrature;

pub(crate) use bf::integral_spec_from_fit;
pub use bf::{log_bf_exact, log_bf_exact_mode, log_bf_exact_with_tol};
pub use bic::log_bf_bic;
pub use laplace::{
    laplace_mode, log_bf_laplace, log_integral_laplace_exact, log_integral_laplace_phi, log_phi,
    phi, ModeSummary,
};
pub use moments::{
    bf_moment_correction, bic_scale_root, log_bic_correction, log_norm_moment, ErrorModel,
    MomentOracle,
};
pub use quadrature::log_integral_j;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::log1p_exp;

/// Default relative tolerance for the adaptive quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

// =============================================================================
// Public enums and small types
// =============================================================================

/// Intercept-handling variant for coefficient-of-determination scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Intercept absorbed by centering; scores use the centered R-squared and
    /// outer exponent `(n-1)/2`. The null model is not comparable.
    #[serde(rename = "centered")]
    Centered,
    /// Intercept counted as a coefficient; scores use the zero-intercept
    /// R-squared and outer exponent `n/2`. The null model is comparable.
    #[serde(rename = "check")]
    Check,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Centered => write!(f, "centered"),
            Variant::Check => write!(f, "check"),
        }
    }
}

/// Scoring method for a log Bayes factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Adaptive quadrature of the mixture integral.
    #[serde(rename = "exact")]
    ExactQuadrature,
    /// Closed-form large-n Laplace approximation (the `phi(s, r)` form).
    #[serde(rename = "laplace")]
    LaplacePhi,
    /// Laplace approximation at the exact integrand mode.
    #[serde(rename = "laplace-mode")]
    LaplaceExactMode,
    /// BIC-based factor.
    #[serde(rename = "bic")]
    Bic,
}

impl Method {
    /// Stable token used in CLI flags and report keys.
    pub fn token(&self) -> &'static str {
        match self {
            Method::ExactQuadrature => "exact",
            Method::LaplacePhi => "laplace",
            Method::LaplaceExactMode => "laplace-mode",
            Method::Bic => "bic",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Method::ExactQuadrature),
            "laplace" => Ok(Method::LaplacePhi),
            "laplace-mode" | "laplace_mode" => Ok(Method::LaplaceExactMode),
            "bic" => Ok(Method::Bic),
            other => Err(Error::DomainError {
                reason: format!(
                    "unknown method {other:?}; expected exact, laplace, laplace-mode, or bic"
                ),
            }),
        }
    }
}

/// A natural-log Bayes factor together with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogBayesFactor {
    /// Natural log of the Bayes factor of a submodel against the base model.
    pub value: f64,
    /// Method that produced the value.
    pub method: Method,
}

/// Hyper-parameters of the prior on g plus the intercept-handling variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GPriorSpec {
    /// Tail exponent of the mixing prior; the integral for a model with `q`
    /// active coefficients is finite only for `nu < q` (centered) or
    /// `nu < q + 1` (check variant).
    pub nu: f64,
    /// Non-negative sharpness parameter of the mixing prior at g = 0.
    pub k: f64,
    /// Intercept-handling variant.
    pub variant: Variant,
}

impl GPriorSpec {
    /// Builds a validated spec (`k >= 0`, both parameters finite).
    pub fn new(nu: f64, k: f64, variant: Variant) -> Result<GPriorSpec> {
        let spec = GPriorSpec { nu, k, variant };
        spec.validate()?;
        Ok(spec)
    }

    /// Checks the type invariants.
    pub fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() {
            return Err(Error::DomainError {
                reason: format!("nu must be finite, got {}", self.nu),
            });
        }
        if !self.k.is_finite() || self.k < 0.0 {
            return Err(Error::DomainError {
                reason: format!("k must be finite and non-negative, got {}", self.k),
            });
        }
        Ok(())
    }
}

// =============================================================================
// IntegralSpec
// =============================================================================

/// Fully determined parameters of one mixture integral.
///
/// `n`, `q`, and `outer_exponent_half` are stored in the *centered-form*
/// convention: `2 * outer_exponent_half = n - 1` and the right-tail decay
/// exponent is `q - nu`. The [`IntegralSpec::check`] constructor maps the
/// zero-intercept variant into this convention (the intercept becomes one
/// more fitted coefficient, so `n` and `q` each grow by one and the outer
/// exponent is `n_raw / 2`), which keeps `(n - q - 1)/2` and every formula
/// below identical across variants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralSpec {
    /// Effective observation count.
    pub n: usize,
    /// Effective coefficient count.
    pub q: usize,
    /// Complement of the coefficient of determination, in (0, 1].
    pub r: f64,
    /// Tail exponent of the mixing prior.
    pub nu: f64,
    /// Sharpness exponent of the mixing prior at g = 0 (`k >= 0`).
    pub k: f64,
    /// Outer exponent `E`: the power of `(1 + r g)` in the integrand.
    pub outer_exponent_half: f64,
}

impl IntegralSpec {
    /// Integral for the centered parameterization: `r = 1 - R^2`,
    /// outer exponent `(n - 1)/2`.
    pub fn centered(n: usize, q: usize, r: f64, nu: f64, k: f64) -> IntegralSpec {
        IntegralSpec {
            n,
            q,
            r,
            nu,
            k,
            outer_exponent_half: (n as f64 - 1.0) / 2.0,
        }
    }

    /// Integral for the zero-intercept (check) variant: `r = 1 - R_check^2`,
    /// outer exponent `n/2`, intercept counted as a coefficient.
    pub fn check(n: usize, q: usize, r: f64, nu: f64, k: f64) -> IntegralSpec {
        IntegralSpec {
            n: n + 1,
            q: q + 1,
            r,
            nu,
            k,
            outer_exponent_half: n as f64 / 2.0,
        }
    }

    /// Exponent `A = (n - q - 1)/2` of the `(1 + g)` factor.
    pub(crate) fn half_power_one_plus_g(&self) -> f64 {
        (self.n as f64 - self.q as f64 - 1.0) / 2.0
    }

    /// Right-tail decay exponent `s = 2(E - A) - nu`; equals `q - nu` for
    /// specs built by the named constructors.
    pub(crate) fn tail_exponent(&self) -> f64 {
        2.0 * (self.outer_exponent_half - self.half_power_one_plus_g()) - self.nu
    }

    /// Validates finiteness of the integral and the field domains.
    pub fn validate(&self) -> Result<()> {
        if self.q < 1 || self.n < self.q + 1 {
            return Err(Error::DomainError {
                reason: format!("need n >= q + 1 >= 2, got n = {}, q = {}", self.n, self.q),
            });
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::DomainError {
                reason: format!("r must lie in (0, 1], got {}", self.r),
            });
        }
        if !self.nu.is_finite() || !self.k.is_finite() || self.k < 0.0 {
            return Err(Error::DomainError {
                reason: format!("invalid exponents nu = {}, k = {}", self.nu, self.k),
            });
        }
        if !self.outer_exponent_half.is_finite() || self.outer_exponent_half <= 0.0 {
            return Err(Error::DomainError {
                reason: format!(
                    "outer exponent must be positive, got {}",
                    self.outer_exponent_half
                ),
            });
        }
        if self.nu >= self.q as f64 || self.tail_exponent() <= 0.0 {
            return Err(Error::DivergentIntegral {
                reason: format!(
                    "right tail does not decay: nu = {} with q = {} (needs nu < q)",
                    self.nu, self.q
                ),
            });
        }
        if self.nu <= -self.k {
            return Err(Error::DivergentIntegral {
                reason: format!(
                    "integrand not integrable at g = 0: nu = {} with k = {} (needs nu > -k)",
                    self.nu, self.k
                ),
            });
        }
        Ok(())
    }

    /// Log-integrand after the `tau = log g` substitution (the Jacobian is
    /// absorbed, shifting the first exponent from `nu/2 - 1` to `nu/2`).
    pub fn log_integrand(&self, tau: f64) -> f64 {
        let a = self.half_power_one_plus_g();
        0.5 * self.nu * tau + a * log1p_exp(tau) - 0.5 * self.k * log1p_exp(-tau)
            - self.outer_exponent_half * log1p_exp(tau + self.r.ln())
    }

    /// First derivative of the log-integrand in `tau`.
    pub fn d_log_integrand(&self, tau: f64) -> f64 {
        let a = self.half_power_one_plus_g();
        0.5 * self.nu + a * sigmoid(tau) + 0.5 * self.k * sigmoid(-tau)
            - self.outer_exponent_half * sigmoid(tau + self.r.ln())
    }

    /// Second derivative of the log-integrand in `tau`, as a function of
    /// `z = e^tau`. Strictly negative at the mode.
    pub fn d2_log_integrand_z(&self, z: f64) -> f64 {
        let a = self.half_power_one_plus_g();
        // z/(1+z)^2 and rz/(1+rz)^2, guarded against overflow in z^2.
        let u = (z / (1.0 + z)) / (1.0 + z);
        let rz = self.r * z;
        let v = (rz / (1.0 + rz)) / (1.0 + rz);
        (a - 0.5 * self.k) * u - self.outer_exponent_half * v
    }

    /// The unique positive stationary point of the log-integrand, as
    /// `z = e^tau`. Valid for `r` in (0, 1]; callers must have validated the
    /// spec. Clearing denominators in the derivative gives the quadratic
    ///
    /// ```text
    /// s r z^2 + [s - 2E(1-r) - (nu+k) r] z - (nu+k) = 0,   s = q - nu,
    /// ```
    ///
    /// solved with the cancellation-free form of the quadratic formula; the
    /// constant term is negative, so exactly one root is positive.
    pub fn mode_z(&self) -> f64 {
        let s = self.tail_exponent();
        let e2 = 2.0 * self.outer_exponent_half;
        let nk = self.nu + self.k;
        let a = s * self.r;
        let b = s - e2 * (1.0 - self.r) - nk * self.r;
        let c = -nk;
        let disc = (b * b - 4.0 * a * c).sqrt();
        let q0 = -0.5 * (b + b.signum() * disc);
        // c = -(nu + k) < 0 after validation, so q0 is nonzero and exactly
        // one of the two roots is positive.
        (q0 / a).max(c / q0)
    }
}

/// Numerically stable logistic function `1 / (1 + e^-x)`.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
