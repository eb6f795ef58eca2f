//! Monte Carlo studies: correlated designs, spherical error generation,
//! true-model recovery frequencies, and consistency sweeps.
//!
//! # Background
//!
//! The benchmark design draws `p = 16` standardized predictors in five
//! correlated pairs (correlations 0.5, -0.4, 0.3, -0.2, 0.1) plus six
//! independent columns, builds the response from a planted true subset with
//! common coefficient 2 and intercept 1, and adds spherically symmetric
//! noise. A frequency study scores every candidate model on each replicate
//! and records how often the true model ranks first and how often it lands
//! in the top three.
//!
//! # Implementation
//!
//! Replicates are keyed by `(seed, replicate_index)` through independent
//! ChaCha streams, so they are deterministic, order-independent, and safe
//! to evaluate in parallel. Within a replicate every scoring entry shares
//! the same least-squares fits; only the Bayes factor arithmetic differs
//! per method and per `nu`. Multivariate Student-t noise uses one shared
//! chi-square mixing draw per replicate (a spherical law, not i.i.d.
//! t components), scaled to unit component variance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{
    integral_spec_from_fit, log_bf_bic, log_bf_laplace, log_integral_j,
    log_integral_laplace_exact, ErrorModel, GPriorSpec, Method, Variant, DEFAULT_REL_TOL,
};
use crate::error::{Error, Result};
use crate::regression::{
    enumerate_models, fit_models, standardize, FitSummary, ModelId, RawData,
    DEFAULT_ENUMERATION_CAP,
};

/// Correlated pairs of the 16-predictor benchmark design, as one-based
/// `((i, j), rho)` triples; predictors 11 through 16 are independent.
pub const BENCHMARK16_CORRELATIONS: [((usize, usize), f64); 5] = [
    ((1, 2), 0.5),
    ((3, 4), -0.4),
    ((5, 6), 0.3),
    ((7, 8), -0.2),
    ((9, 10), 0.1),
];

// =============================================================================
// Design
// =============================================================================

/// Complete specification of one simulated data-generating process.
#[derive(Debug, Clone, Serialize)]
pub struct SimDesign {
    /// Observations per replicate.
    pub n: usize,
    /// Number of predictors.
    pub p: usize,
    /// Correlated predictor pairs as one-based `((i, j), rho)`; every index
    /// not named here is drawn independently.
    pub predictor_correlations: Vec<((usize, usize), f64)>,
    /// The planted true model.
    pub true_mask: ModelId,
    /// Intercept of the response equation.
    pub intercept: f64,
    /// Common coefficient of every true predictor.
    pub coef: f64,
    /// Noise scale; studies require `sigma > 0`, while single replicates
    /// admit the noiseless `sigma = 0` edge case.
    pub sigma: f64,
    /// Error law the noise vector is drawn from.
    pub error: ErrorModel,
    /// Number of Monte Carlo replicates.
    pub replicates: usize,
    /// Base RNG seed; each replicate uses its own stream.
    pub seed: u64,
}

impl SimDesign {
    /// The 16-predictor benchmark design at `n = 30` with intercept 1 and
    /// coefficient 2. `q_t` selects the planted model size: 4 activates
    /// predictors {1,2,5,6}; 8 adds {9,10,11,12}; 12 and 16 extend to the
    /// leading 12 or all 16 predictors.
    pub fn benchmark16(
        q_t: usize,
        sigma: f64,
        error: ErrorModel,
        replicates: usize,
        seed: u64,
    ) -> Result<SimDesign> {
        let true_mask = match q_t {
            4 => ModelId::from_indices(&[1, 2, 5, 6]),
            8 => ModelId::from_indices(&[1, 2, 5, 6, 9, 10, 11, 12]),
            12 => ModelId::from_indices(&[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]),
            16 => ModelId::full(16),
            other => {
                return Err(Error::DomainError {
                    reason: format!(
                        "benchmark true-model size must be 4, 8, 12, or 16, got {other}"
                    ),
                })
            }
        };
        let design = SimDesign {
            n: 30,
            p: 16,
            predictor_correlations: BENCHMARK16_CORRELATIONS.to_vec(),
            true_mask,
            intercept: 1.0,
            coef: 2.0,
            sigma,
            error,
            replicates,
            seed,
        };
        design.validate()?;
        Ok(design)
    }

    /// Checks the design invariants.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 || self.p > 32 {
            return Err(Error::DomainError {
                reason: format!("need n >= 2 and 1 <= p <= 32, got n = {}, p = {}", self.n, self.p),
            });
        }
        let mut used = vec![false; self.p];
        for &((i, j), rho) in &self.predictor_correlations {
            if i < 1 || j < 1 || i > self.p || j > self.p || i == j {
                return Err(Error::DomainError {
                    reason: format!("invalid correlated pair ({i}, {j}) for p = {}", self.p),
                });
            }
            if !(rho.abs() < 1.0) {
                return Err(Error::DomainError {
                    reason: format!("pair correlation must lie in (-1, 1), got {rho}"),
                });
            }
            for idx in [i, j] {
                if used[idx - 1] {
                    return Err(Error::DomainError {
                        reason: format!("predictor {idx} appears in more than one pair"),
                    });
                }
                used[idx - 1] = true;
            }
        }
        if !ModelId::full(self.p).is_superset_of(self.true_mask) {
            return Err(Error::DomainError {
                reason: format!(
                    "true model {} references predictors beyond p = {}",
                    self.true_mask, self.p
                ),
            });
        }
        for (label, value) in [
            ("intercept", self.intercept),
            ("coef", self.coef),
            ("sigma", self.sigma),
        ] {
            if !value.is_finite() {
                return Err(Error::DomainError {
                    reason: format!("{label} must be finite, got {value}"),
                });
            }
        }
        if self.sigma < 0.0 {
            return Err(Error::DomainError {
                reason: format!("sigma must be non-negative, got {}", self.sigma),
            });
        }
        self.error.validate()?;
        Ok(())
    }
}

// =============================================================================
// Replicate generation
// =============================================================================

fn draw_normals(rng: &mut ChaCha12Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

// Center and scale to unit population variance, matching `standardize` so
// downstream re-standardization is an exact identity.
fn scale_to_unit(column: &mut [f64]) {
    let n = column.len() as f64;
    let mean = column.iter().sum::<f64>() / n;
    let var = column.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        for v in column.iter_mut() {
            *v = (*v - mean) / sd;
        }
    }
}

/// Draws one replicate of the design, deterministically in
/// `(design.seed, replicate_index)`.
///
/// Stream layout: each correlated pair, in declaration order, consumes `n`
/// normals for its first column and `n` fresh normals for the partner
/// (`x_j = rho x_i + sqrt(1 - rho^2) u`); remaining predictors follow in
/// ascending index order; the noise vector comes last (`n` normals, plus a
/// single chi-square mixing draw for Student-t noise). Predictors are
/// standardized after drawing, then the response is assembled as
/// `y = intercept + coef * sum of true predictors + sigma * eps`.
pub fn generate_replicate(design: &SimDesign, replicate_index: usize) -> Result<RawData> {
    design.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(design.seed);
    rng.set_stream(replicate_index as u64);
    let n = design.n;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); design.p];
    for &((i, j), rho) in &design.predictor_correlations {
        let base = draw_normals(&mut rng, n);
        let fresh = draw_normals(&mut rng, n);
        let partner: Vec<f64> = base
            .iter()
            .zip(&fresh)
            .map(|(b, u)| rho * b + (1.0 - rho * rho).sqrt() * u)
            .collect();
        columns[i - 1] = base;
        columns[j - 1] = partner;
    }
    for column in columns.iter_mut() {
        if column.is_empty() {
            *column = draw_normals(&mut rng, n);
        }
    }

    let eps: Vec<f64> = match &design.error {
        ErrorModel::Gaussian => draw_normals(&mut rng, n),
        ErrorModel::StudentT { df } => {
            let z = draw_normals(&mut rng, n);
            let chi = ChiSquared::new(*df).expect("df > 2 after validation");
            let w: f64 = rng.sample(chi);
            let scale = ((df - 2.0) / w).sqrt();
            z.into_iter().map(|v| v * scale).collect()
        }
        ErrorModel::ScaleMixture(_) => {
            return Err(Error::UnsupportedFamily {
                reason: "scale mixtures expose norm moments only and cannot be sampled"
                    .to_string(),
            })
        }
    };

    for column in columns.iter_mut() {
        scale_to_unit(column);
    }

    let y: Vec<f64> = (0..n)
        .map(|row| {
            let signal: f64 = design
                .true_mask
                .indices()
                .iter()
                .map(|&idx| columns[idx - 1][row])
                .sum();
            design.intercept + design.coef * signal + design.sigma * eps[row]
        })
        .collect();
    let names = (1..=design.p).map(|j| format!("x{j}")).collect();
    Ok(RawData { columns, names, y })
}

// =============================================================================
// Frequency studies
// =============================================================================

/// Scoring and comparison-set options for a study.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StudyOptions {
    /// Sharpness exponent `k` of the mixing prior.
    pub k: f64,
    /// Intercept-handling variant.
    pub variant: Variant,
    /// Whether the null model joins the candidate set (required when the
    /// planted true model is the null model).
    pub include_null: bool,
    /// Quadrature tolerance for the exact method.
    pub rel_tol: f64,
    /// Whether to keep the top-three models of every replicate in the
    /// result.
    pub dump_top3: bool,
}

impl Default for StudyOptions {
    fn default() -> StudyOptions {
        StudyOptions {
            k: 0.0,
            variant: Variant::Centered,
            include_null: false,
            rel_tol: DEFAULT_REL_TOL,
            dump_top3: false,
        }
    }
}

/// Recovery frequencies for one scoring entry (a method, and for the
/// integral-based methods a specific `nu`).
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyEntry {
    /// Scoring method.
    pub method: Method,
    /// Prior tail exponent; absent for BIC, which does not depend on it.
    pub nu: Option<f64>,
    /// Fraction of replicates where the true model ranked first.
    pub freq_rank1: f64,
    /// Fraction of replicates where the true model ranked in the top three.
    pub freq_top3: f64,
    /// Top three models of every replicate, when the dump was requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top3: Option<Vec<Vec<ModelId>>>,
}

/// Aggregated output of a frequency study.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyResult {
    /// Number of replicates behind every frequency.
    pub replicates: usize,
    /// One entry per (method, nu) combination, in request order.
    pub entries: Vec<FrequencyEntry>,
}

/// Recovery rates at one sample size of a consistency sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    /// Sample size of this grid point.
    pub n: usize,
    /// Frequencies per scoring entry, same layout as a frequency study.
    pub entries: Vec<FrequencyEntry>,
}

// Expands (methods, nus) into deduplicated scoring entries: BIC once, every
// other method once per nu.
fn scoring_entries(methods: &[Method], nus: &[f64]) -> Result<Vec<(Method, Option<f64>)>> {
    let mut entries: Vec<(Method, Option<f64>)> = Vec::new();
    for &method in methods {
        match method {
            Method::Bic => {
                if !entries.contains(&(method, None)) {
                    entries.push((method, None));
                }
            }
            _ => {
                if nus.is_empty() {
                    return Err(Error::DomainError {
                        reason: format!("method {method} needs at least one nu value"),
                    });
                }
                for &nu in nus {
                    if !entries.iter().any(|(m, v)| *m == method && *v == Some(nu)) {
                        entries.push((method, Some(nu)));
                    }
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(Error::DomainError {
            reason: "at least one scoring method is required".to_string(),
        });
    }
    Ok(entries)
}

// Log Bayes factors of every fit against the full-model fit for one entry.
fn score_fits(
    fits: &[FitSummary],
    full_fit: &FitSummary,
    n: usize,
    p: usize,
    method: Method,
    nu: Option<f64>,
    options: &StudyOptions,
) -> Result<Vec<f64>> {
    match method {
        Method::Bic => fits
            .iter()
            .map(|f| Ok(log_bf_bic(f, full_fit, n, p)?.value))
            .collect(),
        Method::LaplacePhi => {
            let nu = nu.expect("non-BIC entries carry nu");
            fits.iter()
                .map(|f| Ok(log_bf_laplace(f, full_fit, n, p, nu)?.value))
                .collect()
        }
        Method::ExactQuadrature => {
            let gspec = GPriorSpec::new(nu.expect("non-BIC entries carry nu"), options.k, options.variant)?;
            let base = log_integral_j(&integral_spec_from_fit(full_fit, n, &gspec)?, options.rel_tol)?;
            fits.iter()
                .map(|f| {
                    let spec = integral_spec_from_fit(f, n, &gspec)?;
                    Ok(log_integral_j(&spec, options.rel_tol)? - base)
                })
                .collect()
        }
        Method::LaplaceExactMode => {
            let gspec = GPriorSpec::new(nu.expect("non-BIC entries carry nu"), options.k, options.variant)?;
            let base = log_integral_laplace_exact(&integral_spec_from_fit(full_fit, n, &gspec)?)?;
            fits.iter()
                .map(|f| {
                    let spec = integral_spec_from_fit(f, n, &gspec)?;
                    Ok(log_integral_laplace_exact(&spec)? - base)
                })
                .collect()
        }
    }
}

// Rank of the true model (1-based) plus the top-three models, under
// score-descending order with ascending-mask tie-break.
fn rank_and_top3(
    scores: &[f64],
    models: &[ModelId],
    true_pos: usize,
) -> (usize, Vec<ModelId>) {
    let beats = |i: usize, j: usize| -> bool {
        scores[i] > scores[j] || (scores[i] == scores[j] && models[i].0 < models[j].0)
    };
    let mut rank = 1usize;
    for i in 0..models.len() {
        if i != true_pos && beats(i, true_pos) {
            rank += 1;
        }
    }
    let mut top: Vec<usize> = Vec::with_capacity(3);
    for i in 0..models.len() {
        let mut pos = top.len();
        while pos > 0 && beats(i, top[pos - 1]) {
            pos -= 1;
        }
        if pos < 3 {
            top.insert(pos, i);
            top.truncate(3);
        }
    }
    (rank, top.into_iter().map(|i| models[i]).collect())
}

/// Runs a frequency study with default options (`k = 0`, centered variant,
/// non-null candidate set, default quadrature tolerance, no dump).
pub fn run_frequency_study(
    design: &SimDesign,
    methods: &[Method],
    nus: &[f64],
) -> Result<FrequencyResult> {
    run_frequency_study_with_options(design, methods, nus, &StudyOptions::default())
}

/// Runs `design.replicates` independent replicates, scores every candidate
/// model on each, and aggregates how often the true model ranks first and
/// in the top three, per scoring entry.
///
/// All entries of a replicate share one set of least-squares fits. Ranking
/// uses the log Bayes factors directly, which equals the posterior ranking
/// under the uniform prior on the candidate set.
pub fn run_frequency_study_with_options(
    design: &SimDesign,
    methods: &[Method],
    nus: &[f64],
    options: &StudyOptions,
) -> Result<FrequencyResult> {
    design.validate()?;
    if design.sigma <= 0.0 {
        return Err(Error::DomainError {
            reason: "frequency studies need sigma > 0".to_string(),
        });
    }
    if design.replicates == 0 {
        return Err(Error::DomainError {
            reason: "at least one replicate is required".to_string(),
        });
    }
    let entries = scoring_entries(methods, nus)?;
    let uses_positive_r2 = |m: &Method| {
        matches!(
            m,
            Method::ExactQuadrature | Method::LaplacePhi | Method::LaplaceExactMode
        )
    };
    if options.variant == Variant::Check && entries.iter().any(|(m, _)| *m == Method::LaplacePhi)
    {
        return Err(Error::DomainError {
            reason: "the laplace method is defined for the centered variant only".to_string(),
        });
    }
    if options.variant == Variant::Centered
        && options.include_null
        && entries.iter().any(|(m, _)| uses_positive_r2(m))
    {
        return Err(Error::NullModelForbidden);
    }
    if design.true_mask.is_null() && !options.include_null {
        return Err(Error::DomainError {
            reason: "the true model is the null model but the candidate set excludes it"
                .to_string(),
        });
    }
    for (_, nu) in &entries {
        if let Some(nu) = nu {
            GPriorSpec::new(*nu, options.k, options.variant)?;
        }
    }

    let models = enumerate_models(design.p, options.include_null, DEFAULT_ENUMERATION_CAP)?;
    let true_pos = models
        .iter()
        .position(|m| *m == design.true_mask)
        .expect("validated true model is enumerated");
    let full_pos = models
        .iter()
        .position(|m| *m == ModelId::full(design.p))
        .expect("full model is enumerated");

    // Per replicate: (rank, top3) for every entry.
    let per_replicate: Result<Vec<Vec<(usize, Vec<ModelId>)>>> = (0..design.replicates)
        .into_par_iter()
        .map(|replicate| {
            let raw = generate_replicate(design, replicate)?;
            let data = standardize(&raw)?;
            let fits = fit_models(&data, &models)?;
            let full_fit = &fits[full_pos];
            entries
                .iter()
                .map(|&(method, nu)| {
                    let scores =
                        score_fits(&fits, full_fit, data.n(), data.p(), method, nu, options)?;
                    Ok(rank_and_top3(&scores, &models, true_pos))
                })
                .collect()
        })
        .collect();
    let per_replicate = per_replicate?;

    let reps = design.replicates as f64;
    let result_entries = entries
        .iter()
        .enumerate()
        .map(|(e, &(method, nu))| {
            let mut rank1 = 0usize;
            let mut top3 = 0usize;
            let mut dump = options.dump_top3.then(Vec::new);
            for outcome in &per_replicate {
                let (rank, top) = &outcome[e];
                if *rank == 1 {
                    rank1 += 1;
                }
                if *rank <= 3 {
                    top3 += 1;
                }
                if let Some(dump) = dump.as_mut() {
                    dump.push(top.clone());
                }
            }
            FrequencyEntry {
                method,
                nu,
                freq_rank1: rank1 as f64 / reps,
                freq_top3: top3 as f64 / reps,
                top3: dump,
            }
        })
        .collect();

    Ok(FrequencyResult {
        replicates: design.replicates,
        entries: result_entries,
    })
}

/// Runs the frequency study at every sample size of `n_grid` with default
/// options, reporting recovery rates per grid point.
pub fn run_consistency_sweep(
    base_design: &SimDesign,
    n_grid: &[usize],
    methods: &[Method],
    nus: &[f64],
) -> Result<Vec<SweepPoint>> {
    run_consistency_sweep_with_options(base_design, n_grid, methods, nus, &StudyOptions::default())
}

/// [`run_consistency_sweep`] with explicit study options.
pub fn run_consistency_sweep_with_options(
    base_design: &SimDesign,
    n_grid: &[usize],
    methods: &[Method],
    nus: &[f64],
    options: &StudyOptions,
) -> Result<Vec<SweepPoint>> {
    if n_grid.is_empty() {
        return Err(Error::DomainError {
            reason: "the sweep needs at least one sample size".to_string(),
        });
    }
    let mut points = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let mut design = base_design.clone();
        design.n = n;
        let result = run_frequency_study_with_options(&design, methods, nus, options)?;
        points.push(SweepPoint {
            n,
            entries: result.entries,
        });
    }
    Ok(points)
}

// =============================================================================
// Tests
// =============================================================================
