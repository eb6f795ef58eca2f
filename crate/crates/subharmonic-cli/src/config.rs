//! Flag definitions and their resolution into a validated run
//! configuration. Everything the pipeline needs is checked here, before
//! any data is loaded or fitted.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use subharmonic::{
    log_integral_j, ErrorModel, GPriorSpec, IntegralSpec, Method, ModelId, ModelPrior,
    SimDesign, StudyOptions, Variant, DEFAULT_REL_TOL,
};

use crate::error::{CliError, Result};

// =============================================================================
// Raw flags
// =============================================================================

/// All-subsets Bayesian variable selection for linear regression, robust
/// to spherically symmetric error laws.
#[derive(Debug, Parser)]
#[command(name = "subharmonic", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

/// One pipeline per subcommand.
#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Score every predictor subset of a CSV dataset and rank models.
    Select(SelectArgs),
    /// Estimate true-model recovery frequencies on a simulated design.
    Simulate(SimulateArgs),
    /// Recovery rates across a grid of sample sizes.
    Sweep(SweepArgs),
    /// Accuracy of the closed-form approximation against exact quadrature.
    BenchLaplace(BenchArgs),
}

/// Flags shared by the scoring pipelines.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Prior tail exponents, comma separated.
    #[arg(
        long = "nu",
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0.95,0.5,0,-1,-2"
    )]
    pub nu: Vec<f64>,
    /// Sharpness exponent of the mixing prior (k >= 0).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub k: f64,
    /// Intercept handling: centered or check.
    #[arg(long, default_value = "centered")]
    pub variant: String,
    /// Scoring methods, comma separated: exact, laplace, laplace-mode, bic.
    #[arg(long = "method", value_delimiter = ',', default_value = "laplace,bic")]
    pub method: Vec<String>,
    /// Model prior: uniform (all non-null subsets) or uniform-null (adds
    /// the null model; needs the check variant for the integral methods).
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    /// Relative tolerance of the exact quadrature.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: json, csv, or pretty-table.
    #[arg(long, default_value = "pretty-table")]
    pub format: String,
}

/// Flags of the `select` subcommand.
#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Input CSV with a header row, or a built-in dataset name
    /// (hald, uscrime).
    #[arg(long)]
    pub input: String,
    /// Response column name; defaults to the last column.
    #[arg(long)]
    pub response: Option<String>,
    /// Models shown per block in pretty output (other formats keep all).
    #[arg(long, default_value_t = 3)]
    pub top: usize,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Data-generating design flags shared by `simulate` and `sweep`.
#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Design token: the built-in 16-predictor benchmark ("paper-6.1") or
    /// "custom" (requires --p and --true).
    #[arg(long, default_value = "paper-6.1")]
    pub design: String,
    /// True-model size for the built-in benchmark: 4, 8, 12, or 16.
    #[arg(long, default_value_t = 4)]
    pub qt: usize,
    /// Noise scale (must be positive for studies).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Error law: gaussian, or t<df> such as t3.
    #[arg(long, default_value = "gaussian")]
    pub error: String,
    /// Base RNG seed; replicates use independent streams.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 200)]
    pub replicates: usize,
    /// Custom design: number of predictors.
    #[arg(long)]
    pub p: Option<usize>,
    /// Custom design: observations per replicate.
    #[arg(long)]
    pub n: Option<usize>,
    /// Custom design: one-based true predictor indices, comma separated.
    #[arg(long = "true", value_delimiter = ',')]
    pub true_predictors: Vec<usize>,
    /// Custom design: correlated pairs as i:j:rho, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pairs: Vec<String>,
    /// Custom design: response intercept.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub intercept: f64,
    /// Custom design: common coefficient of the true predictors.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub coef: f64,
    /// Add the null model to the candidate set.
    #[arg(long, default_value_t = false)]
    pub include_null: bool,
    /// Keep the top-three models of every replicate in the report.
    #[arg(long, default_value_t = false)]
    pub dump_top3: bool,
}

/// Flags of the `simulate` subcommand.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags of the `sweep` subcommand.
#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sample sizes to sweep, comma separated.
    #[arg(long = "n-grid", value_delimiter = ',', required = true)]
    pub n_grid: Vec<usize>,
    #[command(flatten)]
    pub design: DesignArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags of the `bench-laplace` subcommand.
#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Sample sizes to evaluate, comma separated.
    #[arg(long = "n-grid", value_delimiter = ',', required = true)]
    pub n_grid: Vec<usize>,
    /// Submodel size q of the integral.
    #[arg(long, default_value_t = 2)]
    pub q: usize,
    /// Prior tail exponent.
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub nu: f64,
    /// Residual fraction r = 1 - R^2, held fixed across the grid.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    /// Sharpness exponent of the mixing prior.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub k: f64,
    /// Relative tolerance of the exact quadrature.
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
    /// Write the report to this path instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Output format: json, csv, or pretty-table.
    #[arg(long, default_value = "csv")]
    pub format: String,
}

// =============================================================================
// Resolved configuration
// =============================================================================

/// Which pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    /// All-subsets scoring of a dataset.
    Select,
    /// Frequency study on a simulated design.
    Simulate,
    /// Consistency sweep over sample sizes.
    Sweep,
    /// Approximation-accuracy grid.
    BenchLaplace,
}

impl std::fmt::Display for CommandKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let token = match self {
            CommandKind::Select => "select",
            CommandKind::Simulate => "simulate",
            CommandKind::Sweep => "sweep",
            CommandKind::BenchLaplace => "bench-laplace",
        };
        f.write_str(token)
    }
}

/// Model prior selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PriorKind {
    /// Uniform over non-null subsets.
    Uniform,
    /// Uniform over all subsets including the null model.
    UniformNull,
}

impl PriorKind {
    /// The library-level prior this stands for.
    pub fn to_model_prior(self) -> ModelPrior {
        match self {
            PriorKind::Uniform => ModelPrior::UniformNonNull,
            PriorKind::UniformNull => ModelPrior::UniformAll,
        }
    }
}

/// Serialized report layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    /// Versioned JSON document.
    Json,
    /// Flat CSV rows, the plotting interface.
    Csv,
    /// Human-readable fixed-width tables.
    PrettyTable,
}

/// Integral parameters of the `bench-laplace` grid.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BenchSpec {
    /// Submodel size.
    pub q: usize,
    /// Prior tail exponent.
    pub nu: f64,
    /// Residual fraction r = 1 - R^2.
    pub r: f64,
    /// Sharpness exponent.
    pub k: f64,
}

/// Fully validated run configuration; every invariant that can fail fast
/// has been checked by the time a value of this type exists.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Selected pipeline.
    pub command: CommandKind,
    /// Input dataset path or built-in token (select only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Response column override (select only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    /// Prior tail exponents to evaluate.
    pub nus: Vec<f64>,
    /// Sharpness exponent of the mixing prior.
    pub k: f64,
    /// Intercept-handling variant.
    pub variant: Variant,
    /// Scoring methods in request order, deduplicated.
    pub methods: Vec<Method>,
    /// Model prior over the candidate set.
    pub prior: PriorKind,
    /// Base RNG seed (simulation pipelines).
    pub seed: u64,
    /// Monte Carlo replicates (simulation pipelines).
    pub replicates: usize,
    /// Report destination; stdout when absent.
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Report format.
    pub format: OutputFormat,
    /// Quadrature tolerance for the exact method.
    pub rel_tol: f64,
    /// Pretty-output row budget per block (select only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top: Option<usize>,
    /// Resolved data-generating design (simulate and sweep).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<SimDesign>,
    /// Study scoring options (simulate and sweep).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyOptions>,
    /// Sample-size grid (sweep and bench-laplace).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_grid: Vec<usize>,
    /// Integral parameters (bench-laplace only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSpec>,
}

// =============================================================================
// Parsing helpers
// =============================================================================

fn bad_flag(message: String) -> CliError {
    CliError::BadFlag { message }
}

/// Parses the --variant token.
pub fn parse_variant(token: &str) -> Result<Variant> {
    match token.trim().to_ascii_lowercase().as_str() {
        "centered" => Ok(Variant::Centered),
        "check" => Ok(Variant::Check),
        other => Err(bad_flag(format!(
            "--variant must be centered or check, got {other:?}"
        ))),
    }
}

/// Parses the --prior token.
pub fn parse_prior(token: &str) -> Result<PriorKind> {
    match token.trim().to_ascii_lowercase().as_str() {
        "uniform" | "uniform-nonnull" => Ok(PriorKind::Uniform),
        "uniform-null" | "uniform-all" => Ok(PriorKind::UniformNull),
        other => Err(bad_flag(format!(
            "--prior must be uniform or uniform-null, got {other:?}"
        ))),
    }
}

/// Parses the --format token.
pub fn parse_format(token: &str) -> Result<OutputFormat> {
    match token.trim().to_ascii_lowercase().as_str() {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        "pretty-table" | "pretty" | "table" => Ok(OutputFormat::PrettyTable),
        other => Err(bad_flag(format!(
            "--format must be json, csv, or pretty-table, got {other:?}"
        ))),
    }
}

/// Parses the --method tokens, deduplicating while keeping request order.
pub fn parse_methods(tokens: &[String]) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for token in tokens {
        let method: Method = token.parse()?;
        if !methods.contains(&method) {
            methods.push(method);
        }
    }
    if methods.is_empty() {
        return Err(bad_flag("--method needs at least one entry".to_string()));
    }
    Ok(methods)
}

/// Parses the --error token: `gaussian`, or `t<df>` with df > 2.
pub fn parse_error_model(token: &str) -> Result<ErrorModel> {
    let token = token.trim().to_ascii_lowercase();
    if token == "gaussian" || token == "normal" {
        return Ok(ErrorModel::Gaussian);
    }
    let df_text = token
        .strip_prefix("student-t")
        .or_else(|| token.strip_prefix('t'))
        .map(|rest| rest.trim_start_matches('(').trim_end_matches(')'))
        .ok_or_else(|| {
            bad_flag(format!(
                "--error must be gaussian or t<df> (for example t3), got {token:?}"
            ))
        })?;
    let df: f64 = df_text.parse().map_err(|_| {
        bad_flag(format!(
            "--error must be gaussian or t<df> (for example t3), got {token:?}"
        ))
    })?;
    Ok(ErrorModel::StudentT { df })
}

/// Parses --pairs entries of the form `i:j:rho`.
pub fn parse_pairs(tokens: &[String]) -> Result<Vec<((usize, usize), f64)>> {
    tokens
        .iter()
        .map(|token| {
            let parts: Vec<&str> = token.split(':').collect();
            let parsed = if parts.len() == 3 {
                match (
                    parts[0].trim().parse::<usize>(),
                    parts[1].trim().parse::<usize>(),
                    parts[2].trim().parse::<f64>(),
                ) {
                    (Ok(i), Ok(j), Ok(rho)) => Some(((i, j), rho)),
                    _ => None,
                }
            } else {
                None
            };
            parsed.ok_or_else(|| {
                bad_flag(format!(
                    "--pairs entries must look like i:j:rho, got {token:?}"
                ))
            })
        })
        .collect()
}

// Emits the robustness warning for tail exponents outside (0, 1): there the
// prior is no longer sub-harmonic for every candidate model, so the scores
// are Gaussian-motivated, not distribution-robust.
fn warn_nonrobust(nus: &[f64]) {
    let mut seen: Vec<f64> = Vec::new();
    for &nu in nus {
        if !(0.0 < nu && nu < 1.0) && !seen.contains(&nu) {
            eprintln!(
                "warning: nu = {nu} is outside (0, 1): Gaussian-motivated, not distribution-robust"
            );
            seen.push(nu);
        }
    }
}

// Validates every (nu, k, variant) triple before any work starts.
fn validate_prior_grid(nus: &[f64], k: f64, variant: Variant) -> Result<()> {
    if nus.is_empty() {
        return Err(bad_flag("--nu needs at least one value".to_string()));
    }
    for &nu in nus {
        GPriorSpec::new(nu, k, variant)?;
    }
    Ok(())
}

// Validates the quadrature tolerance by exercising it on a tiny reference
// integral, so an out-of-range --rel-tol fails before any data is touched.
fn validate_rel_tol(rel_tol: f64) -> Result<()> {
    let probe = IntegralSpec::centered(5, 1, 0.5, 0.5, 0.0);
    log_integral_j(&probe, rel_tol)?;
    Ok(())
}

// Resolves the design flags into a concrete data-generating process.
fn resolve_design(args: &DesignArgs) -> Result<SimDesign> {
    let error = parse_error_model(&args.error)?;
    match args.design.trim() {
        "paper-6.1" | "benchmark16" => {
            if args.p.is_some() || args.n.is_some() || !args.true_predictors.is_empty() {
                return Err(bad_flag(
                    "--p, --n, --true, and --pairs apply to --design custom only".to_string(),
                ));
            }
            Ok(SimDesign::benchmark16(
                args.qt,
                args.sigma,
                error,
                args.replicates,
                args.seed,
            )?)
        }
        "custom" => {
            let p = args
                .p
                .ok_or_else(|| bad_flag("--design custom needs --p".to_string()))?;
            for &idx in &args.true_predictors {
                if idx < 1 || idx > p {
                    return Err(bad_flag(format!(
                        "--true index {idx} is outside 1..={p}"
                    )));
                }
            }
            let true_mask = if args.true_predictors.is_empty() {
                ModelId::NULL
            } else {
                ModelId::from_indices(&args.true_predictors)
            };
            let design = SimDesign {
                n: args.n.unwrap_or(30),
                p,
                predictor_correlations: parse_pairs(&args.pairs)?,
                true_mask,
                intercept: args.intercept,
                coef: args.coef,
                sigma: args.sigma,
                error,
                replicates: args.replicates,
                seed: args.seed,
            };
            design.validate()?;
            Ok(design)
        }
        other => Err(bad_flag(format!(
            "--design must be paper-6.1 or custom, got {other:?}"
        ))),
    }
}

// Shared resolution of the scoring flags.
struct CommonResolved {
    nus: Vec<f64>,
    k: f64,
    variant: Variant,
    methods: Vec<Method>,
    prior: PriorKind,
    rel_tol: f64,
    output: Option<PathBuf>,
    format: OutputFormat,
}

fn resolve_common(common: &CommonArgs) -> Result<CommonResolved> {
    let variant = parse_variant(&common.variant)?;
    let methods = parse_methods(&common.method)?;
    let needs_nu = methods.iter().any(|m| *m != Method::Bic);
    if needs_nu {
        validate_prior_grid(&common.nu, common.k, variant)?;
        warn_nonrobust(&common.nu);
    }
    if methods.contains(&Method::ExactQuadrature) {
        validate_rel_tol(common.rel_tol)?;
    }
    Ok(CommonResolved {
        nus: common.nu.clone(),
        k: common.k,
        variant,
        methods,
        prior: parse_prior(&common.prior)?,
        rel_tol: common.rel_tol,
        output: common.output.clone(),
        format: parse_format(&common.format)?,
    })
}

impl RunConfig {
    /// Resolves and validates parsed flags; nothing heavier than a probe
    /// quadrature runs before this returns.
    pub fn from_cli(cli: Cli) -> Result<RunConfig> {
        match cli.command {
            CliCommand::Select(args) => {
                let common = resolve_common(&args.common)?;
                Ok(RunConfig {
                    command: CommandKind::Select,
                    input: Some(args.input),
                    response: args.response,
                    nus: common.nus,
                    k: common.k,
                    variant: common.variant,
                    methods: common.methods,
                    prior: common.prior,
                    seed: 0,
                    replicates: 0,
                    output: common.output,
                    format: common.format,
                    rel_tol: common.rel_tol,
                    top: Some(args.top),
                    design: None,
                    study: None,
                    n_grid: Vec::new(),
                    bench: None,
                })
            }
            CliCommand::Simulate(args) => {
                RunConfig::from_study_args(CommandKind::Simulate, &args.design, &args.common, Vec::new())
            }
            CliCommand::Sweep(args) => {
                if args.n_grid.is_empty() {
                    return Err(bad_flag("--n-grid needs at least one value".to_string()));
                }
                RunConfig::from_study_args(CommandKind::Sweep, &args.design, &args.common, args.n_grid)
            }
            CliCommand::BenchLaplace(args) => {
                if args.n_grid.is_empty() {
                    return Err(bad_flag("--n-grid needs at least one value".to_string()));
                }
                validate_rel_tol(args.rel_tol)?;
                // The grid must form valid finite integrals at every n.
                for &n in &args.n_grid {
                    IntegralSpec::centered(n, args.q, args.r, args.nu, args.k).validate()?;
                }
                warn_nonrobust(&[args.nu]);
                Ok(RunConfig {
                    command: CommandKind::BenchLaplace,
                    input: None,
                    response: None,
                    nus: vec![args.nu],
                    k: args.k,
                    variant: Variant::Centered,
                    methods: vec![Method::ExactQuadrature, Method::LaplacePhi],
                    prior: PriorKind::Uniform,
                    seed: 0,
                    replicates: 0,
                    output: args.output,
                    format: parse_format(&args.format)?,
                    rel_tol: args.rel_tol,
                    top: None,
                    design: None,
                    study: None,
                    n_grid: args.n_grid,
                    bench: Some(BenchSpec {
                        q: args.q,
                        nu: args.nu,
                        r: args.r,
                        k: args.k,
                    }),
                })
            }
        }
    }

    fn from_study_args(
        command: CommandKind,
        design_args: &DesignArgs,
        common: &CommonArgs,
        n_grid: Vec<usize>,
    ) -> Result<RunConfig> {
        let common = resolve_common(common)?;
        let design = resolve_design(design_args)?;
        let prior = if design_args.include_null {
            PriorKind::UniformNull
        } else {
            common.prior
        };
        let study = StudyOptions {
            k: common.k,
            variant: common.variant,
            include_null: prior == PriorKind::UniformNull,
            rel_tol: common.rel_tol,
            dump_top3: design_args.dump_top3,
        };
        Ok(RunConfig {
            command,
            input: None,
            response: None,
            nus: common.nus,
            k: common.k,
            variant: common.variant,
            methods: common.methods,
            prior,
            seed: design.seed,
            replicates: design.replicates,
            output: common.output,
            format: common.format,
            rel_tol: common.rel_tol,
            top: None,
            design: Some(design),
            study: Some(study),
            n_grid,
            bench: None,
        })
    }
}
