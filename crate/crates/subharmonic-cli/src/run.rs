//! Pipeline execution: dispatches a validated [`RunConfig`] to the library
//! and wraps the result in a serializable report.

use subharmonic::{
    log_integral_j, log_integral_laplace_phi, run_consistency_sweep_with_options,
    run_frequency_study_with_options, select_with_options, standardize, GPriorSpec,
    IntegralSpec, DEFAULT_ENUMERATION_CAP,
};

use crate::config::{CommandKind, RunConfig};
use crate::error::Result;
use crate::io::load_input;
use crate::render::{BenchRow, Body, Report};

/// Runs the configured pipeline to completion.
pub fn run(config: &RunConfig) -> Result<Report> {
    let body = match config.command {
        CommandKind::Select => run_select(config)?,
        CommandKind::Simulate => run_simulate(config)?,
        CommandKind::Sweep => run_sweep(config)?,
        CommandKind::BenchLaplace => run_bench(config)?,
    };
    Ok(Report::new(config, body))
}

fn run_select(config: &RunConfig) -> Result<Body> {
    let input = config.input.as_deref().expect("select has an input");
    let (raw, response) = load_input(input, config.response.as_deref())?;
    let data = standardize(&raw)?;
    let prior = config.prior.to_model_prior();
    let mut reports = Vec::with_capacity(config.nus.len());
    for &nu in &config.nus {
        let gspec = GPriorSpec::new(nu, config.k, config.variant)?;
        reports.push(select_with_options(
            &data,
            &gspec,
            &config.methods,
            &prior,
            config.rel_tol,
            DEFAULT_ENUMERATION_CAP,
        )?);
    }
    Ok(Body::Select {
        input: input.to_string(),
        response,
        reports,
    })
}

fn run_simulate(config: &RunConfig) -> Result<Body> {
    let design = config.design.as_ref().expect("simulate has a design");
    let options = config.study.as_ref().expect("simulate has study options");
    let result =
        run_frequency_study_with_options(design, &config.methods, &config.nus, options)?;
    Ok(Body::Simulate { result })
}

fn run_sweep(config: &RunConfig) -> Result<Body> {
    let design = config.design.as_ref().expect("sweep has a design");
    let options = config.study.as_ref().expect("sweep has study options");
    let points = run_consistency_sweep_with_options(
        design,
        &config.n_grid,
        &config.methods,
        &config.nus,
        options,
    )?;
    Ok(Body::Sweep { points })
}

fn run_bench(config: &RunConfig) -> Result<Body> {
    let bench = config.bench.expect("bench has parameters");
    let mut rows = Vec::with_capacity(config.n_grid.len());
    for &n in &config.n_grid {
        let spec = IntegralSpec::centered(n, bench.q, bench.r, bench.nu, bench.k);
        let log_exact = log_integral_j(&spec, config.rel_tol)?;
        let log_laplace = log_integral_laplace_phi(&spec)?;
        rows.push(BenchRow {
            n,
            log_exact,
            log_laplace,
            abs_error: (log_exact - log_laplace).abs(),
        });
    }
    Ok(Body::Bench { rows })
}
