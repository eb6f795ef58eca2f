//! Report assembly and rendering: versioned JSON, flat CSV, and
//! fixed-width tables rounded to presentation precision.

use serde::Serialize;

use subharmonic::{
    FrequencyResult, Method, ModelId, ModelRecord, SelectionReport, SimDesign, SweepPoint,
};

use crate::config::{CommandKind, RunConfig};
use crate::error::{CliError, Result};

/// One grid point of the approximation-accuracy benchmark.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    /// Sample size.
    pub n: usize,
    /// Log integral by adaptive quadrature.
    pub log_exact: f64,
    /// Log integral by the closed-form approximation.
    pub log_laplace: f64,
    /// Absolute difference of the two log values.
    pub abs_error: f64,
}

/// Command-specific result payload.
#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Body {
    /// `select`: one report per requested tail exponent.
    Select {
        /// Dataset origin (path or built-in token).
        input: String,
        /// Response column used.
        response: String,
        /// Per-nu selection reports.
        reports: Vec<SelectionReport>,
    },
    /// `simulate`: recovery frequencies.
    Simulate {
        /// Frequencies per scoring entry.
        result: FrequencyResult,
    },
    /// `sweep`: recovery rates per sample size.
    Sweep {
        /// One frequency block per grid point.
        points: Vec<SweepPoint>,
    },
    /// `bench-laplace`: accuracy rows.
    Bench {
        /// One row per sample size.
        rows: Vec<BenchRow>,
    },
}

/// Complete serialized report.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    /// Report schema version.
    pub schema: u32,
    /// Seconds since the Unix epoch at report creation; excluded from
    /// determinism comparisons.
    pub timestamp_unix: u64,
    /// Which pipeline produced this.
    pub command: CommandKind,
    /// Echo of the validated configuration.
    pub config: RunConfig,
    /// Result payload.
    #[serde(flatten)]
    pub body: Body,
}

impl Report {
    /// Wraps a result payload with the schema version and timestamp.
    pub fn new(config: &RunConfig, body: Body) -> Report {
        let timestamp_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            schema: 1,
            timestamp_unix,
            command: config.command,
            config: config.clone(),
            body,
        }
    }

    /// Renders the report in the configured format.
    pub fn render(&self) -> Result<String> {
        match self.config.format {
            crate::config::OutputFormat::Json => self.render_json(),
            crate::config::OutputFormat::Csv => Ok(self.render_csv()),
            crate::config::OutputFormat::PrettyTable => Ok(self.render_pretty()),
        }
    }

    fn render_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self).map_err(|err| CliError::Io {
            path: "<report>".to_string(),
            message: err.to_string(),
        })?;
        text.push('\n');
        Ok(text)
    }

    // =========================================================================
    // CSV
    // =========================================================================

    fn render_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        match &self.body {
            Body::Select { reports, .. } => {
                write_row(
                    &mut writer,
                    &[
                        "nu", "method", "rank", "model", "vars", "q", "r2", "log_bf",
                        "posterior",
                    ],
                );
                let mut bic_done = false;
                for report in reports {
                    for &method in &report.meta.methods {
                        if method == Method::Bic {
                            if bic_done {
                                continue;
                            }
                            bic_done = true;
                        }
                        let nu_field = if method == Method::Bic {
                            String::new()
                        } else {
                            format!("{}", report.meta.nu)
                        };
                        for (rank, model) in report.rankings[&method].iter().enumerate() {
                            let record = find_record(report, *model);
                            write_row(
                                &mut writer,
                                &[
                                    nu_field.clone(),
                                    method.to_string(),
                                    format!("{}", rank + 1),
                                    model.to_string(),
                                    record.vars.join("+"),
                                    format!("{}", record.q),
                                    format!("{}", record.r2),
                                    format!("{}", record.log_bf[&method]),
                                    format!("{}", record.posterior[&method]),
                                ],
                            );
                        }
                    }
                }
            }
            Body::Simulate { result } => {
                write_row(&mut writer, &["method", "nu", "freq_rank1", "freq_top3"]);
                for entry in &result.entries {
                    write_row(
                        &mut writer,
                        &[
                            entry.method.to_string(),
                            entry.nu.map(|v| format!("{v}")).unwrap_or_default(),
                            format!("{}", entry.freq_rank1),
                            format!("{}", entry.freq_top3),
                        ],
                    );
                }
            }
            Body::Sweep { points } => {
                write_row(
                    &mut writer,
                    &["n", "method", "nu", "freq_rank1", "freq_top3"],
                );
                for point in points {
                    for entry in &point.entries {
                        write_row(
                            &mut writer,
                            &[
                                format!("{}", point.n),
                                entry.method.to_string(),
                                entry.nu.map(|v| format!("{v}")).unwrap_or_default(),
                                format!("{}", entry.freq_rank1),
                                format!("{}", entry.freq_top3),
                            ],
                        );
                    }
                }
            }
            Body::Bench { rows } => {
                write_row(&mut writer, &["n", "log_exact", "log_laplace", "abs_error"]);
                for row in rows {
                    write_row(
                        &mut writer,
                        &[
                            format!("{}", row.n),
                            format!("{}", row.log_exact),
                            format!("{}", row.log_laplace),
                            format!("{}", row.abs_error),
                        ],
                    );
                }
            }
        }
        let bytes = writer.into_inner().expect("in-memory writer cannot fail");
        String::from_utf8(bytes).expect("csv output is UTF-8")
    }

    // =========================================================================
    // Pretty tables
    // =========================================================================

    fn render_pretty(&self) -> String {
        match &self.body {
            Body::Select {
                input,
                response,
                reports,
            } => pretty_select(&self.config, input, response, reports),
            Body::Simulate { result } => {
                let design = self.config.design.as_ref().expect("simulate has a design");
                let mut out = pretty_design_line(design);
                out.push_str(&pretty_frequency_table(&result.entries, None));
                out
            }
            Body::Sweep { points } => {
                let design = self.config.design.as_ref().expect("sweep has a design");
                let mut out = pretty_design_line(design);
                for point in points {
                    out.push_str(&format!("\nn = {}\n", point.n));
                    out.push_str(&pretty_frequency_table(&point.entries, Some(point.n)));
                }
                out
            }
            Body::Bench { rows } => {
                let bench = self.config.bench.expect("bench has parameters");
                let mut out = format!(
                    "quadrature vs closed form: q = {}, nu = {}, k = {}, r = {}\n\n",
                    bench.q, bench.nu, bench.k, bench.r
                );
                out.push_str(&format!(
                    "{:>10}  {:>18}  {:>18}  {:>12}\n",
                    "n", "log_exact", "log_laplace", "abs_error"
                ));
                for row in rows {
                    out.push_str(&format!(
                        "{:>10}  {:>18.9}  {:>18.9}  {:>12.3e}\n",
                        row.n, row.log_exact, row.log_laplace, row.abs_error
                    ));
                }
                out
            }
        }
    }
}

fn write_row<const N: usize>(
    writer: &mut csv::Writer<Vec<u8>>,
    fields: &[impl AsRef<str>; N],
) {
    writer
        .write_record(fields.iter().map(|f| f.as_ref()))
        .expect("in-memory writer cannot fail");
}

fn find_record(report: &SelectionReport, model: ModelId) -> &ModelRecord {
    report
        .records
        .iter()
        .find(|r| r.model == model)
        .expect("every ranked model has a record")
}

fn pretty_design_line(design: &SimDesign) -> String {
    format!(
        "design: n = {}, p = {}, true = {}, sigma = {}, error = {}, replicates = {}, seed = {}\n",
        design.n,
        design.p,
        design.true_mask,
        design.sigma,
        design.error.label(),
        design.replicates,
        design.seed
    )
}

fn pretty_frequency_table(
    entries: &[subharmonic::FrequencyEntry],
    _n: Option<usize>,
) -> String {
    let mut out = format!(
        "{:<14}{:>8}{:>10}{:>10}\n",
        "method", "nu", "rank1", "top3"
    );
    for entry in entries {
        out.push_str(&format!(
            "{:<14}{:>8}{:>10.3}{:>10.3}\n",
            entry.method.to_string(),
            entry.nu.map(|v| format!("{v}")).unwrap_or_else(|| "-".to_string()),
            entry.freq_rank1,
            entry.freq_top3
        ));
    }
    out
}

fn pretty_select(
    config: &RunConfig,
    input: &str,
    response: &str,
    reports: &[SelectionReport],
) -> String {
    let top = config.top.unwrap_or(3);
    let mut out = String::new();
    if let Some(first) = reports.first() {
        out.push_str(&format!(
            "dataset: {} (n = {}, p = {}, response = {})\n",
            input, first.meta.n, first.meta.p, response
        ));
        out.push_str(&format!(
            "variant = {}, k = {}, prior = {}\n",
            first.meta.variant, first.meta.k, first.meta.prior
        ));
    }
    let mut bic_done = false;
    for report in reports {
        for &method in &report.meta.methods {
            if method == Method::Bic {
                if bic_done {
                    continue;
                }
                bic_done = true;
                out.push_str(&format!("\nmethod {method} (independent of nu)\n"));
            } else {
                out.push_str(&format!("\nmethod {method}, nu = {}\n", report.meta.nu));
            }
            let shown: Vec<ModelId> =
                report.rankings[&method].iter().take(top).copied().collect();
            let model_width = shown
                .iter()
                .map(|m| m.to_string().len())
                .chain(std::iter::once("model".len()))
                .max()
                .unwrap_or(5)
                + 2;
            let vars_width = shown
                .iter()
                .map(|m| find_record(report, *m).vars.join("+").len())
                .chain(std::iter::once("vars".len()))
                .max()
                .unwrap_or(4)
                + 2;
            out.push_str(&format!(
                "{:<6}{:<model_width$}{:<vars_width$}{:>4}{:>8}{:>10}{:>11}\n",
                "rank", "model", "vars", "q", "R^2", "log BF", "posterior"
            ));
            for (rank, model) in shown.iter().enumerate() {
                let record = find_record(report, *model);
                out.push_str(&format!(
                    "{:<6}{:<model_width$}{:<vars_width$}{:>4}{:>8.3}{:>10.3}{:>11.3}\n",
                    rank + 1,
                    model.to_string(),
                    record.vars.join("+"),
                    record.q,
                    record.r2,
                    record.log_bf[&method],
                    record.posterior[&method]
                ));
            }
            // Only ties that touch a displayed model matter here; the JSON
            // report keeps the complete list.
            if let Some(ties) = report.ties.get(&method) {
                for (a, b) in ties {
                    if shown.contains(a) || shown.contains(b) {
                        out.push_str(&format!(
                            "note: {a} and {b} are within posterior {:.0e} of each other\n",
                            subharmonic::TIE_EPSILON
                        ));
                    }
                }
            }
        }
    }
    out
}
