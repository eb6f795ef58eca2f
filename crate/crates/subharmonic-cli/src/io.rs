//! CSV ingestion: file loading, built-in datasets, and strict numeric
//! parsing with errors that name the offending row and column.

use std::path::Path;

use subharmonic::RawData;

use crate::error::{CliError, Result};

/// The classic 13-observation cement dataset (4 predictors).
pub const HALD_CSV: &str = include_str!("../../../data/hald.csv");
/// 47 US states, 15 predictors, preprocessed as documented in data/README.md.
pub const USCRIME_CSV: &str = include_str!("../../../data/uscrime.csv");

/// Loads the dataset named by `--input`: an existing CSV path, or one of
/// the built-in tokens `hald` / `uscrime`. Returns the data and the name
/// of the response column actually used.
pub fn load_input(input: &str, response: Option<&str>) -> Result<(RawData, String)> {
    let path = Path::new(input);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|err| CliError::Io {
            path: input.to_string(),
            message: err.to_string(),
        })?;
        return parse_csv(&text, response, input);
    }
    match input.trim().to_ascii_lowercase().as_str() {
        "hald" | "hald.csv" => parse_csv(HALD_CSV, response, "builtin:hald"),
        "uscrime" | "uscrime.csv" => parse_csv(USCRIME_CSV, response, "builtin:uscrime"),
        _ => Err(CliError::Io {
            path: input.to_string(),
            message: "no such file (and not a built-in dataset name)".to_string(),
        }),
    }
}

/// Parses a CSV document with a header row into [`RawData`], designating
/// one column as the response (default: the last).
pub fn parse_csv(text: &str, response: Option<&str>, origin: &str) -> Result<(RawData, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|err| CliError::Parse {
            path: origin.to_string(),
            row: 1,
            column: "*".to_string(),
            message: err.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(CliError::EmptyFile {
            path: origin.to_string(),
        });
    }
    if headers.len() < 2 {
        return Err(CliError::Parse {
            path: origin.to_string(),
            row: 1,
            column: "*".to_string(),
            message: "need at least one predictor column and one response column".to_string(),
        });
    }
    let response_index = match response {
        Some(name) => headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::BadFlag {
                message: format!(
                    "--response {name:?} does not name a column of {origin} (columns: {})",
                    headers.join(", ")
                ),
            }
        })?,
        None => headers.len() - 1,
    };

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (index, record) in reader.records().enumerate() {
        let row = index + 2;
        let record = record.map_err(|err| CliError::Parse {
            path: origin.to_string(),
            row,
            column: "*".to_string(),
            message: err.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(CliError::Parse {
                path: origin.to_string(),
                row,
                column: "*".to_string(),
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| CliError::Parse {
                path: origin.to_string(),
                row,
                column: headers[j].clone(),
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: origin.to_string(),
                    row,
                    column: headers[j].clone(),
                    message: format!("non-finite value {cell:?}"),
                });
            }
            columns[j].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::EmptyFile {
            path: origin.to_string(),
        });
    }

    let mut predictors = Vec::with_capacity(headers.len() - 1);
    let mut names = Vec::with_capacity(headers.len() - 1);
    let mut y = Vec::new();
    for (j, column) in columns.into_iter().enumerate() {
        if j == response_index {
            y = column;
        } else {
            names.push(headers[j].clone());
            predictors.push(column);
        }
    }
    Ok((
        RawData {
            columns: predictors,
            names,
            y,
        },
        headers[response_index].clone(),
    ))
}
