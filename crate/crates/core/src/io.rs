//! Reading and writing matrices, profiles and JSON documents.
//!
//! Matrices are stored either as headerless CSV (one row per line) or as the
//! JSON document `{"m": .., "n": .., "entries": [[..], ..]}`; the file
//! extension decides. Profiles are JSON `{"row": [..], "col": [..]}`.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{GameError, IoError};
use crate::game::{normalize_payoffs, DenseMatrix, PayoffMatrix, StrategyProfile};

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, message: impl ToString) -> IoError {
    IoError::Parse {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Parses headerless CSV into a dense matrix, rejecting ragged rows.
pub fn parse_csv_matrix(text: &str) -> Result<DenseMatrix, ParseFailure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ParseFailure::Syntax(e.to_string()))?;
        let row = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| ParseFailure::Syntax(format!("line {}: `{field}` is not a number", line + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(GameError::Ragged {
                    line: line + 1,
                    expected: first.len(),
                    found: row.len(),
                }
                .into());
            }
        }
        rows.push(row);
    }
    Ok(DenseMatrix::from_rows(&rows)?)
}

/// Why a matrix file could not be turned into a matrix.
#[derive(Debug)]
pub enum ParseFailure {
    Syntax(String),
    Game(GameError),
}

impl From<GameError> for ParseFailure {
    fn from(e: GameError) -> Self {
        ParseFailure::Game(e)
    }
}

fn lift(path: &Path, failure: ParseFailure) -> IoError {
    match failure {
        ParseFailure::Syntax(message) => parse_err(path, message),
        ParseFailure::Game(e) => IoError::Game(e),
    }
}

/// Reads a payoff matrix. With `normalize`, arbitrary finite entries are
/// rescaled onto `[0, 1]` instead of rejected.
pub fn read_matrix(path: &Path, normalize: bool) -> Result<PayoffMatrix, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if is_json(path) {
        if normalize {
            #[derive(serde::Deserialize)]
            struct Raw {
                entries: Vec<Vec<f64>>,
            }
            let raw: Raw = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
            return Ok(normalize_payoffs(&DenseMatrix::from_rows(&raw.entries)?)?);
        }
        return serde_json::from_str(&text).map_err(|e| parse_err(path, e));
    }
    let raw = parse_csv_matrix(&text).map_err(|f| lift(path, f))?;
    if normalize {
        Ok(normalize_payoffs(&raw)?)
    } else {
        Ok(PayoffMatrix::new(raw)?)
    }
}

pub fn matrix_to_csv(r: &PayoffMatrix) -> String {
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..r.rows() {
        writer
            .write_record(r.row(i).iter().map(|v| v.to_string()))
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn write_matrix(path: &Path, r: &PayoffMatrix) -> Result<(), IoError> {
    let text = if is_json(path) {
        serde_json::to_string(r).expect("matrices serialize")
    } else {
        matrix_to_csv(r)
    };
    write_text(path, &text)
}

pub fn read_profile(path: &Path) -> Result<StrategyProfile, IoError> {
    read_json(path)
}

pub fn write_profile(path: &Path, z: &StrategyProfile) -> Result<(), IoError> {
    write_json(path, z)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| parse_err(path, e))?;
    write_text(path, &text)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}
