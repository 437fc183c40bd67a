//! Fixed-precision CSV helpers shared by every log file.
//!
//! All floats are written with exactly nine decimals so that identical
//! inputs give byte-identical files.

use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("expected header `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn float(v: f64) -> String {
    format!("{v:.9}")
}

pub fn join(values: &[f64]) -> String {
    values.iter().map(|v| float(*v)).collect::<Vec<_>>().join(",")
}

pub(crate) struct Row {
    pub line: usize,
    pub fields: Vec<String>,
}

pub(crate) fn read_rows<R: BufRead>(input: R, header: &str) -> Result<Vec<Row>, CsvError> {
    let mut lines = input.lines().enumerate();
    let found = match lines.next() {
        Some((_, l)) => l?,
        None => String::new(),
    };
    if found.trim_end() != header {
        return Err(CsvError::Header {
            expected: header.to_string(),
            found,
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(Row {
            line: i + 1,
            fields: line.split(',').map(|f| f.trim().to_string()).collect(),
        });
    }
    Ok(rows)
}

pub(crate) fn parse_floats(fields: &[String], line: usize) -> Result<Vec<f64>, CsvError> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|e| CsvError::Parse {
                line,
                message: format!("`{f}`: {e}"),
            })
        })
        .collect()
}

pub(crate) fn expect_columns(row: &Row, n: usize) -> Result<(), CsvError> {
    if row.fields.len() != n {
        return Err(CsvError::Parse {
            line: row.line,
            message: format!("expected {n} columns, found {}", row.fields.len()),
        });
    }
    Ok(())
}
