//! CSV ingestion of observed signals.
//!
//! Expected layout: a header row, a required integer column `y`, optional
//! covariate columns referenced by name. The signal ceiling K is declared by
//! the caller, never inferred from the data.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::SignalData;

/// Read a signal (and selected covariate columns) from a CSV file.
pub fn ingest_csv(path: &Path, k_max: u32, covariate_columns: &[String]) -> Result<SignalData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let y_idx = headers
        .iter()
        .position(|h| h.trim() == "y")
        .ok_or_else(|| Error::Ingest {
            row: 1,
            message: "missing required column 'y' in header".to_string(),
        })?;
    let cov_idx: Vec<usize> = covariate_columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h.trim() == name.trim())
                .ok_or_else(|| Error::Ingest {
                    row: 1,
                    message: format!("covariate column '{name}' not found in header"),
                })
        })
        .collect::<Result<_>>()?;

    let mut y = Vec::new();
    let mut x = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2; // header is row 1
        let record = record.map_err(|e| Error::Ingest {
            row,
            message: format!("malformed record: {e}"),
        })?;
        let raw = record.get(y_idx).ok_or_else(|| Error::Ingest {
            row,
            message: "row too short for the y column".to_string(),
        })?;
        let value: i64 = raw.trim().parse().map_err(|_| Error::Ingest {
            row,
            message: format!("y value '{raw}' is not an integer"),
        })?;
        if value < 0 {
            return Err(Error::Ingest {
                row,
                message: format!("y value {value} is negative"),
            });
        }
        if value > k_max as i64 {
            return Err(Error::Ingest {
                row,
                message: format!("y value {value} exceeds the declared maximum K = {k_max}"),
            });
        }
        y.push(value as u32);
        for &c in &cov_idx {
            let raw = record.get(c).ok_or_else(|| Error::Ingest {
                row,
                message: "row too short for a covariate column".to_string(),
            })?;
            let v: f64 = raw.trim().parse().map_err(|_| Error::Ingest {
                row,
                message: format!("covariate value '{raw}' is not a number"),
            })?;
            x.push(v);
        }
    }
    SignalData::new(y, x, cov_idx.len(), k_max)
}
