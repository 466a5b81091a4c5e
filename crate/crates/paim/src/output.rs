//! CSV and JSON result tables.
//!
//! CSV files carry a header row with the [`ResultRow`] (or [`BoundRow`])
//! field names; absent optional values are empty cells. JSON output wraps the
//! same rows in an object tagged with [`SCHEMA`].

use std::io::Write;

use serde::Serialize;

use crate::harness::{BoundRow, PrecoderAb, ResultRow};
use crate::{HarnessError, Result};

pub const SCHEMA: &str = "paim-results/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema: &'static str,
    rows: &'a [T],
    #[serde(skip_serializing_if = "Option::is_none")]
    target_ber: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gain_db: Option<Option<f64>>,
}

fn write_table<T: Serialize, W: Write>(
    rows: &[T],
    format: Format,
    mut out: W,
    ab: Option<&PrecoderAb>,
) -> Result<()> {
    match format {
        Format::Csv => {
            let mut wtr = csv::Writer::from_writer(out);
            for r in rows {
                wtr.serialize(r)?;
            }
            wtr.flush()?;
        }
        Format::Json => {
            let env = Envelope {
                schema: SCHEMA,
                rows,
                target_ber: ab.map(|a| a.target_ber),
                gain_db: ab.map(|a| a.gain_db),
            };
            serde_json::to_writer_pretty(&mut out, &env)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<()> {
    write_table(rows, format, out, None)
}

/// CSV holds the paired rows only; JSON also carries the gain estimate.
pub fn write_precoder_ab<W: Write>(ab: &PrecoderAb, format: Format, out: W) -> Result<()> {
    write_table(&ab.rows, format, out, Some(ab))
}

pub fn write_bound_rows<W: Write>(rows: &[BoundRow], format: Format, out: W) -> Result<()> {
    write_table(rows, format, out, None)
}

pub fn read_rows_csv<R: std::io::Read>(input: R) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(HarnessError::from))
        .collect()
}
