//! Benchmark result rows and their CSV form.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One solver run. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub matrix_name: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub solver: String,
    pub preconditioner: String,
    pub converged: bool,
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub wall_time_seconds: f64,
}

impl RunRecord {
    pub const HEADER: [&'static str; 8] = [
        "matrix_name",
        "N",
        "solver",
        "preconditioner",
        "converged",
        "iterations",
        "final_relative_residual",
        "wall_time_seconds",
    ];
}

/// Writes the header (always) followed by one row per record.
pub fn write_records<W: Write>(w: W, records: &[RunRecord]) -> Result<()> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(RunRecord::HEADER)?;
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_records_file(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let path = path.as_ref();
    File::create(path)
        .map_err(Error::from)
        .and_then(|f| write_records(f, records))
        .map_err(|e| e.in_file(path))
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != RunRecord::HEADER {
        return Err(Error::Usage(format!("unexpected CSV header {header:?}")));
    }
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn read_records_file(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    File::open(path).map_err(Error::from).and_then(read_records).map_err(|e| e.in_file(path))
}
