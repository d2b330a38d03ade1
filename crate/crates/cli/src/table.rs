// SPDX-License-Identifier: Apache-2.0

//! CSV in and out. Numbers use `.` as decimal separator and the shortest
//! representation that round-trips.

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub fn to_csv<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Reads a two-column numeric CSV whose header must be `want`.
pub fn read_pairs(text: &str, want: [&str; 2]) -> CliResult<Vec<(f64, f64)>> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| CliError::Usage(format!("bad CSV header: {e}")))?;
    if header.iter().collect::<Vec<_>>() != want {
        return Err(CliError::Usage(format!(
            "expected CSV columns `{}`, found `{}`",
            want.join(","),
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| CliError::Usage(format!("CSV row {}: {e}", i + 1))))
        .collect()
}
