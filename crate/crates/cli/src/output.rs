// SPDX-License-Identifier: Apache-2.0
//! Ledger rows and atomically written artifacts.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use cellprobe::harness::report::CSV_HEADER;
use cellprobe::ExperimentReport;
use tempfile::NamedTempFile;

use crate::failure::Failure;

pub const TIMESTAMP_COLUMN: &str = "timestamp";

/// Writes `bytes` to a sibling temp file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)?;
    Ok(())
}

/// Appends one row per report. Existing rows are kept byte for byte unless
/// `fresh`, in which case the ledger starts over with just a header.
pub fn append_ledger(path: &Path, reports: &[ExperimentReport], fresh: bool) -> Result<(), Failure> {
    let mut bytes = if fresh {
        Vec::new()
    } else {
        match std::fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        }
    };
    if !bytes.is_empty() && !bytes.ends_with(b"\n") {
        bytes.push(b'\n');
    }
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
        .to_string();
    let mut w = csv::Writer::from_writer(Vec::new());
    if bytes.is_empty() {
        w.write_record(CSV_HEADER.iter().copied().chain([TIMESTAMP_COLUMN]))?;
    }
    for r in reports {
        let fields = r.csv_fields();
        w.write_record(fields.iter().map(String::as_str).chain([stamp.as_str()]))?;
    }
    bytes.extend(w.into_inner().map_err(|e| Failure::new("io", e.to_string()))?);
    write_atomic(path, &bytes)
}
