//! Reader for the comma-separated survey file: id, 12 reals, 19 `CL` labels.

use std::collections::HashSet;
use std::io::BufRead;

use gasvm_core::data::{Record, UsageClass, DRUG_COUNT, PSYCHOSOCIAL_COUNT};

use crate::error::{Error, Result};

pub const COLUMN_COUNT: usize = 1 + PSYCHOSOCIAL_COUNT + DRUG_COUNT;

/// Parses every non-blank line. Errors carry the 1-based line number.
pub fn parse_records(input: impl BufRead) -> Result<Vec<Record>> {
    let mut records = Vec::new();
    let mut ids = HashSet::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            reason: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let record = parse_line(line).map_err(|reason| Error::Parse { line: line_no, reason })?;
        if !ids.insert(record.id) {
            return Err(Error::Parse {
                line: line_no,
                reason: format!("duplicate id {}", record.id),
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn parse_line(line: &str) -> std::result::Result<Record, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != COLUMN_COUNT {
        return Err(format!("expected {COLUMN_COUNT} columns, found {}", fields.len()));
    }
    let id = fields[0]
        .parse::<u32>()
        .map_err(|_| format!("column 1: invalid id {:?}", fields[0]))?;

    let mut psychosocial = [0.0; PSYCHOSOCIAL_COUNT];
    for (k, slot) in psychosocial.iter_mut().enumerate() {
        let raw = fields[1 + k];
        *slot = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("column {}: invalid number {raw:?}", k + 2))?;
    }

    let mut drugs = [UsageClass::NEVER_USED; DRUG_COUNT];
    for (k, slot) in drugs.iter_mut().enumerate() {
        let col = 1 + PSYCHOSOCIAL_COUNT + k;
        let raw = fields[col];
        *slot = raw
            .parse::<UsageClass>()
            .map_err(|()| format!("column {}: unknown class label {raw:?}", col + 1))?;
    }
    Ok(Record {
        id,
        psychosocial,
        drugs,
    })
}
