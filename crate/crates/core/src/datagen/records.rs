//! Line-delimited training records.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::mask::FimExample;
use crate::model::ReducedSfc;
use crate::reduced::{serialize_reduced, CodecError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainingRecord {
    Ntp {
        chart_id: String,
        prompt: String,
        completion: String,
    },
    Fim {
        chart_id: String,
        prefix: String,
        middle: String,
        suffix: String,
        masked_steps: Vec<String>,
    },
}

impl From<FimExample> for TrainingRecord {
    fn from(ex: FimExample) -> Self {
        TrainingRecord::Fim {
            chart_id: ex.chart_id,
            prefix: ex.prefix,
            middle: ex.middle,
            suffix: ex.suffix,
            masked_steps: ex.masked_steps,
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

/// Prompt plus the whole canonical document as completion.
pub fn ntp_sequence(sfc: &ReducedSfc, prompt: &str) -> Result<TrainingRecord, CodecError> {
    Ok(TrainingRecord::Ntp {
        chart_id: sfc.pou_name.clone(),
        prompt: prompt.to_string(),
        completion: serialize_reduced(sfc)?,
    })
}

pub fn write_records<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a TrainingRecord>,
) -> Result<usize, RecordError> {
    let mut n = 0;
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|source| RecordError::Json { line: n + 1, source })?;
        out.write_all(b"\n")?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

/// Reads records, skipping blank lines.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<TrainingRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|source| RecordError::Json { line: i + 1, source })?);
    }
    Ok(out)
}
