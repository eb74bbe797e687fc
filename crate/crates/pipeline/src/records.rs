//! Per-sample verdict records, one JSON object per line.

use std::io::{BufRead, Write};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sfcgen_core::safety::{self, Verdict};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Pass,
    Fail,
}

/// Why a sample failed: the four verification categories plus the stages
/// that precede verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureClass {
    TransportError,
    ParseError,
    StSyntaxError,
    InitStepError,
    TransitionError,
    SafetyError,
    TimeoutError,
}

impl FailureClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureClass::TransportError => "TransportError",
            FailureClass::ParseError => "ParseError",
            FailureClass::StSyntaxError => "StSyntaxError",
            FailureClass::InitStepError => "InitStepError",
            FailureClass::TransitionError => "TransitionError",
            FailureClass::SafetyError => "SafetyError",
            FailureClass::TimeoutError => "TimeoutError",
        }
    }

    fn is_safety(self) -> bool {
        matches!(
            self,
            FailureClass::InitStepError
                | FailureClass::TransitionError
                | FailureClass::SafetyError
                | FailureClass::TimeoutError
        )
    }
}

impl From<safety::FailureClass> for FailureClass {
    fn from(c: safety::FailureClass) -> Self {
        match c {
            safety::FailureClass::InitStepError => FailureClass::InitStepError,
            safety::FailureClass::TransitionError => FailureClass::TransitionError,
            safety::FailureClass::SafetyError => FailureClass::SafetyError,
            safety::FailureClass::TimeoutError => FailureClass::TimeoutError,
        }
    }
}

impl std::fmt::Display for FailureClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn one() -> u32 {
    1
}

/// Outcome of one generated sample. Verdicts are filled in ladder order:
/// `st_syntax` only after a passing parse, `safety` only after passing ST.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub prompt_id: String,
    pub sample: u32,
    #[serde(default)]
    pub output: String,
    pub parse: Check,
    #[serde(default)]
    pub st_syntax: Option<Check>,
    #[serde(default)]
    pub safety: Option<Verdict>,
    #[serde(default)]
    pub failure_class: Option<FailureClass>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
    /// Requests spent on this sample, retries included.
    #[serde(default = "one")]
    pub attempts: u32,
    #[serde(default)]
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("record {prompt_id}#{sample}: {reason}")]
pub struct LadderError {
    pub prompt_id: String,
    pub sample: u32,
    pub reason: String,
}

impl SampleRecord {
    /// Parses and passes the ST checks.
    pub fn passed(&self) -> bool {
        self.parse == Check::Pass && self.st_syntax == Some(Check::Pass)
    }

    pub fn generated(&self) -> bool {
        self.parse == Check::Pass
    }

    pub fn safe(&self) -> bool {
        self.safety == Some(Verdict::Safe)
    }

    pub fn check_ladder(&self) -> Result<(), LadderError> {
        let fail = |reason: &str| {
            Err(LadderError {
                prompt_id: self.prompt_id.clone(),
                sample: self.sample,
                reason: reason.to_string(),
            })
        };
        if (self.parse == Check::Pass) != self.st_syntax.is_some() {
            return fail("st_syntax must be present exactly when parse passed");
        }
        if (self.st_syntax == Some(Check::Pass)) != self.safety.is_some() {
            return fail("safety must be present exactly when st_syntax passed");
        }
        match (self.safe(), self.failure_class) {
            (true, None) => Ok(()),
            (true, Some(_)) => fail("safe sample carries a failure class"),
            (false, None) => fail("failed sample lacks a failure class"),
            (false, Some(c)) => {
                let fits = if self.parse == Check::Fail {
                    matches!(c, FailureClass::ParseError | FailureClass::TransportError)
                } else if self.st_syntax == Some(Check::Fail) {
                    c == FailureClass::StSyntaxError
                } else {
                    c.is_safety() && (c == FailureClass::TimeoutError) == (self.safety == Some(Verdict::Timeout))
                };
                if fits {
                    Ok(())
                } else {
                    fail(&format!("failure class {c} does not match the verdicts"))
                }
            }
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

/// Reads records, skipping blank lines.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<SampleRecord>, RecordError> {
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

/// Append-only sink shared between worker threads; each record goes out as
/// a single write of one complete line.
pub struct RecordWriter<W: Write> {
    out: Mutex<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Self {
        RecordWriter { out: Mutex::new(out) }
    }

    pub fn append(&self, record: &SampleRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_vec(record).map_err(std::io::Error::other)?;
        line.push(b'\n');
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        out.write_all(&line)?;
        out.flush()
    }

    pub fn into_inner(self) -> W {
        self.out.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(parse: Check, st: Option<Check>, safety: Option<Verdict>, class: Option<FailureClass>) -> SampleRecord {
        SampleRecord {
            prompt_id: "p".into(),
            sample: 0,
            output: String::new(),
            parse,
            st_syntax: st,
            safety,
            failure_class: class,
            diagnostics: vec![],
            attempts: 1,
            latency_ms: 0,
        }
    }

    #[test]
    fn ladder_accepts_each_rung() {
        use Check::*;
        rec(Fail, None, None, Some(FailureClass::ParseError)).check_ladder().unwrap();
        rec(Pass, Some(Fail), None, Some(FailureClass::StSyntaxError)).check_ladder().unwrap();
        rec(Pass, Some(Pass), Some(Verdict::Unsafe), Some(FailureClass::SafetyError)).check_ladder().unwrap();
        rec(Pass, Some(Pass), Some(Verdict::Timeout), Some(FailureClass::TimeoutError)).check_ladder().unwrap();
        rec(Pass, Some(Pass), Some(Verdict::Safe), None).check_ladder().unwrap();
    }

    #[test]
    fn ladder_rejects_skipped_rungs() {
        use Check::*;
        assert!(rec(Fail, None, Some(Verdict::Safe), None).check_ladder().is_err());
        assert!(rec(Fail, Some(Pass), None, Some(FailureClass::ParseError)).check_ladder().is_err());
        assert!(rec(Pass, Some(Fail), Some(Verdict::Unsafe), Some(FailureClass::SafetyError)).check_ladder().is_err());
        assert!(rec(Pass, Some(Pass), Some(Verdict::Unsafe), Some(FailureClass::TimeoutError)).check_ladder().is_err());
        assert!(rec(Pass, Some(Pass), Some(Verdict::Safe), Some(FailureClass::SafetyError)).check_ladder().is_err());
    }

    #[test]
    fn short_records_read_with_defaults() {
        let text = "{\"prompt_id\":\"a\",\"sample\":0,\"parse\":\"fail\",\"failure_class\":\"ParseError\"}\n\n";
        let recs = read_records(text.as_bytes()).unwrap();
        assert_eq!(recs[0].attempts, 1);
        assert_eq!(recs[0].st_syntax, None);
        assert!(read_records("{".as_bytes()).is_err());
    }

    #[test]
    fn writer_emits_one_line_per_record() {
        let w = RecordWriter::new(Vec::new());
        let r = rec(Check::Pass, Some(Check::Pass), Some(Verdict::Safe), None);
        w.append(&r).unwrap();
        w.append(&r).unwrap();
        let bytes = w.into_inner();
        assert_eq!(read_records(&bytes[..]).unwrap(), vec![r.clone(), r]);
    }
}
