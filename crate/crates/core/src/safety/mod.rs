//! Safety ladder: structural checks, token-semantics model checking of the
//! guard-free chart, failure classification and SMV export.

mod explore;
mod firing;
mod smv;
mod structural;

use std::fmt;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{DiagCode, Diagnostic};
use crate::model::ReducedSfc;
use crate::plcopen::NodeId;

pub use explore::{explore, reachable_markings};
pub use firing::{Firing, FiringModel, Marking, ReplayError};
pub use smv::emit_smv;
pub use structural::{jump_diagnostics, parallel_regions, structural_check, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Safe,
    Unsafe,
    Timeout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ViolationKind {
    TokenOverflow,
    UnreachableStep,
    UnattainableConvergence,
    IllegalJump,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Step, convergence (`A&B`) or jump (`A->B`) concerned.
    pub element: String,
    /// Fired transition sets leading to the violation; empty for violations
    /// that are not witnessed by a run.
    pub trace: Vec<Vec<NodeId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SafetyReport {
    pub verdict: Verdict,
    pub violations: Vec<Violation>,
    /// Structural findings, including warnings on charts that passed.
    pub diagnostics: Vec<Diagnostic>,
    pub explored_states: u64,
    pub elapsed: Duration,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe
    }

    /// Single-line JSON record.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report is plain data")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LimitsError {
    #[error("max_states must be positive")]
    ZeroStates,
    #[error("max_time must be positive")]
    ZeroTime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyLimits {
    pub max_states: usize,
    pub max_time: Duration,
}

impl VerifyLimits {
    pub fn new(max_states: usize, max_time: Duration) -> Result<Self, LimitsError> {
        if max_states == 0 {
            return Err(LimitsError::ZeroStates);
        }
        if max_time.is_zero() {
            return Err(LimitsError::ZeroTime);
        }
        Ok(VerifyLimits { max_states, max_time })
    }

    /// Six-hour budget for unattended batch runs.
    pub fn batch() -> Self {
        VerifyLimits {
            max_states: usize::MAX,
            max_time: Duration::from_secs(6 * 3600),
        }
    }
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits {
            max_states: 1_000_000,
            max_time: Duration::from_secs(60),
        }
    }
}

/// Runs the whole ladder. Structural errors short-circuit before exploration.
pub fn verify(sfc: &ReducedSfc, limits: &VerifyLimits) -> SafetyReport {
    let start = Instant::now();
    let (diagnostics, graph) = structural::checked_graph(sfc);
    let blocked = diagnostics.iter().any(Diagnostic::is_error);
    match graph {
        Some(g) if !blocked => {
            let mut report = explore(&g, limits);
            report.diagnostics = diagnostics;
            report.elapsed = start.elapsed();
            report
        }
        _ => {
            let violations = diagnostics
                .iter()
                .filter(|d| d.code == DiagCode::IllegalJump)
                .map(|d| Violation {
                    kind: ViolationKind::IllegalJump,
                    element: d.element.clone(),
                    trace: Vec::new(),
                })
                .collect();
            SafetyReport {
                verdict: Verdict::Unsafe,
                violations,
                diagnostics,
                explored_states: 0,
                elapsed: start.elapsed(),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureClass {
    InitStepError,
    TransitionError,
    SafetyError,
    TimeoutError,
}

impl FailureClass {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureClass::InitStepError => "InitStepError",
            FailureClass::TransitionError => "TransitionError",
            FailureClass::SafetyError => "SafetyError",
            FailureClass::TimeoutError => "TimeoutError",
        }
    }
}

impl fmt::Display for FailureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("a safe report has no failure class")]
pub struct SafeReportError;

/// Maps a failed report to its category; earlier categories win.
pub fn classify_failure(report: &SafetyReport) -> Result<FailureClass, SafeReportError> {
    if report.verdict == Verdict::Safe {
        return Err(SafeReportError);
    }
    let has = |codes: &[DiagCode]| {
        report
            .diagnostics
            .iter()
            .any(|d| d.is_error() && codes.contains(&d.code))
    };
    Ok(if has(&[DiagCode::InitStepError]) {
        FailureClass::InitStepError
    } else if has(&[DiagCode::TransitionError, DiagCode::DuplicateName, DiagCode::BadIdentifier]) {
        FailureClass::TransitionError
    } else if !report.violations.is_empty() || report.diagnostics.iter().any(Diagnostic::is_error) {
        FailureClass::SafetyError
    } else if report.verdict == Verdict::Timeout {
        FailureClass::TimeoutError
    } else {
        FailureClass::SafetyError
    })
}
