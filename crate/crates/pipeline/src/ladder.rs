//! Parse, ST and safety checks applied to one model answer.

use sfcgen_core::reduced::{parse_reduced, recognize, Classification};
use sfcgen_core::safety::{classify_failure, verify, VerifyLimits};
use sfcgen_core::st::check_chart;
use sfcgen_core::Diagnostic;

use crate::records::{Check, FailureClass, SampleRecord};

/// Strips surrounding whitespace and a Markdown code fence, if any.
pub fn extract_document(output: &str) -> &str {
    let t = output.trim();
    let Some(rest) = t.strip_prefix("```") else { return t };
    let body = rest.split_once('\n').map_or("", |(_, b)| b);
    body.trim_end().strip_suffix("```").unwrap_or(body).trim()
}

/// Runs the ladder on `output`. Latency and attempt count are left for the
/// caller. With `screen` set, the recognizer's verdict on the raw answer is
/// added to the diagnostics of answers that fail to parse.
pub fn evaluate(prompt_id: &str, sample: u32, output: &str, limits: &VerifyLimits, screen: bool) -> SampleRecord {
    let mut rec = SampleRecord {
        prompt_id: prompt_id.to_string(),
        sample,
        output: output.to_string(),
        parse: Check::Fail,
        st_syntax: None,
        safety: None,
        failure_class: None,
        diagnostics: Vec::new(),
        attempts: 1,
        latency_ms: 0,
    };
    let doc = extract_document(output);
    let sfc = match parse_reduced(doc) {
        Ok(s) => s,
        Err(e) => {
            rec.failure_class = Some(FailureClass::ParseError);
            rec.diagnostics.push(format!("parse: {e}"));
            if screen {
                match recognize(doc.as_bytes()) {
                    Err(r) => rec.diagnostics.push(format!("screen: not canonical from byte {}", r.position)),
                    Ok(Classification::ValidPrefix) => rec.diagnostics.push("screen: document is truncated".into()),
                    Ok(Classification::ValidComplete) => {}
                }
            }
            return rec;
        }
    };
    rec.parse = Check::Pass;

    let st: Vec<Diagnostic> = check_chart(&sfc).into_iter().filter(Diagnostic::is_error).collect();
    if !st.is_empty() {
        rec.st_syntax = Some(Check::Fail);
        rec.failure_class = Some(FailureClass::StSyntaxError);
        rec.diagnostics.extend(st.iter().map(ToString::to_string));
        return rec;
    }
    rec.st_syntax = Some(Check::Pass);

    let report = verify(&sfc, limits);
    rec.safety = Some(report.verdict);
    if let Ok(class) = classify_failure(&report) {
        rec.failure_class = Some(class.into());
        rec.diagnostics
            .extend(report.diagnostics.iter().filter(|d| d.is_error()).map(ToString::to_string));
        rec.diagnostics
            .extend(report.violations.iter().map(|v| format!("{:?}: {}", v.kind, v.element)));
    }
    rec
}
