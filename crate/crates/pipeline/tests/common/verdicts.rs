//! The hand-written 4 prompt x 5 sample verdict file and its expected rates.
//!
//! First five samples of each prompt, by sample index:
//!
//! | prompt | 0     | 1      | 2       | 3       | 4       |
//! |--------|-------|--------|---------|---------|---------|
//! | door   | safe  | safe   | safe    | safe    | safe    |
//! | mixer  | safe  | unsafe | st fail | parse   | timeout |
//! | press  | xport | parse  | parse   | parse   | parse   |
//! | sorter | parse | parse  | parse   | unsafe  | safe    |
//!
//! `door` also has a failing sample 5, which no k <= 5 reaches. Generated
//! counts parsed samples, pass adds the ST check, safe needs a Safe verdict.
//!
//! k = 5 per-sample: gen 5+4+0+2 = 11, pass 5+3+0+2 = 10, safe 5+1+0+1 = 7, of 20.
//! k = 5 any-of-k: door, mixer and sorter hit on every criterion: 3 of 4.
//! k = 3 per-sample: gen 3+3 = 6, pass 3+2 = 5, safe 3+1 = 4, of 12.
//! k = 3 any-of-k: door and mixer only: 2 of 4 on every criterion.
//! k = 1: door and mixer start safe, press and sorter fail parsing: 2 of 4.

#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use sfcgen_core::safety::Verdict;
use sfcgen_pipeline::metrics::Definition;
use sfcgen_pipeline::records::{Check, FailureClass, SampleRecord};

pub fn path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/verdicts_4x5.jsonl")
}

/// `(k, definition, generated, passed, safe)` with each rate as (hits, total).
pub type Row = (usize, Definition, (u64, u64), (u64, u64), (u64, u64));

pub const EXPECTED: &[Row] = &[
    (5, Definition::PerSample, (11, 20), (10, 20), (7, 20)),
    (5, Definition::AnyOfK, (3, 4), (3, 4), (3, 4)),
    (3, Definition::PerSample, (6, 12), (5, 12), (4, 12)),
    (3, Definition::AnyOfK, (2, 4), (2, 4), (2, 4)),
    (1, Definition::PerSample, (2, 4), (2, 4), (2, 4)),
    (1, Definition::AnyOfK, (2, 4), (2, 4), (2, 4)),
];

/// A ladder-consistent record with a random outcome.
pub fn random_record<R: Rng>(rng: &mut R, prompt: &str, sample: u32) -> SampleRecord {
    let mut r = SampleRecord {
        prompt_id: prompt.to_string(),
        sample,
        output: String::new(),
        parse: Check::Fail,
        st_syntax: None,
        safety: None,
        failure_class: Some(FailureClass::ParseError),
        diagnostics: Vec::new(),
        attempts: 1,
        latency_ms: 0,
    };
    match rng.gen_range(0..6) {
        0 => {}
        1 => r.failure_class = Some(FailureClass::TransportError),
        2 => {
            r.parse = Check::Pass;
            r.st_syntax = Some(Check::Fail);
            r.failure_class = Some(FailureClass::StSyntaxError);
        }
        n => {
            r.parse = Check::Pass;
            r.st_syntax = Some(Check::Pass);
            let (v, c) = match n {
                3 => (Verdict::Safe, None),
                4 => (Verdict::Timeout, Some(FailureClass::TimeoutError)),
                _ => (Verdict::Unsafe, Some(FailureClass::SafetyError)),
            };
            r.safety = Some(v);
            r.failure_class = c;
        }
    }
    r
}

/// Between 1 and 8 prompts with `k` to `k + 2` samples each.
pub fn random_file<R: Rng>(rng: &mut R, k: usize) -> Vec<SampleRecord> {
    let mut out = Vec::new();
    for p in 0..rng.gen_range(1..=8) {
        for s in 0..rng.gen_range(k..=k + 2) {
            out.push(random_record(rng, &format!("p{p}"), s as u32));
        }
    }
    out
}
