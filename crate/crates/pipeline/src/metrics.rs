//! Pass@k and Safe@k over verdict records.
//!
//! Two readings of "within the top k" are supported: the fraction of the
//! first k samples of every prompt that pass (per-sample, the default) and
//! the fraction of prompts with at least one passing sample among their
//! first k (any-of-k). Rates are generic over [`Scalar`] so tests can
//! compare against exact fractions.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::records::{LadderError, SampleRecord};

/// Numeric type a rate can be reported in.
pub trait Scalar: Copy + PartialOrd + fmt::Debug + fmt::Display {
    /// `hits / total`; `total` is never zero.
    fn from_counts(hits: u64, total: u64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f64 {
    fn from_counts(hits: u64, total: u64) -> Self {
        hits as f64 / total as f64
    }
    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    fn from_counts(hits: u64, total: u64) -> Self {
        (hits as f64 / total as f64) as f32
    }
    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

impl Scalar for Ratio<u64> {
    fn from_counts(hits: u64, total: u64) -> Self {
        Ratio::new(hits, total)
    }
    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Definition {
    #[default]
    PerSample,
    AnyOfK,
}

impl Definition {
    pub fn label(self) -> &'static str {
        match self {
            Definition::PerSample => "per-sample",
            Definition::AnyOfK => "any-of-k",
        }
    }
}

/// Which verdict a rate counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// Parsed as a reduced document.
    Generated,
    /// Parsed and passed the ST checks.
    Passed,
    /// Verified safe.
    Safe,
}

impl Criterion {
    fn holds(self, r: &SampleRecord) -> bool {
        match self {
            Criterion::Generated => r.generated(),
            Criterion::Passed => r.passed(),
            Criterion::Safe => r.safe(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no records")]
    NoRecords,
    #[error("prompt {prompt} has {have} samples, fewer than k = {k}")]
    TooFewSamples { prompt: String, have: usize, k: usize },
    #[error("prompt {prompt} has sample {sample} twice")]
    DuplicateSample { prompt: String, sample: u32 },
    #[error(transparent)]
    Ladder(#[from] LadderError),
}

/// First `k` samples of each prompt, by sample index, after checking the set.
fn first_k(records: &[SampleRecord], k: usize) -> Result<BTreeMap<&str, Vec<&SampleRecord>>, MetricError> {
    if k == 0 {
        return Err(MetricError::ZeroK);
    }
    if records.is_empty() {
        return Err(MetricError::NoRecords);
    }
    let mut groups: BTreeMap<&str, Vec<&SampleRecord>> = BTreeMap::new();
    for r in records {
        r.check_ladder()?;
        groups.entry(r.prompt_id.as_str()).or_default().push(r);
    }
    for (prompt, samples) in groups.iter_mut() {
        samples.sort_by_key(|r| r.sample);
        if let Some(w) = samples.windows(2).find(|w| w[0].sample == w[1].sample) {
            return Err(MetricError::DuplicateSample {
                prompt: prompt.to_string(),
                sample: w[0].sample,
            });
        }
        if samples.len() < k {
            return Err(MetricError::TooFewSamples {
                prompt: prompt.to_string(),
                have: samples.len(),
                k,
            });
        }
        samples.truncate(k);
    }
    Ok(groups)
}

fn counts(groups: &BTreeMap<&str, Vec<&SampleRecord>>, def: Definition, c: Criterion) -> (u64, u64) {
    match def {
        Definition::PerSample => {
            let all = groups.values().flatten();
            let total = all.clone().count() as u64;
            (all.filter(|r| c.holds(r)).count() as u64, total)
        }
        Definition::AnyOfK => (
            groups.values().filter(|s| s.iter().any(|r| c.holds(r))).count() as u64,
            groups.len() as u64,
        ),
    }
}

pub fn rate<S: Scalar>(records: &[SampleRecord], k: usize, def: Definition, c: Criterion) -> Result<S, MetricError> {
    let groups = first_k(records, k)?;
    let (hits, total) = counts(&groups, def, c);
    Ok(S::from_counts(hits, total))
}

pub fn pass_at_k<S: Scalar>(records: &[SampleRecord], k: usize, def: Definition) -> Result<S, MetricError> {
    rate(records, k, def, Criterion::Passed)
}

pub fn safe_at_k<S: Scalar>(records: &[SampleRecord], k: usize, def: Definition) -> Result<S, MetricError> {
    rate(records, k, def, Criterion::Safe)
}

/// A hit count over a total, kept exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Count {
    pub hits: u64,
    pub total: u64,
}

impl Count {
    pub fn rate<S: Scalar>(self) -> S {
        S::from_counts(self.hits, self.total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub k: usize,
    pub definition: Definition,
    pub prompts: usize,
    pub generated: Count,
    pub passed: Count,
    pub safe: Count,
}

pub fn score(records: &[SampleRecord], k: usize, def: Definition) -> Result<Score, MetricError> {
    let groups = first_k(records, k)?;
    let count = |c| {
        let (hits, total) = counts(&groups, def, c);
        Count { hits, total }
    };
    Ok(Score {
        k,
        definition: def,
        prompts: groups.len(),
        generated: count(Criterion::Generated),
        passed: count(Criterion::Passed),
        safe: count(Criterion::Safe),
    })
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = self.definition.label();
        for (name, c) in [("gen", self.generated), ("pass", self.passed), ("safe", self.safe)] {
            writeln!(
                f,
                "{name}@{} [{label}] = {}/{} = {:.4}",
                self.k,
                c.hits,
                c.total,
                c.rate::<f64>()
            )?;
        }
        write!(f, "prompts: {}", self.prompts)
    }
}
