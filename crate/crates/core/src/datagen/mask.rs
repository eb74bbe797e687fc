//! Subgraph masking for fill-in-the-middle examples.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::ReducedSfc;
use crate::reduced::{serialize_with_spans, CodecError};

/// Random-walk attempts before falling back to enumerating windows.
const WALK_ATTEMPTS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskParams {
    pub min_steps: usize,
    pub max_steps: usize,
}

impl Default for MaskParams {
    fn default() -> Self {
        MaskParams {
            min_steps: 1,
            max_steps: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FimExample {
    pub chart_id: String,
    pub prefix: String,
    pub middle: String,
    pub suffix: String,
    pub masked_steps: Vec<String>,
}

impl FimExample {
    pub fn reconstruct(&self) -> String {
        [self.prefix.as_str(), &self.middle, &self.suffix].concat()
    }
}

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("mask parameters need 1 <= min_steps <= max_steps, got {min}..{max}")]
    InvalidParams { min: usize, max: usize },
    #[error("chart {chart} is too small to mask: {reason}")]
    TooSmall { chart: String, reason: String },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

fn adjacency(sfc: &ReducedSfc) -> Vec<Vec<usize>> {
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); sfc.steps.len()];
    for (i, step) in sfc.steps.iter().enumerate() {
        for e in &step.children {
            if let Some(j) = sfc.step_index(&e.target) {
                if i != j {
                    adj[i].insert(j);
                    adj[j].insert(i);
                }
            }
        }
    }
    adj.into_iter().map(|s| s.into_iter().collect()).collect()
}

fn contiguous(cluster: &BTreeSet<usize>) -> bool {
    match (cluster.first(), cluster.last()) {
        (Some(a), Some(b)) => b - a + 1 == cluster.len(),
        _ => false,
    }
}

fn connected(adj: &[Vec<usize>], cluster: &BTreeSet<usize>) -> bool {
    let Some(&start) = cluster.first() else { return false };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if cluster.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len() == cluster.len()
}

fn walk(rng: &mut ChaCha8Rng, adj: &[Vec<usize>], size: usize) -> BTreeSet<usize> {
    let mut cur = rng.gen_range(0..adj.len());
    let mut cluster = BTreeSet::from([cur]);
    for _ in 0..size * 8 {
        if cluster.len() == size || adj[cur].is_empty() {
            break;
        }
        cur = adj[cur][rng.gen_range(0..adj[cur].len())];
        cluster.insert(cur);
    }
    cluster
}

/// Masks a connected cluster of whole step entries. Clusters come from a
/// seeded random walk on the undirected step graph; a cluster whose entries
/// are not adjacent in the document is re-sampled, and after repeated misses
/// one of the connected contiguous windows is drawn instead.
pub fn mask_subgraph(sfc: &ReducedSfc, seed: u64, params: MaskParams) -> Result<FimExample, MaskError> {
    let (min, max) = (params.min_steps, params.max_steps);
    if min == 0 || min > max {
        return Err(MaskError::InvalidParams { min, max });
    }
    let n = sfc.steps.len();
    if n <= min {
        return Err(MaskError::TooSmall {
            chart: sfc.pou_name.clone(),
            reason: format!("{n} steps, need more than {min}"),
        });
    }
    // at least one step stays visible
    let max = max.min(n - 1);
    let doc = serialize_with_spans(sfc)?;
    let adj = adjacency(sfc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut chosen = None;
    for _ in 0..WALK_ATTEMPTS {
        let size = rng.gen_range(min..=max);
        let c = walk(&mut rng, &adj, size);
        if c.len() == size && contiguous(&c) {
            chosen = Some(c);
            break;
        }
    }
    let cluster = match chosen {
        Some(c) => c,
        None => {
            let windows: Vec<BTreeSet<usize>> = (min..=max)
                .flat_map(|len| (0..=n - len).map(move |i| (i..i + len).collect::<BTreeSet<_>>()))
                .filter(|w| connected(&adj, w))
                .collect();
            if windows.is_empty() {
                return Err(MaskError::TooSmall {
                    chart: sfc.pou_name.clone(),
                    reason: format!("no connected run of {min} to {max} consecutive steps"),
                });
            }
            windows[rng.gen_range(0..windows.len())].clone()
        }
    };

    let first = *cluster.first().expect("non-empty");
    let last = *cluster.last().expect("non-empty");
    let (start, end) = (doc.step_spans[first].start, doc.step_spans[last].end);
    Ok(FimExample {
        chart_id: sfc.pou_name.clone(),
        prefix: doc.text[..start].to_string(),
        middle: doc.text[start..end].to_string(),
        suffix: doc.text[end..].to_string(),
        masked_steps: cluster.iter().map(|&i| sfc.steps[i].name.clone()).collect(),
    })
}

/// `count` examples with seeds `seed`, `seed + 1`, ...
pub fn fim_examples(
    sfc: &ReducedSfc,
    seed: u64,
    count: usize,
    params: MaskParams,
) -> Result<Vec<FimExample>, MaskError> {
    (0..count as u64)
        .map(|i| mask_subgraph(sfc, seed.wrapping_add(i), params))
        .collect()
}

/// Whether the named steps form a connected subgraph of the undirected step graph.
pub fn is_connected_cluster(sfc: &ReducedSfc, names: &[String]) -> bool {
    let adj = adjacency(sfc);
    let idx: Option<BTreeSet<usize>> = names.iter().map(|n| sfc.step_index(n)).collect();
    idx.is_some_and(|c| connected(&adj, &c))
}
