//! Guard-free token semantics over a normalized graph.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::plcopen::{NodeId, NodeKind, NormalizedGraph};

/// Set of simultaneously active steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Marking {
    pub active: BTreeSet<String>,
}

impl Marking {
    pub fn of<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Marking {
            active: names.into_iter().map(Into::into).collect(),
        }
    }
}

/// One transition node with its source and target steps as bit indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub id: NodeId,
    pub sources: Vec<usize>,
    /// May repeat a step when two branches land on it.
    pub targets: Vec<usize>,
    /// Fed by a simultaneous convergence.
    pub synchronizing: bool,
}

pub(crate) type Bits = Box<[u64]>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiringModel {
    /// Step names in chart order; position is the bit index.
    pub steps: Vec<String>,
    pub initial: Option<usize>,
    /// Ordered by transition node id.
    pub firings: Vec<Firing>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("transition {0} does not exist")]
    UnknownTransition(NodeId),
    #[error("transition {id} is not enabled at firing {index}")]
    NotEnabled { index: usize, id: NodeId },
    #[error("firing {index} marks step '{step}' twice")]
    Overflow { index: usize, step: String },
}

pub(crate) enum Fired {
    Ok(Bits),
    Overflow(usize),
}

impl FiringModel {
    /// Builds the firing relation. Dangling links in a malformed graph are
    /// skipped rather than reported; run `check_graph` first when that matters.
    pub fn from_graph(g: &NormalizedGraph) -> Self {
        let steps: Vec<String> = g.step_order.iter().map(|&id| g.name(id).to_string()).collect();
        let bit = |id: NodeId| g.step_order.iter().position(|&s| s == id);
        let by_name = |name: &str| steps.iter().position(|s| s == name);
        let initial = g.initial().and_then(bit);

        let mut firings = Vec::new();
        for t in g.transitions() {
            let mut sources = Vec::new();
            let mut synchronizing = false;
            for &p in &t.parents {
                let Some(pn) = g.get(p) else { continue };
                match pn.kind {
                    NodeKind::SelectionDivergence => sources.extend(pn.parents.iter().filter_map(|&s| bit(s))),
                    NodeKind::SimultaneousConvergence => {
                        synchronizing = true;
                        sources.extend(pn.parents.iter().filter_map(|&s| bit(s)));
                    }
                    _ => sources.extend(bit(p)),
                }
            }
            let mut targets = Vec::new();
            let resolve = |id: NodeId, targets: &mut Vec<usize>| {
                let Some(n) = g.get(id) else { return };
                match &n.kind {
                    NodeKind::JumpStep { target } => targets.extend(by_name(target)),
                    NodeKind::SelectionConvergence => targets.extend(n.children.iter().filter_map(|&c| bit(c))),
                    _ => targets.extend(bit(id)),
                }
            };
            for &c in &t.children {
                match g.get(c).map(|n| &n.kind) {
                    Some(NodeKind::SimultaneousDivergence) => {
                        for &cc in &g.node(c).children {
                            resolve(cc, &mut targets);
                        }
                    }
                    _ => resolve(c, &mut targets),
                }
            }
            sources.sort_unstable();
            sources.dedup();
            firings.push(Firing {
                id: t.id,
                sources,
                targets,
                synchronizing,
            });
        }
        FiringModel {
            steps,
            initial,
            firings,
        }
    }

    pub(crate) fn words(&self) -> usize {
        self.steps.len().div_ceil(64).max(1)
    }

    pub(crate) fn initial_bits(&self) -> Bits {
        let mut b = vec![0u64; self.words()].into_boxed_slice();
        if let Some(i) = self.initial {
            set(&mut b, i);
        }
        b
    }

    pub(crate) fn enabled(&self, m: &[u64], f: &Firing) -> bool {
        !f.sources.is_empty() && f.sources.iter().all(|&s| get(m, s))
    }

    /// Fires an enabled transition: unmark sources, then mark targets.
    pub(crate) fn fire(&self, m: &[u64], f: &Firing) -> Fired {
        let mut next: Bits = m.into();
        for &s in &f.sources {
            clear(&mut next, s);
        }
        for &t in &f.targets {
            if get(&next, t) {
                return Fired::Overflow(t);
            }
            set(&mut next, t);
        }
        Fired::Ok(next)
    }

    pub fn marking(&self, bits: &[u64]) -> Marking {
        Marking {
            active: (0..self.steps.len())
                .filter(|&i| get(bits, i))
                .map(|i| self.steps[i].clone())
                .collect(),
        }
    }

    pub fn initial_marking(&self) -> Marking {
        self.marking(&self.initial_bits())
    }

    /// Applies a witness trace from the initial marking.
    pub fn replay(&self, trace: &[Vec<NodeId>]) -> Result<Marking, ReplayError> {
        let mut m = self.initial_bits();
        for (index, set) in trace.iter().enumerate() {
            for &id in set {
                let f = self
                    .firings
                    .iter()
                    .find(|f| f.id == id)
                    .ok_or(ReplayError::UnknownTransition(id))?;
                if !self.enabled(&m, f) {
                    return Err(ReplayError::NotEnabled { index, id });
                }
                m = match self.fire(&m, f) {
                    Fired::Ok(b) => b,
                    Fired::Overflow(s) => {
                        return Err(ReplayError::Overflow {
                            index,
                            step: self.steps[s].clone(),
                        })
                    }
                };
            }
        }
        Ok(self.marking(&m))
    }
}

pub(crate) fn get(b: &[u64], i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

pub(crate) fn set(b: &mut [u64], i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn clear(b: &mut [u64], i: usize) {
    b[i / 64] &= !(1 << (i % 64));
}
