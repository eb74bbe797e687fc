//! Breadth-first exploration of reachable markings.

use std::collections::HashMap;
use std::time::Instant;

use super::firing::{get, Bits, Fired, FiringModel, Marking};
use super::{SafetyReport, Verdict, VerifyLimits, Violation, ViolationKind};
use crate::plcopen::{NodeId, NormalizedGraph};

struct Search {
    states: Vec<Bits>,
    /// Predecessor state and the transition fired to reach it.
    parent: Vec<Option<(usize, NodeId)>>,
    overflows: Vec<Violation>,
    complete: bool,
}

impl Search {
    fn trace(&self, mut i: usize) -> Vec<Vec<NodeId>> {
        let mut out = Vec::new();
        while let Some((p, t)) = self.parent[i] {
            out.push(vec![t]);
            i = p;
        }
        out.reverse();
        out
    }
}

fn search(model: &FiringModel, limits: &VerifyLimits) -> Search {
    let start = Instant::now();
    let init = model.initial_bits();
    let mut index: HashMap<Bits, usize> = HashMap::new();
    index.insert(init.clone(), 0);
    let mut s = Search {
        states: vec![init],
        parent: vec![None],
        overflows: Vec::new(),
        complete: true,
    };
    let mut reported = vec![false; model.steps.len()];
    let mut head = 0;
    'outer: while head < s.states.len() {
        if head % 256 == 0 && start.elapsed() > limits.max_time {
            s.complete = false;
            break;
        }
        let cur = s.states[head].clone();
        for f in &model.firings {
            if !model.enabled(&cur, f) {
                continue;
            }
            match model.fire(&cur, f) {
                Fired::Overflow(step) => {
                    if !reported[step] {
                        reported[step] = true;
                        let mut trace = s.trace(head);
                        trace.push(vec![f.id]);
                        s.overflows.push(Violation {
                            kind: ViolationKind::TokenOverflow,
                            element: model.steps[step].clone(),
                            trace,
                        });
                    }
                }
                Fired::Ok(next) => {
                    if index.contains_key(&next) {
                        continue;
                    }
                    if s.states.len() >= limits.max_states {
                        s.complete = false;
                        break 'outer;
                    }
                    index.insert(next.clone(), s.states.len());
                    s.states.push(next);
                    s.parent.push(Some((head, f.id)));
                }
            }
        }
        head += 1;
    }
    s
}

/// Explores the guard-free state space of `graph` within `limits`.
pub fn explore(graph: &NormalizedGraph, limits: &VerifyLimits) -> SafetyReport {
    let start = Instant::now();
    let model = FiringModel::from_graph(graph);
    let s = search(&model, limits);
    let mut violations = s.overflows.clone();
    if s.complete {
        let mut seen: Bits = vec![0u64; model.words()].into_boxed_slice();
        for st in &s.states {
            for (w, x) in seen.iter_mut().zip(st.iter()) {
                *w |= x;
            }
        }
        for (i, name) in model.steps.iter().enumerate() {
            if !get(&seen, i) {
                violations.push(Violation {
                    kind: ViolationKind::UnreachableStep,
                    element: name.clone(),
                    trace: Vec::new(),
                });
            }
        }
        for f in model.firings.iter().filter(|f| f.synchronizing) {
            if !s.states.iter().any(|st| model.enabled(st, f)) {
                violations.push(Violation {
                    kind: ViolationKind::UnattainableConvergence,
                    element: convergence_name(&model, f.sources.as_slice()),
                    trace: Vec::new(),
                });
            }
        }
    }
    let verdict = if !violations.is_empty() {
        Verdict::Unsafe
    } else if s.complete {
        Verdict::Safe
    } else {
        Verdict::Timeout
    };
    SafetyReport {
        verdict,
        violations,
        diagnostics: Vec::new(),
        explored_states: s.states.len() as u64,
        elapsed: start.elapsed(),
    }
}

/// Joined names of the converging steps, e.g. `FillA&FillB`.
pub(crate) fn convergence_name(model: &FiringModel, sources: &[usize]) -> String {
    sources.iter().map(|&i| model.steps[i].as_str()).collect::<Vec<_>>().join("&")
}

/// All reachable markings in discovery order, or `None` when the limits
/// cut the search short.
pub fn reachable_markings(graph: &NormalizedGraph, limits: &VerifyLimits) -> Option<Vec<Marking>> {
    let model = FiringModel::from_graph(graph);
    let s = search(&model, limits);
    s.complete
        .then(|| s.states.iter().map(|b| model.marking(b)).collect())
}
