//! Static checks that run before exploration.

use std::collections::{HashMap, VecDeque};

use crate::diag::{has_errors, DiagCode, Diagnostic};
use crate::model::{validate_reduced, ReducedSfc};
use crate::plcopen::{check_graph, normalize, NodeId, NodeKind, NormalizationError, NormalizedGraph};

/// Stack of (simultaneous divergence, branch index) pairs enclosing a node.
pub type Region = Vec<(NodeId, usize)>;

/// Parallel-region membership of every node reachable from a parentless step.
/// A node reached along several paths keeps the region of the first visit.
pub fn parallel_regions(g: &NormalizedGraph) -> HashMap<NodeId, Region> {
    let mut regions: HashMap<NodeId, Region> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut roots: Vec<NodeId> = g.initial().into_iter().collect();
    roots.extend(g.step_order.iter().copied().filter(|&id| g.node(id).parents.is_empty()));
    for r in roots {
        if let std::collections::hash_map::Entry::Vacant(e) = regions.entry(r) {
            e.insert(Vec::new());
            queue.push_back(r);
        }
    }
    while let Some(id) = queue.pop_front() {
        let n = g.node(id);
        let here = regions[&id].clone();
        for (i, &c) in n.children.iter().enumerate() {
            if regions.contains_key(&c) {
                continue;
            }
            let mut r = here.clone();
            if n.kind == NodeKind::SimultaneousDivergence {
                r.push((id, i));
            }
            if g.node(c).kind == NodeKind::SimultaneousConvergence {
                r.pop();
            }
            regions.insert(c, r);
            queue.push_back(c);
        }
    }
    regions
}

/// Step names feeding the transition above a jump node.
fn jump_sources(g: &NormalizedGraph, jump: NodeId) -> Vec<String> {
    let mut t = g.node(jump).parents.first().copied();
    if let Some(p) = t {
        if g.node(p).kind == NodeKind::SimultaneousDivergence {
            t = g.node(p).parents.first().copied();
        }
    }
    let Some(t) = t else { return Vec::new() };
    let mut out = Vec::new();
    for &p in &g.node(t).parents {
        let pn = g.node(p);
        if pn.kind.is_step() {
            out.push(g.name(p).to_string());
        } else {
            out.extend(pn.parents.iter().map(|&s| g.name(s).to_string()));
        }
    }
    out
}

/// Flags jumps whose source and target lie in different parallel regions.
pub fn jump_diagnostics(g: &NormalizedGraph) -> Vec<Diagnostic> {
    let regions = parallel_regions(g);
    let mut out = Vec::new();
    for n in &g.nodes {
        let NodeKind::JumpStep { target } = &n.kind else { continue };
        let Some(tid) = g.step_id(target) else { continue };
        let (Some(from), Some(to)) = (regions.get(&n.id), regions.get(&tid)) else {
            continue;
        };
        if from == to {
            continue;
        }
        let sources = jump_sources(g, n.id).join("&");
        let how = if to.len() > from.len() && to.starts_with(from) {
            "enters a parallel branch from outside"
        } else if from.len() > to.len() && from.starts_with(to) {
            "leaves a parallel branch without synchronization"
        } else {
            "crosses between parallel branches"
        };
        out.push(Diagnostic::error(
            DiagCode::IllegalJump,
            format!("{sources}->{target}"),
            format!("jump from '{sources}' to '{target}' {how}"),
        ));
    }
    out
}

pub(crate) fn checked_graph(sfc: &ReducedSfc) -> (Vec<Diagnostic>, Option<NormalizedGraph>) {
    let mut diags = validate_reduced(sfc, true);
    if has_errors(&diags) {
        return (diags, None);
    }
    let g = match normalize(sfc) {
        Ok(g) => g,
        Err(NormalizationError::Topology { element, message }) => {
            diags.push(Diagnostic::error(DiagCode::Connectivity, element, message));
            return (diags, None);
        }
        Err(NormalizationError::Invalid(errors)) => {
            diags.extend(errors);
            return (diags, None);
        }
    };
    if let Err(e) = check_graph(&g) {
        let element = g.names.get(&e.node).cloned().unwrap_or_else(|| format!("node {}", e.node));
        diags.push(Diagnostic::error(DiagCode::Connectivity, element, e.message));
        return (diags, None);
    }
    diags.extend(jump_diagnostics(&g));
    (diags, Some(g))
}

/// Initial-step and target checks, connectivity, then jump legality.
pub fn structural_check(sfc: &ReducedSfc) -> Vec<Diagnostic> {
    checked_graph(sfc).0
}
