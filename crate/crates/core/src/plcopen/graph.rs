//! PLCopen-style chart topology with explicit divergence and convergence
//! nodes, and the conversions to and from [`ReducedSfc`].

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::model::{validate_reduced, Edge, Interface, ReducedSfc, StepNode};

pub type NodeId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Step,
    InitialStep,
    Transition { guard: String },
    SelectionDivergence,
    SelectionConvergence,
    SimultaneousDivergence,
    SimultaneousConvergence,
    JumpStep { target: String },
}

impl NodeKind {
    pub fn is_step(&self) -> bool {
        matches!(self, NodeKind::Step | NodeKind::InitialStep)
    }

    pub fn label(&self) -> &'static str {
        match self {
            NodeKind::Step => "step",
            NodeKind::InitialStep => "initial step",
            NodeKind::Transition { .. } => "transition",
            NodeKind::SelectionDivergence => "selection divergence",
            NodeKind::SelectionConvergence => "selection convergence",
            NodeKind::SimultaneousDivergence => "simultaneous divergence",
            NodeKind::SimultaneousConvergence => "simultaneous convergence",
            NodeKind::JumpStep { .. } => "jump step",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Sorted by id.
    pub parents: Vec<NodeId>,
    /// Ordered; the order of divergence branches is significant.
    pub children: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedGraph {
    pub pou_name: String,
    pub interface: Interface,
    /// Indexed by `id - 1`.
    pub nodes: Vec<Node>,
    pub names: BTreeMap<NodeId, String>,
    pub actions: BTreeMap<NodeId, String>,
    pub comments: BTreeMap<NodeId, String>,
    /// Step nodes in chart order.
    pub step_order: Vec<NodeId>,
}

impl NormalizedGraph {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize - 1]
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        (id as usize).checked_sub(1).and_then(|i| self.nodes.get(i))
    }

    pub fn step_id(&self, name: &str) -> Option<NodeId> {
        self.names.iter().find(|(_, n)| n.as_str() == name).map(|(id, _)| *id)
    }

    pub fn name(&self, id: NodeId) -> &str {
        self.names.get(&id).map(String::as_str).unwrap_or("")
    }

    pub fn initial(&self) -> Option<NodeId> {
        self.nodes
            .iter()
            .find(|n| n.kind == NodeKind::InitialStep)
            .map(|n| n.id)
    }

    pub fn transitions(&self) -> impl Iterator<Item = &Node> {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Transition { .. }))
    }

    pub fn count(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    /// Same graph with ids reassigned by the deterministic traversal. Two
    /// graphs are equal up to relabeling iff their canonical forms are equal.
    pub fn canonical(&self) -> NormalizedGraph {
        let mut b = GraphBuilder::new(self.pou_name.clone(), self.interface.clone());
        let mut map = HashMap::new();
        for &id in &self.step_order {
            let n = self.node(id);
            let tmp = b.add_step(
                self.name(id),
                n.kind == NodeKind::InitialStep,
                self.actions.get(&id).cloned(),
                self.comments.get(&id).cloned(),
            );
            map.insert(id, tmp);
        }
        for n in &self.nodes {
            map.entry(n.id).or_insert_with(|| b.add(n.kind.clone()));
        }
        for n in &self.nodes {
            for c in &n.children {
                b.link(map[&n.id], map[c]);
            }
        }
        b.finish()
    }
}

/// Accumulates nodes with ordered child links and assigns final ids in
/// [`GraphBuilder::finish`].
#[derive(Debug, Clone)]
pub struct GraphBuilder {
    pou_name: String,
    interface: Interface,
    kinds: Vec<NodeKind>,
    children: Vec<Vec<usize>>,
    names: BTreeMap<usize, String>,
    actions: BTreeMap<usize, String>,
    comments: BTreeMap<usize, String>,
    step_order: Vec<usize>,
}

impl GraphBuilder {
    pub fn new(pou_name: impl Into<String>, interface: Interface) -> Self {
        GraphBuilder {
            pou_name: pou_name.into(),
            interface,
            kinds: Vec::new(),
            children: Vec::new(),
            names: BTreeMap::new(),
            actions: BTreeMap::new(),
            comments: BTreeMap::new(),
            step_order: Vec::new(),
        }
    }

    /// Adds a non-step node and returns its provisional handle.
    pub fn add(&mut self, kind: NodeKind) -> usize {
        self.kinds.push(kind);
        self.children.push(Vec::new());
        self.kinds.len() - 1
    }

    /// Adds a step; steps keep the order in which they are added.
    pub fn add_step(
        &mut self,
        name: &str,
        initial: bool,
        action: Option<String>,
        comment: Option<String>,
    ) -> usize {
        let h = self.add(if initial { NodeKind::InitialStep } else { NodeKind::Step });
        self.names.insert(h, name.to_string());
        if let Some(a) = action {
            self.actions.insert(h, a);
        }
        if let Some(c) = comment {
            self.comments.insert(h, c);
        }
        self.step_order.push(h);
        h
    }

    /// Appends `child` to the ordered children of `parent`.
    pub fn link(&mut self, parent: usize, child: usize) {
        self.children[parent].push(child);
    }

    /// Ids by depth-first preorder from the initial step following children in
    /// order, then from each remaining step in chart order, then leftovers.
    pub fn finish(self) -> NormalizedGraph {
        self.finish_mapped().0
    }

    /// Like [`GraphBuilder::finish`], also returning the final id of every handle.
    pub fn finish_mapped(self) -> (NormalizedGraph, Vec<NodeId>) {
        let n = self.kinds.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        let initial = self
            .step_order
            .iter()
            .copied()
            .find(|&h| self.kinds[h] == NodeKind::InitialStep);
        let roots = initial.into_iter().chain(self.step_order.iter().copied()).chain(0..n);
        for root in roots {
            if seen[root] {
                continue;
            }
            let mut stack = vec![root];
            while let Some(h) = stack.pop() {
                if seen[h] {
                    continue;
                }
                seen[h] = true;
                order.push(h);
                for &c in self.children[h].iter().rev() {
                    if !seen[c] {
                        stack.push(c);
                    }
                }
            }
        }
        let mut id_of = vec![0 as NodeId; n];
        for (i, &h) in order.iter().enumerate() {
            id_of[h] = i as NodeId + 1;
        }
        let mut nodes: Vec<Node> = order
            .iter()
            .map(|&h| Node {
                id: id_of[h],
                kind: self.kinds[h].clone(),
                parents: Vec::new(),
                children: self.children[h].iter().map(|&c| id_of[c]).collect(),
            })
            .collect();
        for i in 0..nodes.len() {
            let id = nodes[i].id;
            for c in nodes[i].children.clone() {
                nodes[c as usize - 1].parents.push(id);
            }
        }
        for node in &mut nodes {
            node.parents.sort_unstable();
        }
        let remap = |m: BTreeMap<usize, String>| m.into_iter().map(|(h, v)| (id_of[h], v)).collect();
        let graph = NormalizedGraph {
            pou_name: self.pou_name,
            interface: self.interface,
            nodes,
            names: remap(self.names),
            actions: remap(self.actions),
            comments: remap(self.comments),
            step_order: self.step_order.iter().map(|&h| id_of[h]).collect(),
        };
        (graph, id_of)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizationError {
    #[error("chart is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error("cannot normalize at {element}: {message}")]
    Topology { element: String, message: String },
}

fn topo(element: impl Into<String>, message: impl Into<String>) -> NormalizationError {
    NormalizationError::Topology {
        element: element.into(),
        message: message.into(),
    }
}

/// A transition of the normalized graph: edges sharing a guard that are
/// linked through common sources or common targets.
#[derive(Debug, Clone)]
struct TransitionGroup {
    guard: String,
    /// Step indices in document order.
    sources: Vec<usize>,
    /// (target name, is_jump) in first-appearance order.
    targets: Vec<(String, bool)>,
}

fn edge_ref(sfc: &ReducedSfc, src: usize, e: &Edge) -> String {
    format!("{}->{}", sfc.steps[src].name, e.target)
}

/// Groups edges into transitions. Returns the groups (ordered by first edge
/// in document order) and, per step, its transition indices in order of first
/// appearance.
fn transition_groups(sfc: &ReducedSfc) -> Result<(Vec<TransitionGroup>, Vec<Vec<usize>>), NormalizationError> {
    // flat edge list in document order
    let edges: Vec<(usize, &Edge)> = sfc
        .steps
        .iter()
        .enumerate()
        .flat_map(|(i, s)| s.children.iter().map(move |e| (i, e)))
        .collect();
    let mut parent: Vec<usize> = (0..edges.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut by_source: HashMap<(&str, usize), usize> = HashMap::new();
    let mut by_target: HashMap<(&str, &str, bool), usize> = HashMap::new();
    for (k, (src, e)) in edges.iter().enumerate() {
        let g = e.guard_key();
        for first in [
            *by_source.entry((g, *src)).or_insert(k),
            *by_target.entry((g, e.target.as_str(), e.is_jump)).or_insert(k),
        ] {
            let (a, b) = (find(&mut parent, first), find(&mut parent, k));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut group_of_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<TransitionGroup> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for (k, edge) in edges.iter().enumerate() {
        let r = find(&mut parent, k);
        let gi = *group_of_root.entry(r).or_insert_with(|| {
            groups.push(TransitionGroup {
                guard: edge.1.guard_key().to_string(),
                sources: Vec::new(),
                targets: Vec::new(),
            });
            members.push(Vec::new());
            groups.len() - 1
        });
        members[gi].push(k);
        let (src, e) = *edge;
        let g = &mut groups[gi];
        if !g.sources.contains(&src) {
            g.sources.push(src);
        }
        let key = (e.target.clone(), e.is_jump);
        if !g.targets.contains(&key) {
            g.targets.push(key);
        }
    }
    // Each group must be a complete source x target product without duplicates.
    for (gi, g) in groups.iter().enumerate() {
        let mut seen = std::collections::HashSet::new();
        for &k in &members[gi] {
            let (src, e) = edges[k];
            if !seen.insert((src, e.target.as_str(), e.is_jump)) {
                return Err(topo(edge_ref(sfc, src, e), "duplicate edge with identical guard"));
            }
        }
        if seen.len() != g.sources.len() * g.targets.len() {
            let (src, e) = edges[members[gi][0]];
            return Err(topo(
                edge_ref(sfc, src, e),
                format!(
                    "edges with guard '{}' connect steps {{{}}} to {{{}}} without forming a complete synchronization",
                    g.guard,
                    g.sources.iter().map(|&s| sfc.steps[s].name.as_str()).collect::<Vec<_>>().join(", "),
                    g.targets.iter().map(|(t, _)| t.as_str()).collect::<Vec<_>>().join(", "),
                ),
            ));
        }
    }
    let mut per_step: Vec<Vec<usize>> = vec![Vec::new(); sfc.steps.len()];
    for (k, (src, _)) in edges.iter().enumerate() {
        let gi = group_of_root[&find(&mut parent, k)];
        if !per_step[*src].contains(&gi) {
            per_step[*src].push(gi);
        }
    }
    Ok((groups, per_step))
}

/// Child edges of every step reordered so that edges of one transition are
/// contiguous, transitions appear in order of first use, and targets of a
/// transition follow its first-appearance order. The inverse of [`normalize`]
/// reproduces exactly this order.
pub fn canonical_edge_order(sfc: &ReducedSfc) -> Result<ReducedSfc, NormalizationError> {
    let (groups, per_step) = transition_groups(sfc)?;
    let mut out = sfc.clone();
    for (i, step) in out.steps.iter_mut().enumerate() {
        let mut children = Vec::with_capacity(step.children.len());
        for &gi in &per_step[i] {
            for (target, jump) in &groups[gi].targets {
                let e = sfc.steps[i]
                    .children
                    .iter()
                    .find(|e| e.guard_key() == groups[gi].guard && &e.target == target && e.is_jump == *jump)
                    .expect("group member");
                children.push(e.clone());
            }
        }
        step.children = children;
    }
    Ok(out)
}

/// Inserts divergence and convergence nodes per the identical-guard rule.
pub fn normalize(sfc: &ReducedSfc) -> Result<NormalizedGraph, NormalizationError> {
    let errors: Vec<Diagnostic> = validate_reduced(sfc, true)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(NormalizationError::Invalid(errors));
    }
    let (groups, per_step) = transition_groups(sfc)?;
    let index: HashMap<&str, usize> = sfc.steps.iter().enumerate().map(|(i, s)| (s.name.as_str(), i)).collect();

    // incoming non-jump transitions per step
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); sfc.steps.len()];
    for (gi, g) in groups.iter().enumerate() {
        for (t, jump) in &g.targets {
            if !jump {
                incoming[index[t.as_str()]].push(gi);
            }
        }
    }

    let mut b = GraphBuilder::new(sfc.pou_name.clone(), sfc.variables.clone());
    let step_h: Vec<usize> = sfc
        .steps
        .iter()
        .map(|s| b.add_step(&s.name, s.is_initial, s.action.clone(), s.comment.clone()))
        .collect();
    let trans_h: Vec<usize> = groups
        .iter()
        .map(|g| b.add(NodeKind::Transition { guard: g.guard.clone() }))
        .collect();

    // outgoing side
    let mut sim_conv: HashMap<usize, usize> = HashMap::new();
    for (i, ts) in per_step.iter().enumerate() {
        let name = &sfc.steps[i].name;
        if ts.len() >= 2 {
            if let Some(&gi) = ts.iter().find(|&&gi| groups[gi].sources.len() > 1) {
                return Err(topo(
                    name.as_str(),
                    format!(
                        "step takes part in a synchronization on '{}' but also has alternative transitions",
                        groups[gi].guard
                    ),
                ));
            }
            let d = b.add(NodeKind::SelectionDivergence);
            b.link(step_h[i], d);
            for &gi in ts {
                b.link(d, trans_h[gi]);
            }
        } else if let Some(&gi) = ts.first() {
            if groups[gi].sources.len() > 1 {
                let c = *sim_conv.entry(gi).or_insert_with(|| {
                    let c = b.add(NodeKind::SimultaneousConvergence);
                    b.link(c, trans_h[gi]);
                    c
                });
                b.link(step_h[i], c);
            } else {
                b.link(step_h[i], trans_h[gi]);
            }
        }
    }

    // incoming side
    let mut sel_conv: HashMap<usize, usize> = HashMap::new();
    for (gi, g) in groups.iter().enumerate() {
        let t = trans_h[gi];
        let mut target_node = |b: &mut GraphBuilder, name: &str, jump: bool| -> Result<usize, NormalizationError> {
            if jump {
                return Ok(b.add(NodeKind::JumpStep { target: name.to_string() }));
            }
            let x = index[name];
            if incoming[x].len() > 1 {
                if g.targets.len() > 1 {
                    return Err(topo(
                        name,
                        format!("step is entered by a parallel branch on '{}' and by other transitions", g.guard),
                    ));
                }
                Ok(*sel_conv.entry(x).or_insert_with(|| {
                    let v = b.add(NodeKind::SelectionConvergence);
                    b.link(v, step_h[x]);
                    v
                }))
            } else {
                Ok(step_h[x])
            }
        };
        if g.targets.len() > 1 {
            let d = b.add(NodeKind::SimultaneousDivergence);
            b.link(t, d);
            for (name, jump) in &g.targets {
                let n = target_node(&mut b, name, *jump)?;
                b.link(d, n);
            }
        } else {
            let (name, jump) = &g.targets[0];
            let n = target_node(&mut b, name, *jump)?;
            b.link(t, n);
        }
    }
    Ok(b.finish())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("node {node}: {message}")]
pub struct GraphError {
    pub node: NodeId,
    pub message: String,
}

fn gerr(node: NodeId, message: impl Into<String>) -> GraphError {
    GraphError {
        node,
        message: message.into(),
    }
}

/// Checks the arity and alternation rules of a normalized graph.
pub fn check_graph(g: &NormalizedGraph) -> Result<(), GraphError> {
    use NodeKind::*;
    for (i, n) in g.nodes.iter().enumerate() {
        if n.id as usize != i + 1 {
            return Err(gerr(n.id, "node ids must be 1..n in order"));
        }
    }
    let initial = g.count(|k| *k == InitialStep);
    if initial != 1 {
        let id = g.nodes.first().map_or(0, |n| n.id);
        return Err(gerr(id, format!("expected exactly one initial step, found {initial}")));
    }
    for n in &g.nodes {
        for &c in &n.children {
            let Some(child) = g.get(c) else {
                return Err(gerr(n.id, format!("child {c} does not exist")));
            };
            if !child.parents.contains(&n.id) {
                return Err(gerr(c, format!("parent list misses {}", n.id)));
            }
        }
        for &p in &n.parents {
            let Some(parent) = g.get(p) else {
                return Err(gerr(n.id, format!("parent {p} does not exist")));
            };
            if !parent.children.contains(&n.id) {
                return Err(gerr(p, format!("child list misses {}", n.id)));
            }
        }
        let kinds = |ids: &[NodeId]| ids.iter().map(|&i| &g.node(i).kind).collect::<Vec<_>>();
        let pk = kinds(&n.parents);
        let ck = kinds(&n.children);
        let bad = |what: &str| Err(gerr(n.id, format!("{} {what}", n.kind.label())));
        match &n.kind {
            Step | InitialStep => {
                if pk.len() > 1 {
                    return bad("has more than one parent");
                }
                if ck.len() > 1 {
                    return bad("has more than one child");
                }
                if !pk.iter().all(|k| matches!(k, Transition { .. } | SelectionConvergence | SimultaneousDivergence)) {
                    return bad("must follow a transition or a convergence/divergence");
                }
                if !ck.iter().all(|k| matches!(k, Transition { .. } | SelectionDivergence | SimultaneousConvergence)) {
                    return bad("must be followed by a transition, selection divergence or simultaneous convergence");
                }
                if !g.names.contains_key(&n.id) {
                    return bad("has no name");
                }
            }
            Transition { .. } => {
                if pk.len() != 1 || !matches!(pk[0], Step | InitialStep | SelectionDivergence | SimultaneousConvergence) {
                    return bad("needs exactly one parent step, selection divergence or simultaneous convergence");
                }
                if ck.len() != 1
                    || !matches!(ck[0], Step | InitialStep | SimultaneousDivergence | SelectionConvergence | JumpStep { .. })
                {
                    return bad("needs exactly one child step, jump, selection convergence or simultaneous divergence");
                }
            }
            SelectionDivergence => {
                if pk.len() != 1 || !pk[0].is_step() {
                    return bad("needs exactly one parent step");
                }
                if ck.len() < 2 || !ck.iter().all(|k| matches!(k, Transition { .. })) {
                    return bad("needs at least two transition children");
                }
            }
            SelectionConvergence => {
                if pk.len() < 2 || !pk.iter().all(|k| matches!(k, Transition { .. })) {
                    return bad("needs at least two transition parents");
                }
                if ck.len() != 1 || !ck[0].is_step() {
                    return bad("needs exactly one child step");
                }
            }
            SimultaneousDivergence => {
                if pk.len() != 1 || !matches!(pk[0], Transition { .. }) {
                    return bad("needs exactly one parent transition");
                }
                if ck.len() < 2 || !ck.iter().all(|k| k.is_step() || matches!(k, JumpStep { .. })) {
                    return bad("needs at least two step or jump children");
                }
            }
            SimultaneousConvergence => {
                if pk.len() < 2 || !pk.iter().all(|k| k.is_step()) {
                    return bad("needs at least two parent steps");
                }
                if ck.len() != 1 || !matches!(ck[0], Transition { .. }) {
                    return bad("needs exactly one child transition");
                }
            }
            JumpStep { target } => {
                if !ck.is_empty() {
                    return bad("cannot have children");
                }
                if pk.len() != 1 || !matches!(pk[0], Transition { .. } | SimultaneousDivergence) {
                    return bad("needs exactly one parent transition or simultaneous divergence");
                }
                if g.step_id(target).is_none() {
                    return bad(&format!("targets unknown step '{target}'"));
                }
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    for &id in &g.step_order {
        if !g.get(id).is_some_and(|n| n.kind.is_step()) || !seen.insert(id) {
            return Err(gerr(id, "step order lists a non-step or repeats a step"));
        }
    }
    if seen.len() != g.count(NodeKind::is_step) {
        return Err(gerr(0, "step order does not list every step"));
    }
    for &id in g.actions.keys().chain(g.comments.keys()) {
        if !g.get(id).is_some_and(|n| n.kind.is_step()) {
            return Err(gerr(id, "action or comment attached to a non-step node"));
        }
    }
    Ok(())
}

/// Elides divergence and convergence nodes back into guarded child edges.
pub fn denormalize(g: &NormalizedGraph) -> Result<ReducedSfc, GraphError> {
    check_graph(g)?;
    let edges_from = |t: NodeId| -> Vec<Edge> {
        let NodeKind::Transition { guard } = &g.node(t).kind else {
            unreachable!("checked")
        };
        let into = |id: NodeId| -> Edge {
            match &g.node(id).kind {
                NodeKind::JumpStep { target } => Edge::jump(guard.clone(), target.clone()),
                NodeKind::SelectionConvergence => Edge::new(guard.clone(), g.name(g.node(id).children[0])),
                _ => Edge::new(guard.clone(), g.name(id)),
            }
        };
        let child = g.node(t).children[0];
        match g.node(child).kind {
            NodeKind::SimultaneousDivergence => g.node(child).children.iter().map(|&c| into(c)).collect(),
            _ => vec![into(child)],
        }
    };
    let mut sfc = ReducedSfc::new(g.pou_name.clone());
    sfc.variables = g.interface.clone();
    for &id in &g.step_order {
        let n = g.node(id);
        let mut step = StepNode::new(g.name(id));
        step.is_initial = n.kind == NodeKind::InitialStep;
        step.action = g.actions.get(&id).cloned();
        step.comment = g.comments.get(&id).cloned();
        if let Some(&c) = n.children.first() {
            let child = g.node(c);
            match child.kind {
                NodeKind::Transition { .. } => step.children = edges_from(c),
                NodeKind::SelectionDivergence => {
                    step.children = child.children.iter().flat_map(|&t| edges_from(t)).collect();
                }
                NodeKind::SimultaneousConvergence => step.children = edges_from(child.children[0]),
                _ => unreachable!("checked"),
            }
        }
        sfc.steps.push(step);
    }
    Ok(sfc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StepNode;

    fn fig2() -> ReducedSfc {
        ReducedSfc::new("Main")
            .with_step(StepNode::initial("Init").edge("bStart", "Fill").edge("bStart", "Heat"))
            .with_step(StepNode::new("Fill").edge("bReady", "Drain"))
            .with_step(StepNode::new("Heat").edge("bReady", "Drain"))
            .with_step(StepNode::new("Drain").jump("bEmpty", "Init"))
    }

    fn kinds(g: &NormalizedGraph) -> Vec<&NodeKind> {
        g.nodes.iter().map(|n| &n.kind).collect()
    }

    #[test]
    fn linear_chart() {
        let c = ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("a", "S1"))
            .with_step(StepNode::new("S1").edge("b", "S2"))
            .with_step(StepNode::new("S2"));
        let g = normalize(&c).unwrap();
        assert_eq!(g.count(NodeKind::is_step), 3);
        assert_eq!(g.count(|k| matches!(k, NodeKind::Transition { .. })), 2);
        assert_eq!(g.nodes.len(), 5);
        // depth-first ids: S0, t(a), S1, t(b), S2
        assert_eq!(g.names[&1], "S0");
        assert_eq!(g.names[&3], "S1");
        assert_eq!(g.names[&5], "S2");
        assert_eq!(denormalize(&g).unwrap(), c);
    }

    #[test]
    fn parallel_divergence() {
        let g = normalize(&fig2()).unwrap();
        use NodeKind::*;
        assert_eq!(
            kinds(&g),
            vec![
                &InitialStep,
                &Transition { guard: "bStart".into() },
                &SimultaneousDivergence,
                &Step,
                &SimultaneousConvergence,
                &Transition { guard: "bReady".into() },
                &Step,
                &Transition { guard: "bEmpty".into() },
                &JumpStep { target: "Init".into() },
                &Step,
            ]
        );
        assert_eq!(g.node(3).children, vec![4, 10]);
        assert_eq!(g.node(5).parents, vec![4, 10]);
        assert_eq!(g.name(4), "Fill");
        assert_eq!(g.name(10), "Heat");
        assert_eq!(denormalize(&g).unwrap(), fig2());
    }

    #[test]
    fn alternative_branches_and_selection_convergence() {
        let c = ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("a", "A").edge("b", "B"))
            .with_step(StepNode::new("A").edge("x", "S2"))
            .with_step(StepNode::new("B").edge("y", "S2"))
            .with_step(StepNode::new("S2"));
        let g = normalize(&c).unwrap();
        assert_eq!(g.count(|k| *k == NodeKind::SelectionDivergence), 1);
        assert_eq!(g.count(|k| *k == NodeKind::SelectionConvergence), 1);
        assert_eq!(denormalize(&g).unwrap(), c);
    }

    #[test]
    fn interleaved_groups_are_canonicalized() {
        let c = ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("a", "A").edge("b", "B").edge("a", "C"))
            .with_step(StepNode::new("A"))
            .with_step(StepNode::new("B"))
            .with_step(StepNode::new("C"));
        let back = denormalize(&normalize(&c).unwrap()).unwrap();
        assert_eq!(back, canonical_edge_order(&c).unwrap());
        let names: Vec<_> = back.steps[0].children.iter().map(|e| e.target.as_str()).collect();
        assert_eq!(names, ["A", "C", "B"]);
    }

    #[test]
    fn inconsistent_reconvergence_rejected() {
        let c = ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("c", "A").edge("c", "B"))
            .with_step(StepNode::new("A").edge("d", "S2"))
            .with_step(StepNode::new("B").edge("d", "S2").edge("d", "S3"))
            .with_step(StepNode::new("S2"))
            .with_step(StepNode::new("S3"));
        assert!(matches!(normalize(&c), Err(NormalizationError::Topology { .. })));
    }

    #[test]
    fn simultaneous_convergence_arity_three() {
        let mut b = GraphBuilder::new("Main", Interface::default());
        let s0 = b.add_step("S0", true, None, None);
        let steps: Vec<usize> = ["A", "B", "C"].iter().map(|n| b.add_step(n, false, None, None)).collect();
        let end = b.add_step("E", false, None, None);
        let t0 = b.add(NodeKind::Transition { guard: "go".into() });
        let d = b.add(NodeKind::SimultaneousDivergence);
        let c = b.add(NodeKind::SimultaneousConvergence);
        let t1 = b.add(NodeKind::Transition { guard: "done".into() });
        b.link(s0, t0);
        b.link(t0, d);
        for &s in &steps {
            b.link(d, s);
            b.link(s, c);
        }
        b.link(c, t1);
        b.link(t1, end);
        let g = b.finish();
        let sfc = denormalize(&g).unwrap();
        for name in ["A", "B", "C"] {
            assert_eq!(sfc.step(name).unwrap().children, vec![Edge::new("done", "E")]);
        }
        assert_eq!(normalize(&sfc).unwrap(), g.canonical());
    }

    #[test]
    fn denormalize_reports_node() {
        let mut g = normalize(&fig2()).unwrap();
        // make the divergence unary
        g.nodes[2].children.pop();
        let err = denormalize(&g).unwrap_err();
        assert!(err.node == 3 || err.node == 10, "{err}");
    }

    #[test]
    fn jump_to_initial() {
        let c = ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("a", "S1"))
            .with_step(StepNode::new("S1").jump("b", "S0"));
        let g = normalize(&c).unwrap();
        assert_eq!(g.count(|k| matches!(k, NodeKind::JumpStep { target } if target == "S0")), 1);
        assert!(denormalize(&g).unwrap().steps[1].children[0].is_jump);
    }
}
