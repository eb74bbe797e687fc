//! The reduced SFC data model: steps with guarded child edges, jump flags,
//! ST actions and a three-section variable interface.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diag::{DiagCode, Diagnostic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarSection {
    Input,
    Output,
    Local,
}

impl VarSection {
    pub const ALL: [VarSection; 3] = [VarSection::Input, VarSection::Output, VarSection::Local];

    pub fn as_str(self) -> &'static str {
        match self {
            VarSection::Input => "input",
            VarSection::Output => "output",
            VarSection::Local => "local",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub data_type: String,
    /// ST literal text, kept verbatim.
    pub default_value: Option<String>,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, data_type: impl Into<String>) -> Self {
        VariableDecl {
            name: name.into(),
            data_type: data_type.into(),
            default_value: None,
        }
    }

    pub fn with_default(mut self, value: impl Into<String>) -> Self {
        self.default_value = Some(value.into());
        self
    }
}

/// Variable interface of a POU. The section of a declaration is the list it lives in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Interface {
    pub input: Vec<VariableDecl>,
    pub output: Vec<VariableDecl>,
    pub local: Vec<VariableDecl>,
}

impl Interface {
    pub fn section(&self, section: VarSection) -> &[VariableDecl] {
        match section {
            VarSection::Input => &self.input,
            VarSection::Output => &self.output,
            VarSection::Local => &self.local,
        }
    }

    pub fn section_mut(&mut self, section: VarSection) -> &mut Vec<VariableDecl> {
        match section {
            VarSection::Input => &mut self.input,
            VarSection::Output => &mut self.output,
            VarSection::Local => &mut self.local,
        }
    }

    /// All declarations in canonical order (input, output, local).
    pub fn iter(&self) -> impl Iterator<Item = (VarSection, &VariableDecl)> {
        VarSection::ALL
            .into_iter()
            .flat_map(move |s| self.section(s).iter().map(move |v| (s, v)))
    }

    pub fn len(&self) -> usize {
        self.input.len() + self.output.len() + self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    /// ST boolean expression, as written.
    pub guard: String,
    pub target: String,
    pub is_jump: bool,
}

impl Edge {
    pub fn new(guard: impl Into<String>, target: impl Into<String>) -> Self {
        Edge {
            guard: guard.into(),
            target: target.into(),
            is_jump: false,
        }
    }

    pub fn jump(guard: impl Into<String>, target: impl Into<String>) -> Self {
        Edge {
            is_jump: true,
            ..Edge::new(guard, target)
        }
    }

    /// Guard text used for branch grouping.
    pub fn guard_key(&self) -> &str {
        self.guard.trim()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepNode {
    pub name: String,
    pub is_initial: bool,
    /// `Some("")` is an empty action block, `None` is no action at all.
    pub action: Option<String>,
    pub comment: Option<String>,
    pub children: Vec<Edge>,
}

impl StepNode {
    pub fn new(name: impl Into<String>) -> Self {
        StepNode {
            name: name.into(),
            is_initial: false,
            action: None,
            comment: None,
            children: Vec::new(),
        }
    }

    pub fn initial(name: impl Into<String>) -> Self {
        StepNode {
            is_initial: true,
            ..StepNode::new(name)
        }
    }

    pub fn with_action(mut self, action: impl Into<String>) -> Self {
        self.action = Some(action.into());
        self
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }

    pub fn edge(mut self, guard: impl Into<String>, target: impl Into<String>) -> Self {
        self.children.push(Edge::new(guard, target));
        self
    }

    pub fn jump(mut self, guard: impl Into<String>, target: impl Into<String>) -> Self {
        self.children.push(Edge::jump(guard, target));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedSfc {
    pub pou_name: String,
    pub variables: Interface,
    pub steps: Vec<StepNode>,
}

impl ReducedSfc {
    pub fn new(pou_name: impl Into<String>) -> Self {
        ReducedSfc {
            pou_name: pou_name.into(),
            variables: Interface::default(),
            steps: Vec::new(),
        }
    }

    pub fn with_step(mut self, step: StepNode) -> Self {
        self.steps.push(step);
        self
    }

    pub fn with_var(mut self, section: VarSection, var: VariableDecl) -> Self {
        self.variables.section_mut(section).push(var);
        self
    }

    pub fn step(&self, name: &str) -> Option<&StepNode> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn step_index(&self, name: &str) -> Option<usize> {
        self.steps.iter().position(|s| s.name == name)
    }

    pub fn initial_steps(&self) -> impl Iterator<Item = &StepNode> {
        self.steps.iter().filter(|s| s.is_initial)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&StepNode, &Edge)> {
        self.steps.iter().flat_map(|s| s.children.iter().map(move |e| (s, e)))
    }

    /// Renames a step and every edge targeting it.
    pub fn rename_step(&mut self, from: &str, to: &str) {
        for step in &mut self.steps {
            if step.name == from {
                step.name = to.to_string();
            }
            for edge in &mut step.children {
                if edge.target == from {
                    edge.target = to.to_string();
                }
            }
        }
    }
}

/// IEC 61131-3 identifier: letter or underscore first, then letters, digits
/// and underscores, with no double and no trailing underscore.
pub fn is_iec_identifier(name: &str) -> bool {
    let bytes = name.as_bytes();
    let Some(&first) = bytes.first() else {
        return false;
    };
    if !(first.is_ascii_alphabetic() || first == b'_') {
        return false;
    }
    if !bytes.iter().all(|b| b.is_ascii_alphanumeric() || *b == b'_') {
        return false;
    }
    if name.contains("__") {
        return false;
    }
    !(bytes.len() > 1 && bytes[bytes.len() - 1] == b'_') && name != "_"
}

/// Checks the chart invariants. Problems are reported, never raised.
///
/// With `strict = false` multiple initial steps are downgraded to a warning.
pub fn validate_reduced(sfc: &ReducedSfc, strict: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();

    if !is_iec_identifier(&sfc.pou_name) {
        diags.push(Diagnostic::error(
            DiagCode::BadIdentifier,
            &sfc.pou_name,
            format!("POU name '{}' is not a valid identifier", sfc.pou_name),
        ));
    }

    for section in VarSection::ALL {
        let mut seen = HashSet::new();
        for var in sfc.variables.section(section) {
            if !is_iec_identifier(&var.name) {
                diags.push(Diagnostic::error(
                    DiagCode::BadIdentifier,
                    &var.name,
                    format!("variable name '{}' is not a valid identifier", var.name),
                ));
            }
            if !seen.insert(var.name.to_ascii_lowercase()) {
                diags.push(Diagnostic::error(
                    DiagCode::DuplicateName,
                    &var.name,
                    format!("variable '{}' declared twice in {} section", var.name, section.as_str()),
                ));
            }
        }
    }

    let initial: Vec<&StepNode> = sfc.initial_steps().collect();
    match initial.len() {
        0 => diags.push(Diagnostic::error(
            DiagCode::InitStepError,
            &sfc.pou_name,
            "chart has no initial step",
        )),
        1 => {}
        n => {
            let names: Vec<&str> = initial.iter().map(|s| s.name.as_str()).collect();
            let message = format!("chart has {n} initial steps: {}", names.join(", "));
            diags.push(if strict {
                Diagnostic::error(DiagCode::InitStepError, names[1], message)
            } else {
                Diagnostic::warning(DiagCode::InitStepError, names[1], message)
            });
        }
    }

    let mut names = HashSet::new();
    for step in &sfc.steps {
        if !is_iec_identifier(&step.name) {
            diags.push(Diagnostic::error(
                DiagCode::BadIdentifier,
                &step.name,
                format!("step name '{}' is not a valid identifier", step.name),
            ));
        }
        if !names.insert(step.name.as_str()) {
            diags.push(Diagnostic::error(
                DiagCode::DuplicateName,
                &step.name,
                format!("step '{}' defined more than once", step.name),
            ));
        }
    }

    for step in &sfc.steps {
        for edge in &step.children {
            let element = format!("{}->{}", step.name, edge.target);
            if !names.contains(edge.target.as_str()) {
                diags.push(Diagnostic::error(
                    DiagCode::TransitionError,
                    element,
                    format!(
                        "transition from '{}' targets undefined step '{}'",
                        step.name, edge.target
                    ),
                ));
            } else if edge.guard.trim().is_empty() {
                diags.push(Diagnostic::error(
                    DiagCode::TransitionError,
                    element,
                    format!("transition from '{}' has an empty condition", step.name),
                ));
            }
        }
    }

    diags
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("chart failed validation: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

fn require_valid(sfc: &ReducedSfc, strict: bool) -> Result<(), ModelError> {
    let errors: Vec<Diagnostic> = validate_reduced(sfc, strict)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Invalid(errors))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchGroup {
    /// Two or more edges with identical trimmed guard text.
    Parallel(Vec<usize>),
    Alternative(usize),
}

impl BranchGroup {
    pub fn edges(&self) -> Vec<usize> {
        match self {
            BranchGroup::Parallel(v) => v.clone(),
            BranchGroup::Alternative(i) => vec![*i],
        }
    }

    pub fn first(&self) -> usize {
        match self {
            BranchGroup::Parallel(v) => v[0],
            BranchGroup::Alternative(i) => *i,
        }
    }
}

/// Per source step (keyed by step name) a partition of its outgoing edge
/// indices; groups are ordered by their first edge.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BranchGrouping {
    pub groups: BTreeMap<String, Vec<BranchGroup>>,
}

impl BranchGrouping {
    pub fn for_step(&self, name: &str) -> &[BranchGroup] {
        self.groups.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn parallel_count(&self) -> usize {
        self.groups
            .values()
            .flatten()
            .filter(|g| matches!(g, BranchGroup::Parallel(_)))
            .count()
    }
}

/// Groups a step's outgoing edges by trimmed guard text.
pub fn group_edges(children: &[Edge]) -> Vec<BranchGroup> {
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, edge) in children.iter().enumerate() {
        let key = edge.guard_key();
        members
            .entry(key)
            .or_insert_with(|| {
                order.push(key);
                Vec::new()
            })
            .push(i);
    }
    order
        .into_iter()
        .map(|key| {
            let idx = members.remove(key).unwrap_or_default();
            if idx.len() >= 2 {
                BranchGroup::Parallel(idx)
            } else {
                BranchGroup::Alternative(idx[0])
            }
        })
        .collect()
}

/// Parallel branching for identical guards, alternative branching otherwise.
pub fn branch_groups(sfc: &ReducedSfc) -> Result<BranchGrouping, ModelError> {
    require_valid(sfc, true)?;
    let groups = sfc
        .steps
        .iter()
        .map(|s| (s.name.clone(), group_edges(&s.children)))
        .collect();
    Ok(BranchGrouping { groups })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StatsRecord {
    pub steps: usize,
    pub edges: usize,
    pub jumps: usize,
    pub parallel_groups: usize,
    pub max_out_degree: usize,
}

pub fn topology_stats(sfc: &ReducedSfc) -> StatsRecord {
    StatsRecord {
        steps: sfc.steps.len(),
        edges: sfc.edges().count(),
        jumps: sfc.edges().filter(|(_, e)| e.is_jump).count(),
        // Computed on the chart as stored, so invalid charts still get a count.
        parallel_groups: sfc
            .steps
            .iter()
            .map(|s| {
                group_edges(&s.children)
                    .iter()
                    .filter(|g| matches!(g, BranchGroup::Parallel(_)))
                    .count()
            })
            .sum(),
        max_out_degree: sfc.steps.iter().map(|s| s.children.len()).max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> ReducedSfc {
        ReducedSfc::new("Main")
            .with_step(StepNode::initial("S0").edge("x", "S1"))
            .with_step(StepNode::new("S1"))
    }

    #[test]
    fn identifiers() {
        for ok in ["a", "_a", "Step1", "a_b_c", "A1_2"] {
            assert!(is_iec_identifier(ok), "{ok}");
        }
        for bad in ["", "1a", "a__b", "a_", "_", "a-b", "ä", "a b"] {
            assert!(!is_iec_identifier(bad), "{bad}");
        }
    }

    #[test]
    fn minimal_chart_is_valid() {
        assert!(validate_reduced(&minimal(), true).is_empty());
    }

    #[test]
    fn zero_initial_steps() {
        let mut c = minimal();
        c.steps[0].is_initial = false;
        let d = validate_reduced(&c, true);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagCode::InitStepError);
    }

    #[test]
    fn dangling_target() {
        let mut c = minimal();
        c.steps[1].children.push(Edge::new("y", "S9"));
        let d = validate_reduced(&c, true);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].code, DiagCode::TransitionError);
        assert_eq!(d[0].element, "S1->S9");
    }

    #[test]
    fn multiple_initial_steps_strictness() {
        let mut c = minimal();
        c.steps[1].is_initial = true;
        let strict = validate_reduced(&c, true);
        assert!(strict[0].is_error());
        let lenient = validate_reduced(&c, false);
        assert_eq!(lenient.len(), 1);
        assert!(!lenient[0].is_error());
    }

    #[test]
    fn duplicates_and_bad_names() {
        let c = ReducedSfc::new("Main")
            .with_var(VarSection::Input, VariableDecl::new("x", "BOOL"))
            .with_var(VarSection::Input, VariableDecl::new("X", "BOOL"))
            .with_var(VarSection::Local, VariableDecl::new("x", "INT"))
            .with_step(StepNode::initial("S0"))
            .with_step(StepNode::new("S0"))
            .with_step(StepNode::new("bad__name"));
        let codes: Vec<DiagCode> = validate_reduced(&c, true).iter().map(|d| d.code).collect();
        assert_eq!(
            codes,
            vec![DiagCode::DuplicateName, DiagCode::DuplicateName, DiagCode::BadIdentifier]
        );
    }

    #[test]
    fn grouping_examples() {
        let step = StepNode::initial("S0").edge("x", "A").edge("x", "B").edge("y", "C");
        assert_eq!(
            group_edges(&step.children),
            vec![BranchGroup::Parallel(vec![0, 1]), BranchGroup::Alternative(2)]
        );
        let step = StepNode::initial("S0").edge("a", "A").edge("b", "B").edge("a", "C").edge("b", "D");
        assert_eq!(
            group_edges(&step.children),
            vec![BranchGroup::Parallel(vec![0, 2]), BranchGroup::Parallel(vec![1, 3])]
        );
        let step = StepNode::initial("S0").edge("a", "A");
        assert_eq!(group_edges(&step.children), vec![BranchGroup::Alternative(0)]);
    }

    #[test]
    fn grouping_trims_guards() {
        let step = StepNode::initial("S0").edge(" x", "A").edge("x  ", "B");
        assert_eq!(group_edges(&step.children), vec![BranchGroup::Parallel(vec![0, 1])]);
    }

    #[test]
    fn branch_groups_rejects_invalid() {
        let mut c = minimal();
        c.steps[0].is_initial = false;
        assert!(matches!(branch_groups(&c), Err(ModelError::Invalid(_))));
    }

    #[test]
    fn stats_minimal() {
        let s = topology_stats(&minimal());
        assert_eq!((s.steps, s.edges, s.jumps, s.parallel_groups, s.max_out_degree), (2, 1, 0, 0, 1));
    }
}
