//! Reading and writing PLCopen TC6 v2.01 SFC programs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::diag::Diagnostic;
use crate::model::{Interface, ReducedSfc, VarSection, VariableDecl};

use super::graph::{denormalize, normalize, GraphBuilder, NodeKind, NormalizationError, NormalizedGraph};
use super::template::{MetadataTemplate, TemplateError};
use super::xml::{parse_document, write_document, Element, XmlSyntaxError};

pub const TC6_NAMESPACE: &str = "http://www.plcopen.org/xml/tc6_0201";
pub const XHTML_NAMESPACE: &str = "http://www.w3.org/1999/xhtml";

/// Types written as their own element instead of `<derived>`.
const ELEMENTARY_TYPES: &[&str] = &[
    "BOOL", "BYTE", "WORD", "DWORD", "LWORD", "SINT", "INT", "DINT", "LINT", "USINT", "UINT", "UDINT",
    "ULINT", "REAL", "LREAL", "TIME", "DATE", "DT", "TOD",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("refusing to emit an invalid chart: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Normalization(NormalizationError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{element}: text contains a character XML cannot carry (U+{code:04X})")]
    Unrepresentable { element: String, code: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlcopenError {
    #[error(transparent)]
    Xml(#[from] XmlSyntaxError),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlcopenWarning {
    pub element: String,
    pub message: String,
}

impl fmt::Display for PlcopenWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.element, self.message)
    }
}

fn is_xml_char(c: char) -> bool {
    matches!(c, '\t' | '\n' | '\r' | '\u{20}'..='\u{D7FF}' | '\u{E000}'..='\u{FFFD}' | '\u{10000}'..)
}

fn check_text(element: &str, text: &str) -> Result<(), EmitError> {
    match text.chars().find(|c| !is_xml_char(*c)) {
        Some(c) => Err(EmitError::Unrepresentable {
            element: element.to_string(),
            code: c as u32,
        }),
        None => Ok(()),
    }
}

fn st_body(text: &str) -> Element {
    Element::new("ST").child(Element::new("xhtml:p").cdata(text))
}

fn type_element(data_type: &str) -> Element {
    if ELEMENTARY_TYPES.contains(&data_type) {
        return Element::new(data_type);
    }
    for (name, tag) in [("STRING", "string"), ("WSTRING", "wstring")] {
        if data_type == name {
            return Element::new(tag);
        }
        if let Some(len) = data_type
            .strip_prefix(name)
            .and_then(|r| r.strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
        {
            if !len.is_empty() && len.bytes().all(|b| b.is_ascii_digit()) {
                return Element::new(tag).attr("length", len);
            }
        }
    }
    Element::new("derived").attr("name", data_type)
}

fn placed(kind: &str, id: u32, template: &MetadataTemplate) -> Result<Element, TemplateError> {
    let ex = template.exemplar(kind)?;
    let mut el = Element::new(kind).attr("localId", id.to_string());
    if let Some(w) = &ex.width {
        el = el.attr("width", w.clone());
    }
    if let Some(h) = &ex.height {
        el = el.attr("height", h.clone());
    }
    Ok(el)
}

fn finish_node(mut el: Element, kind: &str, id: u32, template: &MetadataTemplate) -> Result<Element, TemplateError> {
    // Placeholder layout; IDEs recompute positions on import.
    el.children.insert(
        0,
        super::xml::XmlNode::Element(
            Element::new("position")
                .attr("x", "0")
                .attr("y", (60 * (id - 1)).to_string()),
        ),
    );
    if let Some(add) = &template.exemplar(kind)?.add_data {
        el.push(add.clone());
    }
    Ok(el)
}

fn connection_in(parents: &[(u32, Option<usize>)]) -> Element {
    let mut cp = Element::new("connectionPointIn");
    for (p, formal) in parents {
        let mut c = Element::new("connection").attr("refLocalId", p.to_string());
        if let Some(i) = formal {
            c = c.attr("formalParameter", i.to_string());
        }
        cp.push(c);
    }
    cp
}

fn branch_outputs(n: usize) -> Vec<Element> {
    (0..n)
        .map(|i| Element::new("connectionPointOut").attr("formalParameter", i.to_string()))
        .collect()
}

/// Builds a PLCopen project holding the chart as one SFC program.
pub fn emit_plcopen(sfc: &ReducedSfc, template: &MetadataTemplate) -> Result<String, EmitError> {
    let errors: Vec<Diagnostic> = crate::model::validate_reduced(sfc, true)
        .into_iter()
        .filter(Diagnostic::is_error)
        .collect();
    if !errors.is_empty() {
        return Err(EmitError::Invalid(errors));
    }
    for s in &sfc.steps {
        for (what, text) in [("action", &s.action), ("comment", &s.comment)] {
            if let Some(t) = text {
                check_text(&format!("{} {what}", s.name), t)?;
            }
        }
        for e in &s.children {
            check_text(&format!("{}->{}", s.name, e.target), &e.guard)?;
        }
    }
    for (_, v) in sfc.variables.iter() {
        check_text(&v.name, &v.data_type)?;
        if let Some(d) = &v.default_value {
            check_text(&v.name, d)?;
        }
    }
    let graph = normalize(sfc).map_err(EmitError::Normalization)?;
    Ok(write_document(&project_element(&graph, template)?))
}

fn project_element(g: &NormalizedGraph, template: &MetadataTemplate) -> Result<Element, EmitError> {
    let mut interface = Element::new("interface");
    for (section, tag) in [
        (VarSection::Input, "inputVars"),
        (VarSection::Output, "outputVars"),
        (VarSection::Local, "localVars"),
    ] {
        let mut list = Element::new(tag);
        for v in g.interface.section(section) {
            let mut var = Element::new("variable")
                .attr("name", v.name.clone())
                .child(Element::new("type").child(type_element(&v.data_type)));
            if let Some(d) = &v.default_value {
                var.push(Element::new("initialValue").child(Element::new("simpleValue").attr("value", d.clone())));
            }
            list.push(var);
        }
        interface.push(list);
    }

    let mut actions = Element::new("actions");
    for &id in &g.step_order {
        if let Some(a) = g.actions.get(&id) {
            actions.push(
                Element::new("action")
                    .attr("name", format!("{}_action", g.name(id)))
                    .child(Element::new("body").child(st_body(a))),
            );
        }
    }

    // which output of a divergence each child hangs off
    let mut formal: HashMap<(u32, u32), usize> = HashMap::new();
    for n in &g.nodes {
        if matches!(n.kind, NodeKind::SelectionDivergence | NodeKind::SimultaneousDivergence) {
            for (i, &c) in n.children.iter().enumerate() {
                formal.insert((n.id, c), i);
            }
        }
    }
    let parents_of = |id: u32| -> Vec<(u32, Option<usize>)> {
        g.node(id)
            .parents
            .iter()
            .map(|&p| (p, formal.get(&(p, id)).copied()))
            .collect()
    };

    let mut body = Element::new("SFC");
    let mut order: Vec<u32> = g.step_order.clone();
    order.extend(g.nodes.iter().filter(|n| !n.kind.is_step()).map(|n| n.id));
    for id in order {
        let n = g.node(id);
        let el = match &n.kind {
            NodeKind::Step | NodeKind::InitialStep => {
                let mut el = placed("step", id, template)?.attr("name", g.name(id));
                if n.kind == NodeKind::InitialStep {
                    el = el.attr("initialStep", "true");
                }
                if !n.parents.is_empty() {
                    el.push(connection_in(&parents_of(id)));
                }
                el.push(Element::new("connectionPointOut").attr("formalParameter", "sfc"));
                if let Some(c) = g.comments.get(&id) {
                    el.push(Element::new("documentation").child(Element::new("xhtml:p").cdata(c.clone())));
                }
                finish_node(el, "step", id, template)?
            }
            NodeKind::Transition { guard } => {
                let mut el = placed("transition", id, template)?;
                el.push(connection_in(&parents_of(id)));
                el.push(Element::new("connectionPointOut"));
                el.push(Element::new("condition").child(Element::new("inline").attr("name", "").child(st_body(guard))));
                finish_node(el, "transition", id, template)?
            }
            NodeKind::SelectionDivergence | NodeKind::SimultaneousDivergence => {
                let kind = if n.kind == NodeKind::SelectionDivergence {
                    "selectionDivergence"
                } else {
                    "simultaneousDivergence"
                };
                let mut el = placed(kind, id, template)?;
                el.push(connection_in(&parents_of(id)));
                for out in branch_outputs(n.children.len()) {
                    el.push(out);
                }
                finish_node(el, kind, id, template)?
            }
            NodeKind::SelectionConvergence | NodeKind::SimultaneousConvergence => {
                let kind = if n.kind == NodeKind::SelectionConvergence {
                    "selectionConvergence"
                } else {
                    "simultaneousConvergence"
                };
                let mut el = placed(kind, id, template)?;
                for p in parents_of(id) {
                    el.push(connection_in(&[p]));
                }
                el.push(Element::new("connectionPointOut"));
                finish_node(el, kind, id, template)?
            }
            NodeKind::JumpStep { target } => {
                let mut el = placed("jumpStep", id, template)?.attr("targetName", target.clone());
                el.push(connection_in(&parents_of(id)));
                finish_node(el, "jumpStep", id, template)?
            }
        };
        body.push(el);
    }
    // action blocks take ids after the chart nodes
    let mut next = g.nodes.len() as u32 + 1;
    for &id in &g.step_order {
        if g.actions.contains_key(&id) {
            let mut el = placed("actionBlock", next, template)?;
            el.push(connection_in(&[(id, None)]));
            el.push(
                Element::new("action")
                    .attr("localId", (next + 1).to_string())
                    .attr("qualifier", "N")
                    .child(Element::new("reference").attr("name", format!("{}_action", g.name(id)))),
            );
            body.push(finish_node(el, "actionBlock", next, template)?);
            next += 2;
        }
    }

    let mut pou = Element::new("pou")
        .attr("name", g.pou_name.clone())
        .attr("pouType", "program")
        .child(interface);
    if !actions.children.is_empty() {
        pou.push(actions);
    }
    pou.push(Element::new("body").child(body));

    let mut content_header = template.content_header.clone();
    for (k, v) in &mut content_header.attrs {
        if k == "name" {
            *v = g.pou_name.clone();
        }
    }
    Ok(Element::new("project")
        .attr("xmlns", TC6_NAMESPACE)
        .attr("xmlns:xhtml", XHTML_NAMESPACE)
        .child(template.file_header.clone())
        .child(content_header)
        .child(
            Element::new("types")
                .child(Element::new("dataTypes"))
                .child(Element::new("pous").child(pou)),
        )
        .child(Element::new("instances").child(Element::new("configurations"))))
}

// ---------------------------------------------------------------------------
// Parsing

struct Warnings(Vec<PlcopenWarning>);

impl Warnings {
    fn push(&mut self, element: impl Into<String>, message: impl Into<String>) {
        let w = PlcopenWarning {
            element: element.into(),
            message: message.into(),
        };
        if !self.0.contains(&w) {
            self.0.push(w);
        }
    }
}

fn schema(msg: impl Into<String>) -> PlcopenError {
    PlcopenError::Schema(msg.into())
}

/// Extracts the ST source of a `body`, `inline` or `condition`-like element.
fn st_text(el: &Element, what: &str) -> Result<String, PlcopenError> {
    if let Some(st) = el.find("ST") {
        return Ok(match st.find("p") {
            Some(p) => p.text_content(),
            None => st.text_content(),
        });
    }
    match el.elements().next() {
        Some(other) => Err(PlcopenError::Unsupported(format!(
            "{what} is written in {} (only ST is supported)",
            other.local_name()
        ))),
        None => Err(schema(format!("{what} has no body"))),
    }
}

fn parse_type(var: &Element) -> Result<String, PlcopenError> {
    let name = var.get_attr("name").unwrap_or("?");
    let ty = var
        .find("type")
        .and_then(|t| t.elements().next())
        .ok_or_else(|| schema(format!("variable '{name}' has no type")))?;
    let local = ty.local_name();
    Ok(match local {
        "derived" => ty
            .get_attr("name")
            .ok_or_else(|| schema(format!("variable '{name}': derived type without name")))?
            .to_string(),
        "string" | "wstring" => {
            let base = local.to_ascii_uppercase();
            match ty.get_attr("length") {
                Some(len) => format!("{base}({len})"),
                None => base,
            }
        }
        t if ELEMENTARY_TYPES.contains(&t) => t.to_string(),
        t => {
            return Err(PlcopenError::Unsupported(format!(
                "variable '{name}' uses the type construct '{t}'"
            )))
        }
    })
}

fn parse_interface(pou: &Element, warnings: &mut Warnings) -> Result<Interface, PlcopenError> {
    let mut iface = Interface::default();
    let Some(el) = pou.find("interface") else {
        return Ok(iface);
    };
    for list in el.elements() {
        let section = match list.local_name() {
            "inputVars" => VarSection::Input,
            "outputVars" => VarSection::Output,
            "localVars" => VarSection::Local,
            other => {
                warnings.push(other, "variable section not represented; dropped");
                continue;
            }
        };
        for var in list.find_all("variable") {
            let name = var
                .get_attr("name")
                .ok_or_else(|| schema("variable without name"))?;
            let default_value = var
                .path(&["initialValue", "simpleValue"])
                .and_then(|s| s.get_attr("value"))
                .map(str::to_string);
            iface.section_mut(section).push(VariableDecl {
                name: name.to_string(),
                data_type: parse_type(var)?,
                default_value,
            });
        }
    }
    Ok(iface)
}

fn local_id(el: &Element) -> Result<u32, PlcopenError> {
    let raw = el
        .get_attr("localId")
        .ok_or_else(|| schema(format!("<{}> without localId", el.local_name())))?;
    raw.parse()
        .map_err(|_| schema(format!("<{}> has non-numeric localId '{raw}'", el.local_name())))
}

/// (parent localId, formalParameter) for every incoming connection.
fn incoming(el: &Element) -> Result<Vec<(u32, Option<String>)>, PlcopenError> {
    let mut out = Vec::new();
    for cp in el.find_all("connectionPointIn") {
        for c in cp.find_all("connection") {
            let r = c
                .get_attr("refLocalId")
                .ok_or_else(|| schema("connection without refLocalId"))?;
            let r = r
                .parse()
                .map_err(|_| schema(format!("connection has non-numeric refLocalId '{r}'")))?;
            out.push((r, c.get_attr("formalParameter").map(str::to_string)));
        }
    }
    Ok(out)
}

/// Parses every SFC POU in the document.
pub fn parse_plcopen_all(xml: &str) -> Result<Vec<(ReducedSfc, Vec<PlcopenWarning>)>, PlcopenError> {
    let root = parse_document(xml)?;
    if root.local_name() != "project" {
        return Err(schema(format!("root element is <{}>, expected <project>", root.local_name())));
    }
    let pous = root
        .path(&["types", "pous"])
        .ok_or_else(|| schema("missing types/pous"))?;
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for pou in pous.find_all("pou") {
        let name = pou.get_attr("name").ok_or_else(|| schema("pou without name"))?;
        match pou.path(&["body", "SFC"]) {
            Some(sfc) => out.push(parse_pou(pou, name, sfc)?),
            None => skipped.push(name.to_string()),
        }
    }
    if out.is_empty() {
        return Err(schema("no POU with an SFC body"));
    }
    for name in skipped {
        for (_, w) in &mut out {
            w.push(PlcopenWarning {
                element: name.clone(),
                message: "POU has no SFC body; skipped".into(),
            });
        }
    }
    Ok(out)
}

/// Parses the first SFC POU of the document.
pub fn parse_plcopen(xml: &str) -> Result<(ReducedSfc, Vec<PlcopenWarning>), PlcopenError> {
    let mut all = parse_plcopen_all(xml)?;
    let extra: Vec<String> = all.iter().skip(1).map(|(c, _)| c.pou_name.clone()).collect();
    let (sfc, mut warnings) = all.swap_remove(0);
    for name in extra {
        warnings.push(PlcopenWarning {
            element: name,
            message: "additional SFC POU not returned; use parse_plcopen_all".into(),
        });
    }
    Ok((sfc, warnings))
}

fn parse_pou(pou: &Element, pou_name: &str, sfc_el: &Element) -> Result<(ReducedSfc, Vec<PlcopenWarning>), PlcopenError> {
    let mut warnings = Warnings(Vec::new());
    let interface = parse_interface(pou, &mut warnings)?;

    let mut pou_actions: HashMap<&str, &Element> = HashMap::new();
    for a in pou.find("actions").into_iter().flat_map(|a| a.find_all("action")) {
        if let Some(n) = a.get_attr("name") {
            pou_actions.insert(n, a);
        }
    }
    let mut pou_transitions: HashMap<&str, &Element> = HashMap::new();
    for t in pou.find("transitions").into_iter().flat_map(|t| t.find_all("transition")) {
        if let Some(n) = t.get_attr("name") {
            pou_transitions.insert(n, t);
        }
    }
    let action_text = |name: &str| -> Result<String, PlcopenError> {
        let a = pou_actions
            .get(name)
            .ok_or_else(|| schema(format!("action '{name}' is referenced but not defined")))?;
        let body = a
            .find("body")
            .ok_or_else(|| schema(format!("action '{name}' has no body")))?;
        st_text(body, &format!("action '{name}'"))
    };

    let mut b = GraphBuilder::new(pou_name, interface);
    let mut handle: HashMap<u32, usize> = HashMap::new();
    // (child handle, parent localId, formalParameter, document position)
    let mut links: Vec<(usize, u32, Option<String>, usize)> = Vec::new();
    let mut step_actions: BTreeMap<u32, Vec<String>> = BTreeMap::new();
    let mut placed = 0usize;

    // Steps first so their document order becomes chart order.
    for el in sfc_el.find_all("step") {
        let id = local_id(el)?;
        let name = el.get_attr("name").ok_or_else(|| schema(format!("step {id} without name")))?;
        let initial = matches!(el.get_attr("initialStep"), Some("true" | "1"));
        let comment = el.find("documentation").map(Element::text_content);
        let h = b.add_step(name, initial, None, comment);
        if handle.insert(id, h).is_some() {
            return Err(schema(format!("duplicate localId {id}")));
        }
    }
    let mut action_blocks = Vec::new();
    for (pos, el) in sfc_el.elements().enumerate() {
        let kind = el.local_name();
        if el.find("position").is_some() {
            placed += 1;
        }
        if el.find("addData").is_some() {
            warnings.push(kind, "vendor extension data dropped");
        }
        let lid = el.get_attr("localId").unwrap_or("?");
        let node_kind = match kind {
            "step" => None,
            "transition" => {
                let cond = el
                    .find("condition")
                    .ok_or_else(|| schema(format!("transition {lid} has no condition")))?;
                let guard = if let Some(inline) = cond.find("inline") {
                    st_text(inline, &format!("condition of transition {lid}"))?
                } else if let Some(r) = cond.find("reference") {
                    let name = r.get_attr("name").unwrap_or("");
                    let t = pou_transitions
                        .get(name)
                        .ok_or_else(|| schema(format!("transition '{name}' is referenced but not defined")))?;
                    let body = t
                        .find("body")
                        .ok_or_else(|| schema(format!("transition '{name}' has no body")))?;
                    st_text(body, &format!("transition '{name}'"))?
                } else {
                    return Err(PlcopenError::Unsupported(format!(
                        "condition of transition {lid} is not an inline or referenced ST expression"
                    )));
                };
                Some(NodeKind::Transition {
                    guard: guard.trim().to_string(),
                })
            }
            "selectionDivergence" => Some(NodeKind::SelectionDivergence),
            "selectionConvergence" => Some(NodeKind::SelectionConvergence),
            "simultaneousDivergence" => Some(NodeKind::SimultaneousDivergence),
            "simultaneousConvergence" => Some(NodeKind::SimultaneousConvergence),
            "jumpStep" => Some(NodeKind::JumpStep {
                target: el
                    .get_attr("targetName")
                    .ok_or_else(|| schema(format!("jumpStep {lid} without targetName")))?
                    .to_string(),
            }),
            "actionBlock" => {
                action_blocks.push(el);
                continue;
            }
            other => {
                warnings.push(other, "SFC element not supported; dropped");
                continue;
            }
        };
        let id = local_id(el)?;
        let h = match node_kind {
            Some(k) => {
                let h = b.add(k);
                if handle.insert(id, h).is_some() {
                    return Err(schema(format!("duplicate localId {id}")));
                }
                h
            }
            None => handle[&id],
        };
        for (parent, formal) in incoming(el)? {
            links.push((h, parent, formal, pos));
        }
    }

    for block in action_blocks {
        let lid = block.get_attr("localId").unwrap_or("?");
        let step_id = incoming(block)?
            .first()
            .map(|(p, _)| *p)
            .ok_or_else(|| schema(format!("actionBlock {lid} is not connected to a step")))?;
        for a in block.find_all("action") {
            let text = if let Some(r) = a.find("reference") {
                action_text(r.get_attr("name").unwrap_or(""))?
            } else if let Some(inline) = a.find("inline") {
                st_text(inline, &format!("inline action of step {step_id}"))?
            } else {
                return Err(schema(format!("action in block {lid} has no body")));
            };
            match a.get_attr("qualifier") {
                None | Some("N") => {}
                Some(q) => warnings.push(
                    format!("step {step_id}"),
                    format!("action qualifier {q} not represented; treated as N"),
                ),
            }
            step_actions.entry(step_id).or_default().push(text);
        }
    }
    if placed > 0 {
        warnings.push("SFC", format!("graphical coordinates ignored on {placed} elements"));
    }

    // Children of each parent in formalParameter order, then document order.
    let mut by_parent: BTreeMap<usize, Vec<(Option<u64>, usize, usize)>> = BTreeMap::new();
    for (child, parent, formal, pos) in links {
        let p = *handle
            .get(&parent)
            .ok_or_else(|| schema(format!("connection to unknown localId {parent}")))?;
        let idx = formal.and_then(|f| f.parse::<u64>().ok());
        by_parent.entry(p).or_default().push((idx, pos, child));
    }
    for (p, mut kids) in by_parent {
        kids.sort_by_key(|&(idx, pos, _)| (idx.unwrap_or(u64::MAX), pos));
        for (_, _, c) in kids {
            b.link(p, c);
        }
    }
    let (mut graph, ids) = b.finish_mapped();
    let local_of: HashMap<u32, u32> = handle.iter().map(|(&local, &h)| (ids[h], local)).collect();
    for (step_local, texts) in step_actions {
        let node = handle
            .get(&step_local)
            .map(|&h| ids[h])
            .filter(|&id| graph.node(id).kind.is_step())
            .ok_or_else(|| schema(format!("actionBlock connected to localId {step_local}, which is not a step")))?;
        if texts.len() > 1 {
            warnings.push(
                graph.name(node).to_string(),
                format!("{} actions concatenated into one", texts.len()),
            );
        }
        graph.actions.insert(node, texts.join("\n"));
    }
    let sfc = denormalize(&graph).map_err(|e| {
        let at = local_of.get(&e.node).map_or_else(|| format!("node {}", e.node), |l| format!("localId {l}"));
        schema(format!("{at}: {}", e.message))
    })?;
    Ok((sfc, warnings.0))
}
