//! Export of the guard-free model in the SMV input language.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::firing::FiringModel;
use crate::plcopen::NormalizedGraph;

/// Writes one boolean per step, an input variable choosing the transition to
/// fire, an overflow invariant per step and one `EF` spec per simultaneous
/// convergence. Output depends only on the graph.
pub fn emit_smv(graph: &NormalizedGraph) -> String {
    let m = FiringModel::from_graph(graph);
    let var = |i: usize| format!("s_{}", m.steps[i]);
    let tname = |id: u32| format!("t{id}");
    let mut out = String::new();
    let _ = writeln!(out, "-- guard-free token model of {}", graph.pou_name);
    out.push_str("MODULE main\n");
    if !m.firings.is_empty() {
        let names: Vec<String> = m.firings.iter().map(|f| tname(f.id)).collect();
        let _ = writeln!(out, "IVAR\n  fire : {{{}}};", names.join(", "));
    }
    out.push_str("VAR\n");
    for i in 0..m.steps.len() {
        let _ = writeln!(out, "  {} : boolean;", var(i));
    }

    // per step: transitions that would mark it while it is still marked
    let mut overflow: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for f in &m.firings {
        for &t in &f.targets {
            let twice = f.targets.iter().filter(|&&x| x == t).count() > 1;
            if twice || !f.sources.contains(&t) {
                let ids = overflow.entry(t).or_default();
                if !ids.contains(&f.id) {
                    ids.push(f.id);
                }
            }
        }
    }
    if !m.firings.is_empty() {
        out.push_str("DEFINE\n");
        for f in &m.firings {
            let cond: Vec<String> = f.sources.iter().map(|&s| var(s)).collect();
            let cond = if cond.is_empty() { "FALSE".to_string() } else { cond.join(" & ") };
            let _ = writeln!(out, "  en_{} := {cond};", tname(f.id));
        }
        for (&step, ids) in &overflow {
            let doubled = |id: u32| {
                let f = m.firings.iter().find(|f| f.id == id).expect("listed");
                f.targets.iter().filter(|&&x| x == step).count() > 1
            };
            let terms: Vec<String> = ids
                .iter()
                .map(|&id| {
                    if doubled(id) {
                        format!("en_{}", tname(id))
                    } else {
                        format!("(en_{} & {})", tname(id), var(step))
                    }
                })
                .collect();
            let _ = writeln!(out, "  ovf_{} := {};", m.steps[step], terms.join(" | "));
        }
    }

    out.push_str("ASSIGN\n");
    for i in 0..m.steps.len() {
        let _ = writeln!(
            out,
            "  init({}) := {};",
            var(i),
            if m.initial == Some(i) { "TRUE" } else { "FALSE" }
        );
    }
    for i in 0..m.steps.len() {
        let mut arms = Vec::new();
        for f in &m.firings {
            let value = if f.targets.contains(&i) {
                "TRUE"
            } else if f.sources.contains(&i) {
                "FALSE"
            } else {
                continue;
            };
            arms.push(format!("    fire = {0} & en_{0} : {value};", tname(f.id)));
        }
        if arms.is_empty() {
            let _ = writeln!(out, "  next({0}) := {0};", var(i));
        } else {
            let _ = writeln!(out, "  next({}) := case", var(i));
            for a in arms {
                out.push_str(&a);
                out.push('\n');
            }
            let _ = writeln!(out, "    TRUE : {};\n  esac;", var(i));
        }
    }

    for &step in overflow.keys() {
        let _ = writeln!(out, "INVARSPEC !ovf_{};", m.steps[step]);
    }
    for f in m.firings.iter().filter(|f| f.synchronizing) {
        let conj: Vec<String> = f.sources.iter().map(|&s| var(s)).collect();
        let _ = writeln!(out, "SPEC EF ({});", conj.join(" & "));
    }
    out
}
