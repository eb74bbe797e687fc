//! Connectivity of a step set, computed from the chart's edges directly.

#![allow(dead_code)]

use sfcgen_core::ReducedSfc;

/// Flood fill over undirected edges restricted to `names`.
pub fn connected(sfc: &ReducedSfc, names: &[String]) -> bool {
    if names.is_empty() || names.iter().any(|n| !sfc.steps.iter().any(|s| &s.name == n)) {
        return false;
    }
    let linked = |a: &str, b: &str| {
        sfc.steps.iter().any(|s| {
            (s.name == a && s.children.iter().any(|e| e.target == b))
                || (s.name == b && s.children.iter().any(|e| e.target == a))
        })
    };
    let mut seen = vec![names[0].clone()];
    let mut i = 0;
    while i < seen.len() {
        let cur = seen[i].clone();
        for n in names {
            if !seen.contains(n) && linked(&cur, n) {
                seen.push(n.clone());
            }
        }
        i += 1;
    }
    seen.len() == names.len()
}
