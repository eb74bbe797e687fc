//! Random structural edits used to produce unsafe and malformed variants.

#![allow(dead_code)]

use rand::Rng;
use sfcgen_core::{Edge, ReducedSfc};

/// Applies one random edit: retarget an edge, copy a guard onto a sibling
/// edge (forming a parallel split), add a jump, drop an edge, or flip a jump flag.
pub fn mutate<R: Rng>(sfc: &ReducedSfc, rng: &mut R) -> ReducedSfc {
    let mut out = sfc.clone();
    let n = out.steps.len();
    let names: Vec<String> = out.steps.iter().map(|s| s.name.clone()).collect();
    let s = rng.gen_range(0..n);
    match rng.gen_range(0..5) {
        0 => {
            if let Some(e) = pick(&mut out.steps[s].children, rng) {
                e.target = names[rng.gen_range(0..n)].clone();
            }
        }
        1 => {
            let edges = &mut out.steps[s].children;
            if edges.len() >= 2 {
                let g = edges[0].guard.clone();
                let i = rng.gen_range(1..edges.len());
                edges[i].guard = g;
            } else if let Some(e) = edges.first().cloned() {
                edges.push(Edge::new(e.guard, names[rng.gen_range(0..n)].clone()));
            }
        }
        2 => {
            let t = names[rng.gen_range(0..n)].clone();
            out.steps[s].children.push(Edge::jump(format!("j{}", rng.gen_range(0..1000)), t));
        }
        3 => {
            let edges = &mut out.steps[s].children;
            if !edges.is_empty() {
                let i = rng.gen_range(0..edges.len());
                edges.remove(i);
            }
        }
        _ => {
            if let Some(e) = pick(&mut out.steps[s].children, rng) {
                e.is_jump = !e.is_jump;
            }
        }
    }
    out
}

fn pick<'a, R: Rng>(edges: &'a mut [Edge], rng: &mut R) -> Option<&'a mut Edge> {
    if edges.is_empty() {
        None
    } else {
        let i = rng.gen_range(0..edges.len());
        Some(&mut edges[i])
    }
}
