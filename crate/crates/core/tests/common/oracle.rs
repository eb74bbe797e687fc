//! Brute-force reference for the guard-free token semantics.
//!
//! Works straight from the reduced chart: edges with the same guard text that
//! share a source or a target fire together as one transition. Every one of
//! the 2^n markings is visited in a fixpoint sweep, so the result does not
//! depend on any search order.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use sfcgen_core::ReducedSfc;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleTransition {
    pub sources: BTreeSet<usize>,
    pub targets: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub reachable: usize,
    pub overflow_steps: BTreeSet<String>,
    pub unreachable_steps: BTreeSet<String>,
    pub unattainable: usize,
}

impl OracleResult {
    pub fn safe(&self) -> bool {
        self.overflow_steps.is_empty() && self.unreachable_steps.is_empty() && self.unattainable == 0
    }
}

pub fn transitions(sfc: &ReducedSfc) -> Vec<OracleTransition> {
    let idx = |name: &str| sfc.steps.iter().position(|s| s.name == name).expect("target exists");
    // (source, target, is_jump) per guard
    let mut by_guard: BTreeMap<&str, Vec<(usize, usize, bool)>> = BTreeMap::new();
    for (i, s) in sfc.steps.iter().enumerate() {
        for e in &s.children {
            by_guard.entry(e.guard.trim()).or_default().push((i, idx(&e.target), e.is_jump));
        }
    }
    let mut out = Vec::new();
    for edges in by_guard.values() {
        // merge edges sharing a source or a (target, jump) endpoint until stable
        let mut groups: Vec<Vec<(usize, usize, bool)>> = edges.iter().map(|e| vec![*e]).collect();
        loop {
            let mut merged = false;
            'scan: for a in 0..groups.len() {
                for b in a + 1..groups.len() {
                    let touch = groups[a]
                        .iter()
                        .any(|x| groups[b].iter().any(|y| x.0 == y.0 || (x.1 == y.1 && x.2 == y.2)));
                    if touch {
                        let g = groups.remove(b);
                        groups[a].extend(g);
                        merged = true;
                        break 'scan;
                    }
                }
            }
            if !merged {
                break;
            }
        }
        for g in groups {
            let sources: BTreeSet<usize> = g.iter().map(|e| e.0).collect();
            let mut seen = BTreeSet::new();
            let targets = g
                .iter()
                .filter(|e| seen.insert((e.1, e.2)))
                .map(|e| e.1)
                .collect();
            out.push(OracleTransition { sources, targets });
        }
    }
    out
}

pub fn enumerate(sfc: &ReducedSfc) -> OracleResult {
    let n = sfc.steps.len();
    assert!(n <= 16, "brute force is for small charts");
    let ts = transitions(sfc);
    let init = sfc.steps.iter().position(|s| s.is_initial).expect("initial step");
    let mut reach = vec![false; 1 << n];
    reach[1 << init] = true;
    let mut overflow = BTreeSet::new();
    loop {
        let mut changed = false;
        for m in 0..1usize << n {
            if !reach[m] {
                continue;
            }
            for t in &ts {
                if !t.sources.iter().all(|&s| m >> s & 1 == 1) {
                    continue;
                }
                let mut next = m;
                for &s in &t.sources {
                    next &= !(1 << s);
                }
                let mut ok = true;
                for &x in &t.targets {
                    if next >> x & 1 == 1 {
                        overflow.insert(sfc.steps[x].name.clone());
                        ok = false;
                        break;
                    }
                    next |= 1 << x;
                }
                if ok && !reach[next] {
                    reach[next] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let markings: Vec<usize> = (0..1usize << n).filter(|&m| reach[m]).collect();
    let union = markings.iter().fold(0, |a, m| a | m);
    let unreachable_steps = (0..n)
        .filter(|&i| union >> i & 1 == 0)
        .map(|i| sfc.steps[i].name.clone())
        .collect();
    let unattainable = ts
        .iter()
        .filter(|t| t.sources.len() > 1)
        .filter(|t| !markings.iter().any(|&m| t.sources.iter().all(|&s| m >> s & 1 == 1)))
        .count();
    OracleResult {
        reachable: markings.len(),
        overflow_steps: overflow,
        unreachable_steps,
        unattainable,
    }
}

/// Explorer against enumeration on one chart: verdict, state count, the
/// overflow, unreachable and unattainable sets, and witness replay. `None`
/// when the chart does not normalize.
pub fn compare(sfc: &ReducedSfc) -> Option<Result<(), String>> {
    use sfcgen_core::plcopen::normalize;
    use sfcgen_core::safety::{explore, FiringModel, ReplayError, Verdict, VerifyLimits, ViolationKind};

    let g = normalize(sfc).ok()?;
    let report = explore(&g, &VerifyLimits::default());
    let want = enumerate(sfc);
    let name = &sfc.pou_name;
    let check = || -> Result<(), String> {
        let ensure = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(format!("{name}: {what} differs\n{report:?}\n{want:?}"))
            }
        };
        ensure((report.verdict == Verdict::Safe) == want.safe(), "verdict")?;
        ensure(report.explored_states as usize == want.reachable, "state count")?;
        let kinds = |k: ViolationKind| report.violations.iter().filter(move |v| v.kind == k);
        let overflow: BTreeSet<String> = kinds(ViolationKind::TokenOverflow).map(|v| v.element.clone()).collect();
        ensure(overflow == want.overflow_steps, "overflow set")?;
        let unreachable: BTreeSet<String> = kinds(ViolationKind::UnreachableStep).map(|v| v.element.clone()).collect();
        ensure(unreachable == want.unreachable_steps, "unreachable set")?;
        ensure(kinds(ViolationKind::UnattainableConvergence).count() == want.unattainable, "unattainable count")?;

        // every overflow witness replays to the overflow it reports
        let model = FiringModel::from_graph(&g);
        for v in kinds(ViolationKind::TokenOverflow) {
            match model.replay(&v.trace) {
                Err(ReplayError::Overflow { step, index }) if step == v.element && index + 1 == v.trace.len() => {}
                other => return Err(format!("{name}: witness for {} does not replay: {other:?}", v.element)),
            }
        }
        Ok(())
    };
    Some(check())
}
