//! Seeded generator of well-formed charts for tests, benchmarks and demos.
//!
//! Charts are built from nested blocks: plain steps, alternative branches
//! joined on a common step, parallel branches sharing their guard, and
//! backward jumps within a branch. Every generated chart validates,
//! normalizes and is safe under the guard-free semantics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{group_edges, BranchGroup, Edge, ReducedSfc, StepNode, VarSection, VariableDecl};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    /// Bounds on the step count, initial step included.
    pub min_steps: usize,
    pub max_steps: usize,
    pub max_depth: usize,
    pub branch_prob: f64,
    pub parallel_prob: f64,
    pub loop_prob: f64,
    /// Caps on parallel splits and on jump edges per chart.
    pub max_parallel: usize,
    pub max_jumps: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            min_steps: 3,
            max_steps: 12,
            max_depth: 2,
            branch_prob: 0.25,
            parallel_prob: 0.4,
            loop_prob: 0.15,
            max_parallel: 3,
            max_jumps: 2,
        }
    }
}

impl SynthParams {
    pub fn small() -> Self {
        SynthParams {
            min_steps: 2,
            max_steps: 6,
            ..Default::default()
        }
    }
}

const INPUTS: &[&str] = &["bStart", "bStop", "bSensor", "bReady", "bLevelHigh", "bLevelLow", "bDoorClosed"];
const OUTPUTS: &[&str] = &["bMotor", "bValve", "bHeater", "bLamp", "bPump"];
const COUNTERS: &[&str] = &["iCount", "iBatch", "iLevel"];
const NAMES: &[&str] = &[
    "Fill", "Heat", "Mix", "Drain", "Wait", "Check", "Move", "Clamp", "Weld", "Cool", "Rinse", "Sort", "Load",
    "Unload", "Press", "Dose",
];

struct Gen {
    rng: ChaCha8Rng,
    params: SynthParams,
    budget: usize,
    steps: Vec<StepNode>,
    guards: usize,
    parallels: usize,
    jumps: usize,
}

impl Gen {
    fn step(&mut self) -> usize {
        let i = self.steps.len();
        let base = NAMES[self.rng.gen_range(0..NAMES.len())];
        let mut s = StepNode::new(format!("{base}{i}"));
        if self.rng.gen_bool(0.7) {
            s = s.with_action(self.action());
        }
        self.steps.push(s);
        self.budget = self.budget.saturating_sub(1);
        i
    }

    fn action(&mut self) -> String {
        let out = OUTPUTS[self.rng.gen_range(0..OUTPUTS.len())];
        let cnt = COUNTERS[self.rng.gen_range(0..COUNTERS.len())];
        match self.rng.gen_range(0..4) {
            0 => format!("{out} := TRUE;"),
            1 => format!("{out} := FALSE;\n{cnt} := {cnt} + 1;"),
            2 => format!("IF {cnt} > 10 THEN\n  {out} := FALSE;\nELSE\n  {out} := TRUE;\nEND_IF;"),
            _ => format!("{cnt} := 0;"),
        }
    }

    /// Fresh guard text; distinct per call so unrelated transitions never merge.
    fn guard(&mut self) -> String {
        self.guards += 1;
        let a = INPUTS[self.rng.gen_range(0..INPUTS.len())];
        let b = INPUTS[self.rng.gen_range(0..INPUTS.len())];
        let n = self.guards;
        match self.rng.gen_range(0..4) {
            0 => format!("{a} AND iCount >= {n}"),
            1 => format!("NOT {a} OR iLevel > {n}"),
            2 => format!("{a} AND NOT {b} AND iBatch <> {n}"),
            _ => format!("iLevel = {n}"),
        }
    }

    fn link(&mut self, from: usize, guard: String, to: usize) {
        let target = self.steps[to].name.clone();
        self.steps[from].children.push(Edge::new(guard, target));
    }

    /// Builds a sequence entered from `from` through `guard` and returns its
    /// last step, which has no outgoing edges yet.
    fn seq(&mut self, from: usize, guard: String, depth: usize, in_branch: bool) -> usize {
        let first = self.step();
        self.link(from, guard, first);
        let mut last = first;
        loop {
            let stop = if in_branch {
                self.budget == 0 || self.rng.gen_bool(0.5)
            } else {
                self.budget == 0
            };
            if stop {
                break;
            }
            let roll: f64 = self.rng.gen();
            if depth < self.params.max_depth
                && self.budget >= 3
                && self.parallels < self.params.max_parallel
                && roll < self.params.parallel_prob
            {
                last = self.parallel(last, depth);
            } else if depth < self.params.max_depth
                && self.budget >= 3
                && roll < self.params.parallel_prob + self.params.branch_prob
            {
                last = self.alternative(last, depth);
            } else if self.budget >= 2 && self.jumps < self.params.max_jumps && roll > 1.0 - self.params.loop_prob {
                self.jumps += 1;
                // backward jump out of a step that also continues forward
                let s = self.step();
                let g = self.guard();
                self.link(last, g, s);
                let back = self.guard();
                let target = self.steps[first].name.clone();
                self.steps[s].children.push(Edge::jump(back, target));
                let next = self.step();
                let g = self.guard();
                self.link(s, g, next);
                last = next;
            } else {
                let s = self.step();
                let g = self.guard();
                self.link(last, g, s);
                last = s;
            }
        }
        last
    }

    fn branch_count(&mut self) -> usize {
        let max = self.budget.saturating_sub(1).clamp(2, 3);
        self.rng.gen_range(2..=max)
    }

    /// Keeps one step per branch and the join in reserve so nested growth
    /// in early branches cannot exhaust the budget.
    fn reserve(&mut self, n: usize) {
        self.budget -= n + 1;
    }

    fn alternative(&mut self, from: usize, depth: usize) -> usize {
        let n = self.branch_count();
        self.reserve(n);
        let ends: Vec<usize> = (0..n)
            .map(|_| {
                self.budget += 1;
                let g = self.guard();
                self.seq(from, g, depth + 1, true)
            })
            .collect();
        self.budget += 1;
        let join = self.step();
        for e in ends {
            let g = self.guard();
            self.link(e, g, join);
        }
        join
    }

    fn parallel(&mut self, from: usize, depth: usize) -> usize {
        self.parallels += 1;
        let n = self.branch_count();
        self.reserve(n);
        let split = self.guard();
        let ends: Vec<usize> = (0..n)
            .map(|_| {
                self.budget += 1;
                self.seq(from, split.clone(), depth + 1, true)
            })
            .collect();
        self.budget += 1;
        let join = self.step();
        let sync = self.guard();
        for e in ends {
            self.link(e, sync.clone(), join);
        }
        join
    }
}

/// Generates one chart. The same seed and parameters give the same chart.
pub fn generate(name: &str, seed: u64, params: &SynthParams) -> ReducedSfc {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = rng.gen_range(params.min_steps.max(2)..=params.max_steps.max(params.min_steps.max(2)));
    let mut g = Gen {
        rng,
        params: params.clone(),
        budget: target - 1,
        steps: vec![StepNode::initial("Init")],
        guards: 0,
        parallels: 0,
        jumps: 0,
    };
    let first = g.guard();
    let last = g.seq(0, first, 0, false);
    if g.jumps < params.max_jumps && g.rng.gen_bool(0.6) {
        let back = g.guard();
        g.steps[last].children.push(Edge::jump(back, "Init"));
    }

    let mut sfc = ReducedSfc::new(name);
    for name in INPUTS {
        sfc = sfc.with_var(VarSection::Input, VariableDecl::new(*name, "BOOL"));
    }
    for name in OUTPUTS {
        sfc = sfc.with_var(VarSection::Output, VariableDecl::new(*name, "BOOL"));
    }
    for name in COUNTERS {
        sfc = sfc.with_var(VarSection::Local, VariableDecl::new(*name, "INT").with_default("0"));
    }
    sfc.steps = g.steps;
    if let Some(s) = sfc.steps.get_mut(0) {
        s.comment = Some(format!("entry of {}", sfc.pou_name));
    }
    sfc
}

/// `n` charts named `Chart0`, `Chart1`, ... with seeds derived from `seed`.
pub fn corpus(seed: u64, n: usize, params: &SynthParams) -> Vec<ReducedSfc> {
    (0..n)
        .map(|i| generate(&format!("Chart{i}"), seed.wrapping_mul(1_000_003).wrapping_add(i as u64), params))
        .collect()
}

/// Short plain-English description built from the chart's step names, used
/// as a stand-in summary when none is supplied.
pub fn describe(sfc: &ReducedSfc) -> String {
    let mut verbs: Vec<String> = sfc
        .steps
        .iter()
        .skip(1)
        .map(|s| s.name.trim_end_matches(|c: char| c.is_ascii_digit()).to_lowercase())
        .collect();
    verbs.dedup();
    let parallel = sfc
        .steps
        .iter()
        .flat_map(|s| group_edges(&s.children))
        .any(|g| matches!(g, BranchGroup::Parallel(_)));
    format!(
        "Sequence {} with {} steps{}: {}.",
        sfc.pou_name,
        sfc.steps.len(),
        if parallel { " and parallel branches" } else { "" },
        verbs.join(", then ")
    )
}
