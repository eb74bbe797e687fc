//! Hand-built charts shared by the integration tests.

#![allow(dead_code)]

use sfcgen_core::{ReducedSfc, StepNode, VarSection, VariableDecl};

pub fn linear() -> ReducedSfc {
    ReducedSfc::new("Linear")
        .with_var(VarSection::Input, VariableDecl::new("a", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("b", "BOOL"))
        .with_step(StepNode::initial("S0").edge("a", "S1"))
        .with_step(StepNode::new("S1").edge("b", "S2"))
        .with_step(StepNode::new("S2"))
}

pub fn parallel_pair() -> ReducedSfc {
    ReducedSfc::new("ParallelPair")
        .with_var(VarSection::Input, VariableDecl::new("go", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("x", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("y", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("done", "BOOL"))
        .with_step(StepNode::initial("S0").edge("go", "A").edge("go", "B"))
        .with_step(StepNode::new("A").edge("x", "A2"))
        .with_step(StepNode::new("B").edge("y", "B2"))
        .with_step(StepNode::new("A2").edge("done", "S2"))
        .with_step(StepNode::new("B2").edge("done", "S2"))
        .with_step(StepNode::new("S2"))
}

/// Tank cycle: fill and heat in parallel, drain, start over.
pub fn tank() -> ReducedSfc {
    ReducedSfc::new("Tank")
        .with_var(VarSection::Input, VariableDecl::new("bStart", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("bReady", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("bEmpty", "BOOL"))
        .with_var(VarSection::Output, VariableDecl::new("bValve", "BOOL"))
        .with_var(VarSection::Output, VariableDecl::new("bHeater", "BOOL"))
        .with_var(VarSection::Local, VariableDecl::new("nLevel", "INT").with_default("0"))
        .with_step(StepNode::initial("Init").edge("bStart", "Fill").edge("bStart", "Heat"))
        .with_step(
            StepNode::new("Fill")
                .with_action("bValve := TRUE;\nnLevel := nLevel + 1;")
                .edge("bReady", "Drain"),
        )
        .with_step(StepNode::new("Heat").with_action("bHeater := TRUE;").edge("bReady", "Drain"))
        .with_step(
            StepNode::new("Drain")
                .with_action("bValve := FALSE;\nbHeater := FALSE;")
                .jump("bEmpty", "Init"),
        )
}

/// Operator picks manual or automatic mode; both end in Idle, which loops back.
pub fn mode_select() -> ReducedSfc {
    ReducedSfc::new("ModeSelect")
        .with_var(VarSection::Input, VariableDecl::new("bManual", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("bAuto", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("bStop", "BOOL"))
        .with_step(StepNode::initial("Init").edge("bManual", "Manual").edge("bAuto", "Auto"))
        .with_step(StepNode::new("Manual").edge("bStop", "Idle"))
        .with_step(StepNode::new("Auto").edge("bStop OR NOT bAuto", "Idle"))
        .with_step(StepNode::new("Idle").jump("NOT bStop", "Init"))
}

/// Branch A jumps back above the divergence while B is still running.
pub fn jump_out_of_branch() -> ReducedSfc {
    ReducedSfc::new("JumpOut")
        .with_var(VarSection::Input, VariableDecl::new("go", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("again", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("y", "BOOL"))
        .with_step(StepNode::initial("S0").edge("go", "A").edge("go", "B"))
        .with_step(StepNode::new("A").jump("again", "S0"))
        .with_step(StepNode::new("B").edge("y", "B2"))
        .with_step(StepNode::new("B2"))
}

/// Branch A leaves to a step after the convergence.
pub fn jump_past_convergence() -> ReducedSfc {
    ReducedSfc::new("JumpPast")
        .with_var(VarSection::Input, VariableDecl::new("go", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("x", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("bail", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("done", "BOOL"))
        .with_step(StepNode::initial("S0").edge("go", "A").edge("go", "B"))
        .with_step(StepNode::new("A").edge("x", "A2").jump("bail", "S2"))
        .with_step(StepNode::new("A2").edge("done", "S2"))
        .with_step(StepNode::new("B").edge("done", "S2"))
        .with_step(StepNode::new("S2"))
}

/// Branch A jumps into branch B of the same divergence.
pub fn jump_across_branches() -> ReducedSfc {
    ReducedSfc::new("JumpAcross")
        .with_var(VarSection::Input, VariableDecl::new("go", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("x", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("y", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("hop", "BOOL"))
        .with_var(VarSection::Input, VariableDecl::new("done", "BOOL"))
        .with_step(StepNode::initial("S0").edge("go", "A").edge("go", "B"))
        .with_step(StepNode::new("A").edge("x", "A2").jump("hop", "B2"))
        .with_step(StepNode::new("A2").edge("done", "S2"))
        .with_step(StepNode::new("B").edge("y", "B2"))
        .with_step(StepNode::new("B2").edge("done", "S2"))
        .with_step(StepNode::new("S2"))
}

pub fn two_initial_steps() -> ReducedSfc {
    linear().with_step(StepNode::initial("S3"))
}

pub fn dangling_target() -> ReducedSfc {
    ReducedSfc::new("Dangling")
        .with_step(StepNode::initial("S0").edge("TRUE", "S1"))
        .with_step(StepNode::new("S1").edge("TRUE", "Missing"))
}

/// Fixtures with stored SMV models, by file stem.
pub fn smv_fixtures() -> Vec<(&'static str, ReducedSfc)> {
    vec![
        ("linear", linear()),
        ("parallel_pair", parallel_pair()),
        ("tank", tank()),
        ("mode_select", mode_select()),
        ("jump_out_of_branch", jump_out_of_branch()),
    ]
}
