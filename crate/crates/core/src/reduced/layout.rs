//! Byte layout of the canonical reduced document, shared by the recognizer
//! and the grammar export.

#[derive(Debug, PartialEq, Eq)]
pub(crate) enum Item {
    Lit(&'static str),
    Str,
    NullableStr,
    Bool,
    /// `[]`, or `[` LF entry (`,` LF entry)* LF indent `]`.
    List {
        name: &'static str,
        indent: usize,
        entry: &'static [Item],
    },
}

use Item::*;

pub(crate) const VARIABLE: &[Item] = &[
    Lit("      {\n        \"name\": "),
    Str,
    Lit(",\n        \"type\": "),
    Str,
    Lit(",\n        \"default\": "),
    NullableStr,
    Lit("\n      }"),
];

pub(crate) const CHILD: &[Item] = &[
    Lit("        {\n          \"target\": "),
    Str,
    Lit(",\n          \"guard\": "),
    Str,
    Lit(",\n          \"jump\": "),
    Bool,
    Lit("\n        }"),
];

pub(crate) const STEP: &[Item] = &[
    Lit("    {\n      \"name\": "),
    Str,
    Lit(",\n      \"initial\": "),
    Bool,
    Lit(",\n      \"action\": "),
    NullableStr,
    Lit(",\n      \"comment\": "),
    NullableStr,
    Lit(",\n      \"children\": "),
    List {
        name: "child",
        indent: 6,
        entry: CHILD,
    },
    Lit("\n    }"),
];

pub(crate) const DOCUMENT: &[Item] = &[
    Lit("{\n  \"pou_name\": "),
    Str,
    Lit(",\n  \"variables\": {\n    \"input\": "),
    List {
        name: "variable",
        indent: 4,
        entry: VARIABLE,
    },
    Lit(",\n    \"output\": "),
    List {
        name: "variable",
        indent: 4,
        entry: VARIABLE,
    },
    Lit(",\n    \"local\": "),
    List {
        name: "variable",
        indent: 4,
        entry: VARIABLE,
    },
    Lit("\n  },\n  \"steps\": "),
    List {
        name: "step",
        indent: 2,
        entry: STEP,
    },
    Lit("\n}\n"),
];
