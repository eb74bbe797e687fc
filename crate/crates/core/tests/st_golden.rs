//! Golden ST programs: each file states on its first line whether it parses.

mod common;

use std::path::PathBuf;
use std::time::Duration;

use common::st_fuzz::{fuzz, load_cases, print_fixpoint};
use sfcgen_core::st::parse_statements;

fn cases() -> Vec<(String, bool, String)> {
    load_cases(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/st"))
}

#[test]
fn suite_has_thirty_programs() {
    let c = cases();
    assert_eq!(c.len(), 30);
    assert!(c.iter().any(|c| c.1) && c.iter().any(|c| !c.1));
}

#[test]
fn programs_parse_as_annotated() {
    for (name, ok, src) in cases() {
        let r = parse_statements(&src);
        assert_eq!(r.is_ok(), ok, "{name}: {r:?}");
    }
}

#[test]
fn valid_programs_reach_a_print_fixpoint() {
    for (name, ok, src) in cases() {
        if ok {
            print_fixpoint(&src).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}

/// Short run; the acceptance suite runs the long one.
#[test]
fn fuzz_smoke() {
    let seeds: Vec<String> = cases().into_iter().map(|c| c.2).collect();
    let stats = fuzz(Duration::from_secs(3), 1, &seeds);
    assert!(stats.failures.is_empty(), "{:#?}", stats.failures);
    assert!(stats.cases > 100 && stats.accepted > 0, "{stats:?}");
}
