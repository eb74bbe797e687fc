//! Reduced and PLCopen round trips over generated charts.

mod common;

use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use sfcgen_core::plcopen::{denormalize, emit_plcopen, normalize, parse_plcopen, MetadataTemplate};
use sfcgen_core::reduced::{parse_reduced, serialize_reduced};
use sfcgen_core::synth::{generate, SynthParams};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_charts_round_trip(seed in any::<u64>()) {
        let sfc = generate("Gen", seed, &SynthParams::default());
        let text = serialize_reduced(&sfc).unwrap();
        prop_assert_eq!(&parse_reduced(&text).unwrap(), &sfc);
        let xml = emit_plcopen(&sfc, &MetadataTemplate::default()).unwrap();
        prop_assert_eq!(&parse_plcopen(&xml).unwrap().0, &sfc);
        prop_assert_eq!(&denormalize(&normalize(&sfc).unwrap()).unwrap(), &sfc);
    }
}

#[test]
fn tank_matches_golden_xml() {
    let xml = emit_plcopen(&common::fixtures::tank(), &MetadataTemplate::default()).unwrap();
    let path = data("plcopen/tank.xml");
    if std::env::var_os("SFCGEN_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &xml).unwrap();
    }
    assert_eq!(xml, fs::read_to_string(&path).unwrap());
}

#[test]
fn foreign_export_is_read_with_warnings() {
    let xml = fs::read_to_string(data("plcopen/foreign_mixer.xml")).unwrap();
    let (sfc, warnings) = parse_plcopen(&xml).unwrap();
    assert_eq!(sfc.pou_name, "Mixer");
    let names: Vec<&str> = sfc.steps.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names, ["Idle", "Mix", "Stir", "Empty"]);
    assert!(sfc.steps[0].is_initial);
    assert_eq!(sfc.step("Mix").unwrap().action.as_deref(), Some("bMotor := TRUE;"));
    let idle = sfc.step("Idle").unwrap();
    assert_eq!(idle.children.len(), 2);
    assert!(idle.children.iter().all(|e| e.guard == "bStart AND NOT bFault"));
    assert!(sfc.step("Empty").unwrap().children[0].is_jump);
    assert!(warnings.iter().any(|w| w.message.contains("coordinates")));
}
