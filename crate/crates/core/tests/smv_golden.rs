//! Emitted SMV models against stored files. Set `SFCGEN_BLESS=1` to rewrite them.

mod common;

use std::fs;
use std::path::PathBuf;

use common::fixtures::smv_fixtures;
use sfcgen_core::plcopen::normalize;
use sfcgen_core::safety::emit_smv;

#[test]
fn models_match_goldens() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/smv");
    let bless = std::env::var_os("SFCGEN_BLESS").is_some();
    for (stem, sfc) in smv_fixtures() {
        let text = emit_smv(&normalize(&sfc).unwrap());
        let path = dir.join(format!("{stem}.smv"));
        if bless {
            fs::create_dir_all(&dir).unwrap();
            fs::write(&path, &text).unwrap();
        }
        let golden = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(text, golden, "{stem}");
    }
}

#[test]
fn linear_model_shape() {
    let text = emit_smv(&normalize(&common::fixtures::linear()).unwrap());
    assert_eq!(text.matches(" : boolean;").count(), 3);
    assert!(text.contains("init(s_S0) := TRUE;"));
    assert!(!text.contains("SPEC EF"));
}
