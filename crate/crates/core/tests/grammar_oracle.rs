//! The byte recognizer against an Earley parse of the exported grammar.

mod common;

use common::earley::Earley;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfcgen_core::reduced::{grammar, recognize, serialize_reduced, Classification};
use sfcgen_core::synth::{corpus, SynthParams};
use sfcgen_core::{ReducedSfc, StepNode, VarSection, VariableDecl};

fn recognizer_verdict(bytes: &[u8]) -> Result<bool, usize> {
    recognize(bytes)
        .map(|c| c == Classification::ValidComplete)
        .map_err(|r| r.position)
}

fn small_docs() -> Vec<String> {
    let mut docs: Vec<String> = corpus(2, 12, &SynthParams::small())
        .iter()
        .map(|c| serialize_reduced(c).unwrap())
        .collect();
    let odd = ReducedSfc::new("Odd")
        .with_var(VarSection::Local, VariableDecl::new("s", "STRING").with_default("'tab\there \"q\" \\ é ✓ 😀'"))
        .with_step(StepNode::initial("A").with_comment("ctl \u{1} \u{7f} end").edge("x", "B"))
        .with_step(StepNode::new("B").with_action("").jump("TRUE", "A"));
    docs.push(serialize_reduced(&odd).unwrap());
    docs
}

#[test]
fn grammar_accepts_canonical_documents() {
    let e = Earley::new(&grammar());
    for d in small_docs() {
        assert_eq!(e.run(d.as_bytes()), Ok(true));
        assert_eq!(recognizer_verdict(d.as_bytes()), Ok(true));
    }
}

#[test]
fn prefixes_agree() {
    let e = Earley::new(&grammar());
    let d = small_docs().pop().unwrap();
    for cut in 0..d.len() {
        let p = &d.as_bytes()[..cut];
        assert_eq!(recognizer_verdict(p), e.run(p), "prefix of length {cut}");
    }
}

#[test]
fn mutations_agree() {
    let e = Earley::new(&grammar());
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let alphabet = b"{}[]\",:\\ \nnulltrue0aZ\x01\x7f\xc3\xa9\xff";
    for d in small_docs() {
        for _ in 0..40 {
            let mut bytes = d.clone().into_bytes();
            let at = rng.gen_range(0..bytes.len());
            match rng.gen_range(0..3) {
                0 => bytes[at] = alphabet[rng.gen_range(0..alphabet.len())],
                1 => bytes.insert(at, alphabet[rng.gen_range(0..alphabet.len())]),
                _ => {
                    bytes.remove(at);
                }
            }
            assert_eq!(recognizer_verdict(&bytes), e.run(&bytes), "{}", String::from_utf8_lossy(&bytes));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn arbitrary_bytes_agree(bytes in proptest::collection::vec(any::<u8>(), 0..40)) {
        let mut input = b"{\n  \"pou_name\": \"".to_vec();
        input.extend(bytes);
        let e = Earley::new(&grammar());
        prop_assert_eq!(recognizer_verdict(&input), e.run(&input));
    }
}
