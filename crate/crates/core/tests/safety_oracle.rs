//! The explorer against exhaustive enumeration of all markings.

mod common;

use common::{fixtures, mutate::mutate, oracle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfcgen_core::plcopen::normalize;
use sfcgen_core::safety::{explore, verify, Verdict, VerifyLimits};
use sfcgen_core::synth::{corpus, SynthParams};
use sfcgen_core::ReducedSfc;

fn agree(sfc: &ReducedSfc) -> bool {
    match oracle::compare(sfc) {
        None => false,
        Some(Ok(())) => true,
        Some(Err(msg)) => panic!("{msg}"),
    }
}

#[test]
fn fixtures_match_enumeration() {
    for sfc in [
        fixtures::linear(),
        fixtures::parallel_pair(),
        fixtures::tank(),
        fixtures::mode_select(),
        fixtures::jump_out_of_branch(),
        fixtures::jump_past_convergence(),
        fixtures::jump_across_branches(),
    ] {
        assert!(agree(&sfc), "{} should normalize", sfc.pou_name);
    }
}

#[test]
fn linear_chart_hand_count() {
    let r = verify(&fixtures::linear(), &VerifyLimits::default());
    assert_eq!(r.verdict, Verdict::Safe);
    assert_eq!(r.explored_states, 3);
}

#[test]
fn generated_and_mutated_charts_match_enumeration() {
    let base = corpus(11, 60, &SynthParams::small());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut compared = 0;
    let mut unsafe_seen = 0;
    for sfc in &base {
        compared += usize::from(agree(sfc));
        let mut m = sfc.clone();
        for _ in 0..4 {
            m = mutate(&m, &mut rng);
            if agree(&m) {
                compared += 1;
                unsafe_seen += usize::from(!oracle::enumerate(&m).safe());
            }
        }
    }
    assert!(compared >= 100, "only {compared} charts compared");
    assert!(unsafe_seen > 0);
}

#[test]
fn exploration_is_deterministic() {
    let g = normalize(&fixtures::tank()).unwrap();
    let a = explore(&g, &VerifyLimits::default());
    let b = explore(&g, &VerifyLimits::default());
    assert_eq!((a.verdict, &a.violations, a.explored_states), (b.verdict, &b.violations, b.explored_states));
}

#[test]
fn larger_limits_keep_safe_verdicts() {
    for sfc in corpus(3, 30, &SynthParams::default()) {
        let small = VerifyLimits::new(40, std::time::Duration::from_secs(5)).unwrap();
        if verify(&sfc, &small).is_safe() {
            assert!(verify(&sfc, &VerifyLimits::default()).is_safe());
        }
    }
}
