mod support;

use avqa_core::decode::{
    beam_search, constrained_beam_search, satisfies, ConstraintSet, DecodeError, FnScorer,
    MatchState, TokenId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{exhaustive, random_sets, toy};

#[test]
fn full_width_search_matches_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut found = 0;
    for case in 0..500u64 {
        let vocab = rng.gen_range(2..=5);
        let max_len = rng.gen_range(1..=6);
        let scorer = toy(vocab, case);
        let sets = random_sets(&mut rng, vocab);
        let beam = vocab.pow(max_len as u32);
        let got = constrained_beam_search(&scorer, &sets, beam, max_len);
        match exhaustive(&scorer, &sets, max_len) {
            Some((tokens, score)) => {
                let r = got.unwrap_or_else(|e| panic!("case {case}: {e}"));
                assert!(r.finished, "case {case}");
                assert_eq!(r.tokens, tokens, "case {case}");
                assert_eq!(r.log_score, score, "case {case}");
                assert!(satisfies(&r.tokens, &sets));
                found += 1;
            }
            None => match got {
                Ok(r) => assert!(
                    !r.finished,
                    "case {case}: finished without a satisfying sequence"
                ),
                Err(DecodeError::SearchExhausted { .. }) => {}
                Err(e) => panic!("case {case}: {e}"),
            },
        }
    }
    assert!(found > 300, "too few satisfiable cases: {found}");
}

#[test]
fn uniform_scorer_single_token_constraint() {
    let s = FnScorer::new(4, 3, |_: &[TokenId]| vec![0.25f64.ln(); 4]);
    let r =
        constrained_beam_search(&s, &[ConstraintSet::new(vec![vec![1]]).unwrap()], 4, 3).unwrap();
    assert_eq!(r.tokens, vec![1]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn no_constraints_equals_plain_beam(seed in any::<u64>(), vocab in 2usize..6, beam in 1usize..6, max_len in 1usize..7) {
        let s = toy(vocab, seed);
        let a = constrained_beam_search(&s, &[], beam, max_len).unwrap();
        let b = beam_search(&s, beam, max_len).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn narrow_beams_still_satisfy_constraints(seed in any::<u64>(), beam in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = 5;
        let s = toy(vocab, seed);
        let sets = random_sets(&mut rng, vocab);
        if let Ok(r) = constrained_beam_search(&s, &sets, beam, 8) {
            if r.finished {
                prop_assert!(satisfies(&r.tokens, &sets));
            }
        }
    }

    #[test]
    fn bank_never_decreases(seed in any::<u64>(), seq in prop::collection::vec(0u32..4, 0..12)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sets = random_sets(&mut rng, 5);
        let mut states = vec![MatchState::default(); sets.len()];
        let mut bank = 0;
        for (i, &t) in seq.iter().enumerate() {
            states = states.iter().zip(&sets).map(|(st, set)| st.advance(set, t)).collect();
            let now = states.iter().filter(|s| s.satisfied).count();
            prop_assert!(now >= bank);
            bank = now;
            prop_assert_eq!(now == sets.len(), satisfies(&seq[..=i], &sets));
        }
    }

    #[test]
    fn search_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = toy(4, seed);
        let sets = random_sets(&mut rng, 4);
        let a = constrained_beam_search(&s, &sets, 3, 6).map_err(|e| e.to_string());
        let b = constrained_beam_search(&s, &sets, 3, 6).map_err(|e| e.to_string());
        prop_assert_eq!(a, b);
    }
}
