use avqa_core::eval::{bleu, cider, corpus_bleu, rouge_l, tokenize, Smoothing};
use proptest::prelude::*;

fn split(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}

// Frozen from tests/oracles/cider_d.py, an independent transcription of the
// coco-caption CIDEr-D scorer.
const CIDER_EXPECTED: [f64; 3] = [4.1517092582183555, 4.6891102656434835, 3.8226977913781903];
const CIDER_MEAN: f64 = 4.221172438413343;

#[test]
fn cider_matches_independent_oracle() {
    let cands: Vec<Vec<String>> = [
        "what kind of flowers are these",
        "what color are the flowers",
        "where is the fan",
    ]
    .map(split)
    .to_vec();
    let refs: Vec<Vec<Vec<String>>> = vec![
        vec![
            split("what species of flowers are these"),
            split("what kind of flower is this"),
        ],
        vec![
            split("what color are the petals"),
            split("what colour are the flowers"),
        ],
        vec![
            split("where is the ceiling fan"),
            split("what is the fan attached to"),
        ],
    ];
    let s = cider(&cands, &refs).unwrap();
    for (got, want) in s.per_item.iter().zip(CIDER_EXPECTED) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
    assert!((s.mean - CIDER_MEAN).abs() < 1e-6);
    assert!(!s.degenerate_idf);
}

#[test]
fn bleu_fixture_exact() {
    let s = bleu(
        &split("the cat sat"),
        &[split("the cat sat down")],
        2,
        Smoothing::None,
    )
    .unwrap();
    assert!((s.score - (-1.0f64 / 3.0).exp()).abs() < 1e-9);
}

#[test]
fn rouge_fixture_exact() {
    assert!((rouge_l(&split("the cat"), &split("the black cat")).f1 - 0.8).abs() < 1e-9);
}

fn sentence() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 1..10)
        .prop_map(|v| v.into_iter().map(str::to_owned).collect())
}

proptest! {
    #[test]
    fn identity_scores_one(s in sentence()) {
        let n = s.len().min(4);
        prop_assert!((bleu(&s, &[s.clone()], n, Smoothing::None).unwrap().score - 1.0).abs() < 1e-12);
        prop_assert_eq!(rouge_l(&s, &s).f1, 1.0);
    }

    #[test]
    fn scores_are_bounded(c in sentence(), r in sentence()) {
        let b = bleu(&c, &[r.clone()], 4, Smoothing::AddOne).unwrap().score;
        prop_assert!((0.0..=1.0 + 1e-12).contains(&b));
        let rl = rouge_l(&c, &r);
        prop_assert!((0.0..=1.0).contains(&rl.f1));
        prop_assert!(rl.f1 <= rl.precision.max(rl.recall) + 1e-12);
    }

    #[test]
    fn rouge_is_symmetric_in_f(c in sentence(), r in sentence()) {
        prop_assert!((rouge_l(&c, &r).f1 - rouge_l(&r, &c).f1).abs() < 1e-12);
    }

    #[test]
    fn corpus_bleu_of_one_item_is_sentence_bleu(c in sentence(), r in sentence()) {
        let s = bleu(&c, &[r.clone()], 2, Smoothing::None).unwrap().score;
        let cb = corpus_bleu(&[c], &[vec![r]], 2, Smoothing::None).unwrap().score;
        prop_assert!((s - cb).abs() < 1e-12);
    }

    #[test]
    fn cider_nonnegative_and_self_max(a in sentence(), b in sentence()) {
        prop_assume!(a != b);
        let s = cider(&[a.clone(), b.clone()], &[vec![a.clone()], vec![a.clone()]]).unwrap();
        prop_assert!(s.per_item.iter().all(|x| *x >= 0.0));
        prop_assert!(s.per_item[0] + 1e-9 >= s.per_item[1]);
    }

    #[test]
    fn tokenizer_is_idempotent(s in "[A-Za-z ,.?!']{0,40}") {
        let once = tokenize(&s);
        prop_assert_eq!(tokenize(&once.join(" ")), once);
    }
}
