use caster_punct::dataset::CommentaryPair;
use caster_punct::generation::build_index;
use caster_punct::metrics::tokenize;
use caster_punct_testkit::oracle;
use proptest::prelude::*;

fn pair(context: &str, target: &str) -> CommentaryPair {
    CommentaryPair {
        video_id: "v".into(),
        pair_index: 0,
        context: context.into(),
        target: target.into(),
        strategy_name: "solo".into(),
    }
}

fn words() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "baron", "drake", "mid", "top", "gank", "flash", "tower",
        ]),
        0..6,
    )
    .prop_map(|w| w.join(" "))
}

proptest! {
    #[test]
    fn similarities_match_dense_oracle(contexts in prop::collection::vec(words(), 1..12), query in words()) {
        let pairs: Vec<CommentaryPair> =
            contexts.iter().enumerate().map(|(i, c)| pair(c, &format!("target {i}"))).collect();
        let index = build_index(&pairs).unwrap();
        let docs: Vec<Vec<String>> = contexts.iter().map(|c| tokenize(c).tokens().to_vec()).collect();
        let expected = oracle::tfidf_cosines(&docs, tokenize(&query).tokens());
        let got = index.similarities(&query);
        for (g, e) in got.iter().zip(&expected) {
            prop_assert!((g - e).abs() < 1e-9, "{got:?} vs {expected:?}");
        }

        // argmax with ties to the lowest ordinal
        let best = expected.iter().copied().fold(0.0f64, f64::max);
        let want = if best <= 1e-12 { 0 } else { expected.iter().position(|&s| s >= best - 1e-12).unwrap() };
        prop_assert_eq!(index.nearest(&query).pair_index, want);
    }

    #[test]
    fn distinctive_context_retrieves_itself(n in 1usize..15, pick in 0usize..15) {
        let pairs: Vec<CommentaryPair> =
            (0..n).map(|i| pair(&format!("shared word{i}"), &format!("target {i}"))).collect();
        let index = build_index(&pairs).unwrap();
        let i = pick % n;
        if n > 1 {
            prop_assert_eq!(index.retrieve_generate(&pairs[i].context), format!("target {i}"));
        } else {
            prop_assert_eq!(index.retrieve_generate("anything"), "target 0");
        }
    }
}

#[test]
fn unseen_query_falls_back_to_first_entry() {
    let index = build_index(&[pair("a b", "first"), pair("c d", "second")]).unwrap();
    assert_eq!(index.retrieve_generate("zzz"), "first");
    assert_eq!(index.retrieve_generate(""), "first");
}
