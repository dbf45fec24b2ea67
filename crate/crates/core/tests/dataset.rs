use std::collections::BTreeSet;

use caster_punct::captions::Transcript;
use caster_punct::dataset::{
    build_corpus, corpus_stats, read_jsonl, split_by_video, write_jsonl, CommentaryPair, Corpus,
    DatasetError, SplitSpec,
};
use caster_punct::punctuation::{punctuate, Strategy};
use caster_punct_testkit::synthetic;
use proptest::prelude::*;
use proptest::strategy::Strategy as _;

fn transcripts(seed: u64, videos: usize, cues: usize) -> Vec<Transcript> {
    let mut rng = synthetic::rng(seed);
    (0..videos)
        .map(|i| synthetic::transcript(&mut rng, &format!("video{i:03}"), cues))
        .collect()
}

/// Pairs by direct enumeration: every (i, i+1) of complete sentences of each video.
fn brute_force_pairs(ts: &[Transcript], strategy: &Strategy) -> Vec<(String, String, String)> {
    let mut out = Vec::new();
    for t in ts {
        let s = punctuate(t, strategy).unwrap();
        for i in 0..s.len() {
            for j in 0..s.len() {
                if j == i + 1 && s[i].complete && s[j].complete {
                    out.push((t.video_id.clone(), s[i].text.clone(), s[j].text.clone()));
                }
            }
        }
    }
    out
}

#[test]
fn pairs_match_enumeration_across_videos() {
    let ts = transcripts(3, 6, 17);
    for strategy in [Strategy::solo(), Strategy::duo(), Strategy::tri()] {
        let corpus = build_corpus(&ts, &strategy).unwrap();
        let got: Vec<_> = corpus
            .pairs()
            .iter()
            .map(|p| (p.video_id.clone(), p.context.clone(), p.target.clone()))
            .collect();
        assert_eq!(got, brute_force_pairs(&ts, &strategy));
        for (video, count) in corpus.manifest() {
            let indices: Vec<usize> = corpus
                .pairs()
                .iter()
                .filter(|p| &p.video_id == video)
                .map(|p| p.pair_index)
                .collect();
            assert_eq!(indices, (0..*count).collect::<Vec<_>>());
        }
    }
}

#[test]
fn split_of_hundred_videos() {
    let ts = transcripts(8, 100, 4);
    let corpus = build_corpus(&ts, &Strategy::solo()).unwrap();
    let spec = SplitSpec::new(9, 10, 42).unwrap();
    let (train, test) = split_by_video(&corpus, &spec).unwrap();
    assert_eq!(train.manifest().len(), 90);
    assert_eq!(test.manifest().len(), 10);
    let a: BTreeSet<&str> = train.video_ids().collect();
    let b: BTreeSet<&str> = test.video_ids().collect();
    assert!(a.is_disjoint(&b));
    assert_eq!(train.len() + test.len(), corpus.len());

    let (other, _) = split_by_video(&corpus, &spec.with_seed(43)).unwrap();
    assert_ne!(a, other.video_ids().collect());
    let (train2, test2) = split_by_video(&corpus, &spec).unwrap();
    assert_eq!((train, test), (train2, test2));
}

#[test]
fn split_ignores_input_order() {
    let ts = transcripts(9, 12, 5);
    let mut reversed = ts.clone();
    reversed.reverse();
    let spec = SplitSpec::default();
    let ids = |ts: &[Transcript]| -> BTreeSet<String> {
        let c = build_corpus(ts, &Strategy::solo()).unwrap();
        split_by_video(&c, &spec)
            .unwrap()
            .0
            .video_ids()
            .map(String::from)
            .collect()
    };
    assert_eq!(ids(&ts), ids(&reversed));
}

#[test]
fn degenerate_splits_are_rejected() {
    let one = build_corpus(&transcripts(1, 1, 6), &Strategy::solo()).unwrap();
    assert!(matches!(
        split_by_video(&one, &SplitSpec::default()),
        Err(DatasetError::DegenerateSplit(_))
    ));
    let three = build_corpus(&transcripts(1, 3, 6), &Strategy::solo()).unwrap();
    assert!(matches!(
        split_by_video(&three, &SplitSpec::new(99, 100, 0).unwrap()),
        Err(DatasetError::DegenerateSplit(_))
    ));
}

#[test]
fn duo_pairs_are_about_twice_solo_length() {
    let ts = transcripts(21, 30, 40);
    let solo = corpus_stats(&build_corpus(&ts, &Strategy::solo()).unwrap());
    let duo = corpus_stats(&build_corpus(&ts, &Strategy::duo()).unwrap());
    let ratio = duo.mean_context_tokens / solo.mean_context_tokens;
    assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    assert_eq!(solo.video_count, 30);
}

#[test]
fn jsonl_schema_violations_report_line() {
    let good = r#"{"video_id":"a","pair_index":0,"strategy":"duo","context":"x","target":"y"}"#;
    let cases = [
        format!("{good}\n{{\"video_id\":\"a\"}}\n"),
        format!("{good}\n{}\n", good.replace("}", r#","extra":1}"#)),
        format!("{good}\n{}\n", good.replace("duo", "tri")),
        format!("{good}\nnot json\n"),
    ];
    for case in cases {
        match read_jsonl(case.as_bytes()) {
            Err(DatasetError::Schema { line: 2, .. }) => {}
            other => panic!("{case:?}: {other:?}"),
        }
    }
}

fn pair_strategy() -> impl proptest::strategy::Strategy<Value = Vec<CommentaryPair>> {
    prop::collection::vec(("[a-c]{1,3}", "\\PC{1,20}", "\\PC{1,20}"), 0..20).prop_map(|rows| {
        let mut next = std::collections::BTreeMap::new();
        rows.into_iter()
            .map(|(video_id, context, target)| {
                let slot = next.entry(video_id.clone()).or_insert(0);
                *slot += 1;
                CommentaryPair {
                    video_id,
                    pair_index: *slot - 1,
                    context,
                    target,
                    strategy_name: "k4".into(),
                }
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn jsonl_round_trip(pairs in pair_strategy()) {
        let corpus = Corpus::new("k4", pairs).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert_eq!(text.lines().count(), corpus.len());
        let back = read_jsonl(buf.as_slice()).unwrap();
        if corpus.is_empty() {
            prop_assert!(back.is_empty());
        } else {
            prop_assert_eq!(back, corpus);
        }
    }

    #[test]
    fn split_partitions_videos(videos in 2usize..60, seed in any::<u64>(), num in 1u64..10) {
        let spec = SplitSpec::new(num, 10, seed).unwrap();
        let train_count = spec.train_videos(videos);
        let ts = transcripts(seed, videos, 3);
        let corpus = build_corpus(&ts, &Strategy::solo()).unwrap();
        match split_by_video(&corpus, &spec) {
            Ok((train, test)) => {
                prop_assert_eq!(train.manifest().len(), train_count);
                prop_assert_eq!(train.manifest().len() + test.manifest().len(), videos);
                let a: BTreeSet<&str> = train.video_ids().collect();
                prop_assert!(test.video_ids().all(|v| !a.contains(v)));
                let mut merged: Vec<CommentaryPair> = train.pairs().iter().chain(test.pairs()).cloned().collect();
                let mut all = corpus.pairs().to_vec();
                merged.sort_by(|x, y| (&x.video_id, x.pair_index).cmp(&(&y.video_id, y.pair_index)));
                all.sort_by(|x, y| (&x.video_id, x.pair_index).cmp(&(&y.video_id, y.pair_index)));
                prop_assert_eq!(merged, all);
            }
            Err(DatasetError::DegenerateSplit(_)) => prop_assert!(train_count == 0 || train_count == videos),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
