//! Collaborative-commentary pairs and corpora.
//!
//! A pair is two adjacent punctuated sentences from the same video: the
//! first is what the human commentator said, the second the follow-up the
//! generator should produce. Corpora are split into train and test at video
//! granularity with a seeded, language-independent shuffle.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::captions::Transcript;
use crate::metrics::tokenize;
use crate::punctuation::{punctuate, CommentarySentence, PunctuationError, Strategy};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("schema error on line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("invalid split spec: {0}")]
    InvalidSplit(String),
    #[error(transparent)]
    Punctuation(#[from] PunctuationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentaryPair {
    pub video_id: String,
    pub pair_index: usize,
    pub context: String,
    pub target: String,
    pub strategy_name: String,
}

/// A corpus of pairs sharing one strategy, with a per-video pair count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pairs: Vec<CommentaryPair>,
    strategy_name: String,
    manifest: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub strategy: String,
    pub videos: BTreeMap<String, usize>,
}

impl Corpus {
    /// Fails if a pair carries a different strategy name.
    pub fn new(
        strategy_name: impl Into<String>,
        pairs: Vec<CommentaryPair>,
    ) -> Result<Self, DatasetError> {
        let strategy_name = strategy_name.into();
        let mut manifest = BTreeMap::new();
        for (i, pair) in pairs.iter().enumerate() {
            if pair.strategy_name != strategy_name {
                return Err(DatasetError::Schema {
                    line: i + 1,
                    reason: format!(
                        "strategy `{}` differs from corpus strategy `{strategy_name}`",
                        pair.strategy_name
                    ),
                });
            }
            *manifest.entry(pair.video_id.clone()).or_insert(0) += 1;
        }
        Ok(Corpus {
            pairs,
            strategy_name,
            manifest,
        })
    }

    pub fn pairs(&self) -> &[CommentaryPair] {
        &self.pairs
    }

    pub fn strategy_name(&self) -> &str {
        &self.strategy_name
    }

    pub fn manifest(&self) -> &BTreeMap<String, usize> {
        &self.manifest
    }

    pub fn video_ids(&self) -> impl Iterator<Item = &str> {
        self.manifest.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn manifest_record(&self) -> CorpusManifest {
        CorpusManifest {
            strategy: self.strategy_name.clone(),
            videos: self.manifest.clone(),
        }
    }
}

/// Adjacent complete sentences of one video become (context, target) pairs.
/// Incomplete remainder sentences are skipped and pairs never span videos.
pub fn make_pairs(sentences: &[CommentarySentence], strategy_name: &str) -> Vec<CommentaryPair> {
    let complete: Vec<&CommentarySentence> = sentences.iter().filter(|s| s.complete).collect();
    let mut pairs = Vec::new();
    let mut next_index: BTreeMap<&str, usize> = BTreeMap::new();
    for window in complete.windows(2) {
        let (a, b) = (window[0], window[1]);
        if a.video_id != b.video_id || b.seq_index != a.seq_index + 1 {
            continue;
        }
        let slot = next_index.entry(a.video_id.as_str()).or_insert(0);
        pairs.push(CommentaryPair {
            video_id: a.video_id.clone(),
            pair_index: *slot,
            context: a.text.clone(),
            target: b.text.clone(),
            strategy_name: strategy_name.to_string(),
        });
        *slot += 1;
    }
    pairs
}

/// Punctuates every transcript with `strategy` and pairs the sentences.
/// Transcripts are processed in the order given.
pub fn build_corpus(
    transcripts: &[Transcript],
    strategy: &Strategy,
) -> Result<Corpus, DatasetError> {
    let name = strategy.name();
    let mut pairs = Vec::new();
    for transcript in transcripts {
        let sentences = punctuate(transcript, strategy)?;
        pairs.extend(make_pairs(&sentences, &name));
    }
    Corpus::new(name, pairs)
}

/// SplitMix64: `state += 0x9E3779B97F4A7C15`, then the output is `state`
/// mixed by `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
/// z *= 0x94D049BB133111EB; z ^= z >> 31` (all arithmetic wrapping mod 2^64).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Fisher-Yates from the back: for `i` in `n-1 down to 1`, swap `i`
    /// with `next_u64() % (i + 1)`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

/// Train fraction as an exact ratio plus the shuffle seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    numerator: u64,
    denominator: u64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(numerator: u64, denominator: u64, seed: u64) -> Result<Self, DatasetError> {
        if denominator == 0 || numerator == 0 || numerator >= denominator {
            return Err(DatasetError::InvalidSplit(format!(
                "train fraction {numerator}/{denominator} must lie strictly between 0 and 1"
            )));
        }
        Ok(SplitSpec {
            numerator,
            denominator,
            seed,
        })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        SplitSpec { seed, ..self }
    }

    pub fn train_fraction(&self) -> (u64, u64) {
        (self.numerator, self.denominator)
    }

    /// `round(fraction * video_count)` with halves rounded up.
    pub fn train_videos(&self, video_count: usize) -> usize {
        let n = video_count as u128;
        let (num, den) = (self.numerator as u128, self.denominator as u128);
        ((2 * num * n + den) / (2 * den)) as usize
    }

    /// Parses `9/10` or a decimal such as `0.9` into an exact ratio.
    pub fn parse_fraction(text: &str) -> Result<(u64, u64), DatasetError> {
        let invalid =
            || DatasetError::InvalidSplit(format!("cannot parse train fraction `{text}`"));
        let text = text.trim();
        if let Some((num, den)) = text.split_once('/') {
            let num = num.trim().parse().map_err(|_| invalid())?;
            let den = den.trim().parse().map_err(|_| invalid())?;
            return Ok((num, den));
        }
        let (whole, frac) = text.split_once('.').unwrap_or((text, ""));
        if frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let whole: u64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| invalid())?
        };
        let den = 10u64.pow(frac.len() as u32);
        let frac: u64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| invalid())?
        };
        let num = whole
            .checked_mul(den)
            .and_then(|w| w.checked_add(frac))
            .ok_or_else(invalid)?;
        Ok((num, den))
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            numerator: 9,
            denominator: 10,
            seed: 0,
        }
    }
}

impl FromStr for SplitSpec {
    type Err = DatasetError;

    /// Fraction only; the seed is zero.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (num, den) = SplitSpec::parse_fraction(s)?;
        SplitSpec::new(num, den, 0)
    }
}

/// Assigns whole videos to train or test.
///
/// Video ids are sorted, shuffled with [`SplitMix64`] seeded by `spec.seed`,
/// and the first `round(fraction * count)` go to train. Pairs keep their
/// original relative order on each side.
pub fn split_by_video(corpus: &Corpus, spec: &SplitSpec) -> Result<(Corpus, Corpus), DatasetError> {
    let mut videos: Vec<&str> = corpus.video_ids().collect();
    if videos.len() < 2 {
        return Err(DatasetError::DegenerateSplit(format!(
            "need at least 2 videos, corpus has {}",
            videos.len()
        )));
    }
    SplitMix64::new(spec.seed).shuffle(&mut videos);
    let train_count = spec.train_videos(videos.len());
    if train_count == 0 || train_count >= videos.len() {
        return Err(DatasetError::DegenerateSplit(format!(
            "{train_count} of {} videos would go to train",
            videos.len()
        )));
    }
    let train_ids: std::collections::BTreeSet<&str> =
        videos[..train_count].iter().copied().collect();
    let (train, test): (Vec<CommentaryPair>, Vec<CommentaryPair>) = corpus
        .pairs
        .iter()
        .cloned()
        .partition(|p| train_ids.contains(p.video_id.as_str()));
    Ok((
        Corpus::new(corpus.strategy_name.clone(), train)?,
        Corpus::new(corpus.strategy_name.clone(), test)?,
    ))
}

/// On-disk JSONL record; field order is the line's key order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRecord {
    video_id: String,
    pair_index: usize,
    strategy: String,
    context: String,
    target: String,
}

/// One `{"video_id","pair_index","strategy","context","target"}` object per LF-terminated line.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut sink: W) -> Result<(), DatasetError> {
    for pair in &corpus.pairs {
        let record = PairRecord {
            video_id: pair.video_id.clone(),
            pair_index: pair.pair_index,
            strategy: pair.strategy_name.clone(),
            context: pair.context.clone(),
            target: pair.target.clone(),
        };
        serde_json::to_writer(&mut sink, &record).map_err(std::io::Error::from)?;
        sink.write_all(b"\n")?;
    }
    sink.flush()?;
    Ok(())
}

/// Reads a pairs file. An empty source yields an empty corpus with an empty strategy name.
pub fn read_jsonl<R: BufRead>(source: R) -> Result<Corpus, DatasetError> {
    let mut pairs = Vec::new();
    let mut strategy: Option<String> = None;
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        let record: PairRecord = serde_json::from_str(&line).map_err(|e| DatasetError::Schema {
            line: line_no,
            reason: e.to_string(),
        })?;
        if record.context.is_empty() || record.target.is_empty() {
            return Err(DatasetError::Schema {
                line: line_no,
                reason: "empty context or target".into(),
            });
        }
        match &strategy {
            None => strategy = Some(record.strategy.clone()),
            Some(s) if *s != record.strategy => {
                return Err(DatasetError::Schema {
                    line: line_no,
                    reason: format!("strategy `{}` differs from `{s}`", record.strategy),
                })
            }
            Some(_) => {}
        }
        pairs.push(CommentaryPair {
            video_id: record.video_id,
            pair_index: record.pair_index,
            context: record.context,
            target: record.target,
            strategy_name: record.strategy,
        });
    }
    Corpus::new(strategy.unwrap_or_default(), pairs)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub pair_count: usize,
    pub video_count: usize,
    pub mean_context_tokens: f64,
    pub mean_target_tokens: f64,
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    if corpus.is_empty() {
        return CorpusStats::default();
    }
    let n = corpus.len() as f64;
    let context: usize = corpus
        .pairs
        .iter()
        .map(|p| tokenize(&p.context).len())
        .sum();
    let target: usize = corpus.pairs.iter().map(|p| tokenize(&p.target).len()).sum();
    CorpusStats {
        pair_count: corpus.len(),
        video_count: corpus.manifest.len(),
        mean_context_tokens: context as f64 / n,
        mean_target_tokens: target as f64 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sentence(video: &str, seq: usize, text: &str) -> CommentarySentence {
        CommentarySentence {
            video_id: video.into(),
            seq_index: seq,
            text: text.into(),
            cue_span: (seq, seq),
            complete: true,
        }
    }

    fn pair(video: &str, index: usize, context: &str, target: &str) -> CommentaryPair {
        CommentaryPair {
            video_id: video.into(),
            pair_index: index,
            context: context.into(),
            target: target.into(),
            strategy_name: "duo".into(),
        }
    }

    #[test]
    fn pairs_within_one_video() {
        assert!(make_pairs(&[sentence("v", 0, "A")], "solo").is_empty());
        let pairs = make_pairs(
            &[
                sentence("v", 0, "A"),
                sentence("v", 1, "B"),
                sentence("v", 2, "C"),
            ],
            "solo",
        );
        let got: Vec<_> = pairs
            .iter()
            .map(|p| (p.context.as_str(), p.target.as_str(), p.pair_index))
            .collect();
        assert_eq!(got, [("A", "B", 0), ("B", "C", 1)]);
    }

    #[test]
    fn incomplete_sentences_skipped() {
        let mut tail = sentence("v", 2, "C");
        tail.complete = false;
        let pairs = make_pairs(&[sentence("v", 0, "A"), sentence("v", 1, "B"), tail], "duo");
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn split_rounding() {
        let spec = SplitSpec::new(9, 10, 0).unwrap();
        assert_eq!(spec.train_videos(100), 90);
        assert_eq!(SplitSpec::new(1, 2, 0).unwrap().train_videos(3), 2);
        assert_eq!(SplitSpec::new(99, 100, 0).unwrap().train_videos(10), 10);
        assert_eq!(SplitSpec::new(1, 4, 0).unwrap().train_videos(2), 1);
    }

    #[test]
    fn fraction_parsing() {
        assert_eq!(SplitSpec::parse_fraction("9/10").unwrap(), (9, 10));
        assert_eq!(SplitSpec::parse_fraction("0.9").unwrap(), (9, 10));
        assert_eq!(SplitSpec::parse_fraction(".75").unwrap(), (75, 100));
        assert!(SplitSpec::parse_fraction("abc").is_err());
        assert!("1.5".parse::<SplitSpec>().is_err());
        assert!("0".parse::<SplitSpec>().is_err());
        assert!("1/0".parse::<SplitSpec>().is_err());
    }

    #[test]
    fn splitmix_reference_values() {
        // reference SplitMix64 outputs for seed 0
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn two_video_split() {
        let corpus =
            Corpus::new("duo", vec![pair("a", 0, "x", "y"), pair("b", 0, "z", "w")]).unwrap();
        let spec = SplitSpec::new(1, 2, 42).unwrap();
        let (train, test) = split_by_video(&corpus, &spec).unwrap();
        assert_eq!(train.manifest().len(), 1);
        assert_eq!(test.manifest().len(), 1);
        assert_eq!(split_by_video(&corpus, &spec).unwrap(), (train, test));
    }

    #[test]
    fn degenerate_splits() {
        let one = Corpus::new("duo", vec![pair("a", 0, "x", "y")]).unwrap();
        assert!(matches!(
            split_by_video(&one, &SplitSpec::default()),
            Err(DatasetError::DegenerateSplit(_))
        ));
        let ten = Corpus::new(
            "duo",
            (0..10)
                .map(|v| pair(&format!("v{v}"), 0, "x", "y"))
                .collect(),
        )
        .unwrap();
        assert!(matches!(
            split_by_video(&ten, &SplitSpec::new(99, 100, 1).unwrap()),
            Err(DatasetError::DegenerateSplit(_))
        ));
    }

    #[test]
    fn jsonl_layout() {
        let corpus = Corpus::new("duo", vec![pair("v1", 0, "a \"b\"", "c")]).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&corpus, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"video_id\":\"v1\",\"pair_index\":0,\"strategy\":\"duo\",\"context\":\"a \\\"b\\\"\",\"target\":\"c\"}\n"
        );
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), corpus);
    }

    #[test]
    fn empty_jsonl() {
        let empty = Corpus::new("", vec![]).unwrap();
        let mut buf = Vec::new();
        write_jsonl(&empty, &mut buf).unwrap();
        assert!(buf.is_empty());
        assert_eq!(read_jsonl(buf.as_slice()).unwrap(), empty);
    }

    #[test]
    fn jsonl_schema_errors() {
        let missing =
            "{\"video_id\":\"v\",\"pair_index\":0,\"strategy\":\"duo\",\"context\":\"a\"}\n";
        let extra = "{\"video_id\":\"v\",\"pair_index\":0,\"strategy\":\"duo\",\"context\":\"a\",\"target\":\"b\",\"x\":1}\n";
        let good = "{\"video_id\":\"v\",\"pair_index\":0,\"strategy\":\"duo\",\"context\":\"a\",\"target\":\"b\"}\n";
        let mixed = format!("{good}{}", good.replace("duo", "tri"));
        for (input, line) in [
            (format!("{good}{missing}"), 2),
            (extra.to_string(), 1),
            (mixed, 2),
            (format!("{good}\n{good}"), 2),
        ] {
            match read_jsonl(input.as_bytes()) {
                Err(DatasetError::Schema { line: l, .. }) => assert_eq!(l, line, "{input}"),
                other => panic!("expected schema error, got {other:?}"),
            }
        }
    }

    #[test]
    fn stats() {
        assert_eq!(
            corpus_stats(&Corpus::new("duo", vec![]).unwrap()),
            CorpusStats::default()
        );
        let s = corpus_stats(&Corpus::new("duo", vec![pair("v", 0, "a b", "c")]).unwrap());
        assert_eq!(s.pair_count, 1);
        assert_eq!(s.video_count, 1);
        assert_eq!(s.mean_context_tokens, 2.0);
        assert_eq!(s.mean_target_tokens, 1.0);
    }

    #[test]
    fn manifest_record_shape() {
        let corpus = Corpus::new(
            "duo",
            vec![
                pair("b", 0, "x", "y"),
                pair("a", 0, "x", "y"),
                pair("b", 1, "y", "z"),
            ],
        )
        .unwrap();
        let json = serde_json::to_string(&corpus.manifest_record()).unwrap();
        assert_eq!(json, r#"{"strategy":"duo","videos":{"a":1,"b":2}}"#);
    }
}
