//! Automatic evaluation metrics for generated commentary.
//!
//! Everything here is implemented from first principles over a shared
//! tokenizer: corpus BLEU with add-one smoothing on zero-match orders,
//! ROUGE-N and ROUGE-L as precision/recall/F1, and exact-match METEOR with
//! its fragmentation penalty. [`evaluate`] composes them into a
//! [`MetricReport`] whose corpus block is scaled to 0..100.

mod bleu;
mod meteor;
mod report;
mod rouge;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bleu::{bleu_corpus, bleu_sentence};
pub use meteor::{meteor, meteor_alignment, MeteorAlignment, EXHAUSTIVE_ALIGNMENT_LIMIT};
pub use report::{
    compare_reports, evaluate, evaluate_tokens, ComparisonRow, ComparisonTable, CorpusScores,
    MeteorParams, MetricConfig, MetricReport, PairScores, REPORT_VERSION,
};
pub use rouge::{lcs_length, rouge_l, rouge_n};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("candidate count {candidates} does not match reference count {references}")]
    LengthMismatch {
        candidates: usize,
        references: usize,
    },
    #[error("a candidate has no references")]
    MissingReference,
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("incompatible report: {0}")]
    Schema(String),
}

/// A sequence of lowercase tokens, none empty or containing whitespace.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Builds a sequence from pre-split words, lowercasing them and splitting
    /// any that contain whitespace so the invariant holds.
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        TokenSeq(
            words
                .into_iter()
                .flat_map(|w| {
                    w.as_ref()
                        .to_lowercase()
                        .split_whitespace()
                        .map(str::to_string)
                        .collect::<Vec<_>>()
                })
                .collect(),
        )
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSeq::new(iter)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '\'' || c == '\u{2019}'
}

/// Lowercases, removes `<start>`/`<end>` markers, then emits maximal runs of
/// letters, digits and apostrophes as tokens. Any other non-whitespace
/// character becomes a one-character token.
pub fn tokenize(text: &str) -> TokenSeq {
    let lowered = text
        .to_lowercase()
        .replace(crate::punctuation::DEFAULT_START_MARKER, " ")
        .replace(crate::punctuation::DEFAULT_END_MARKER, " ");
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in lowered.chars() {
        if is_word_char(c) {
            word.push(c);
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() {
            tokens.push(c.to_string());
        }
    }
    if !word.is_empty() {
        tokens.push(word);
    }
    TokenSeq(tokens)
}

pub type NgramCounts<'a> = HashMap<&'a [String], usize>;

/// All contiguous `n`-grams with multiplicity. Panics if `n == 0`.
pub fn ngram_counts(tokens: &TokenSeq, n: usize) -> NgramCounts<'_> {
    assert!(n >= 1, "n-gram order must be at least 1");
    let mut counts = HashMap::new();
    for gram in tokens.0.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Size of the multiset intersection of two n-gram count tables.
pub(crate) fn clipped_overlap(a: &NgramCounts<'_>, b: &NgramCounts<'_>) -> usize {
    a.iter()
        .map(|(gram, &count)| count.min(b.get(gram).copied().unwrap_or(0)))
        .sum()
}

pub(crate) fn ngram_total(len: usize, n: usize) -> usize {
    (len + 1).saturating_sub(n)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    /// P = overlap / candidate_total, R = overlap / reference_total; 0 on empty denominators.
    pub(crate) fn from_counts(
        overlap: usize,
        candidate_total: usize,
        reference_total: usize,
    ) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        Prf::new(
            ratio(overlap, candidate_total),
            ratio(overlap, reference_total),
        )
    }
}
