//! Caption-to-commentary corpus tooling and evaluation metrics.
//!
//! The pipeline runs in stages, each in its own module:
//!
//! - [`captions`]: parse WebVTT / SRT / YouTube JSON3 into transcripts
//! - [`punctuation`]: merge every `k` consecutive cues into one sentence
//! - [`dataset`]: adjacent sentences become (context, target) pairs, split by video
//! - [`generation`]: tf-idf retrieval baseline and the external adapter protocol
//! - [`metrics`]: BLEU, ROUGE-1/2/L and METEOR, aggregated into a report

pub mod captions;
pub mod dataset;
#[cfg(feature = "io")]
pub mod fetch;
pub mod generation;
pub mod metrics;
pub mod punctuation;

pub use captions::{parse_captions, CaptionCue, CaptionError, CaptionFormat, Transcript};
pub use dataset::{make_pairs, split_by_video, CommentaryPair, Corpus, SplitSpec};
#[cfg(feature = "io")]
pub use fetch::fetch_captions;
pub use metrics::{evaluate, tokenize, MetricReport, TokenSeq};
pub use punctuation::{
    punctuate, render_with_markers, CommentarySentence, RemainderPolicy, Strategy,
};
