//! Sentence punctuation strategies.
//!
//! A strategy merges every `k` consecutive cues of a transcript into one
//! commentary sentence: `k = 1` keeps the platform's own segmentation
//! ("solo"), `k = 2` is "duo", `k = 3` is "tri". Groups are fixed-stride and
//! non-overlapping, and cue texts are joined with a single space.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::captions::Transcript;

pub const DEFAULT_START_MARKER: &str = "<start>";
pub const DEFAULT_END_MARKER: &str = "<end>";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PunctuationError {
    #[error("transcript has no cues")]
    EmptyTranscript,
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid marker `{0}`: markers must be non-empty and contain no whitespace")]
    InvalidMarker(String),
}

/// What to do with a trailing group shorter than the group size.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RemainderPolicy {
    #[default]
    Drop,
    Keep,
}

impl FromStr for RemainderPolicy {
    type Err = PunctuationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "drop" => Ok(RemainderPolicy::Drop),
            "keep" => Ok(RemainderPolicy::Keep),
            other => Err(PunctuationError::InvalidStrategy(format!(
                "unknown remainder policy `{other}` (expected drop or keep)"
            ))),
        }
    }
}

impl fmt::Display for RemainderPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemainderPolicy::Drop => "drop",
            RemainderPolicy::Keep => "keep",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Strategy {
    group_size: usize,
    pub remainder: RemainderPolicy,
}

impl Strategy {
    pub fn new(group_size: usize, remainder: RemainderPolicy) -> Result<Self, PunctuationError> {
        if group_size == 0 {
            return Err(PunctuationError::InvalidStrategy(
                "group size must be at least 1".into(),
            ));
        }
        Ok(Strategy {
            group_size,
            remainder,
        })
    }

    pub fn solo() -> Self {
        Strategy {
            group_size: 1,
            remainder: RemainderPolicy::Drop,
        }
    }

    pub fn duo() -> Self {
        Strategy {
            group_size: 2,
            remainder: RemainderPolicy::Drop,
        }
    }

    pub fn tri() -> Self {
        Strategy {
            group_size: 3,
            remainder: RemainderPolicy::Drop,
        }
    }

    pub fn with_remainder(self, remainder: RemainderPolicy) -> Self {
        Strategy { remainder, ..self }
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    /// `solo`, `duo`, `tri`, or `k<N>` for other group sizes.
    pub fn name(&self) -> String {
        match self.group_size {
            1 => "solo".to_string(),
            2 => "duo".to_string(),
            3 => "tri".to_string(),
            k => format!("k{k}"),
        }
    }
}

/// Accepts `solo`, `duo`, `tri`, `k=<N>` and the `k<N>` form produced by [`Strategy::name`].
/// The remainder policy defaults to drop.
impl FromStr for Strategy {
    type Err = PunctuationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let k = match s {
            "solo" => 1,
            "duo" => 2,
            "tri" => 3,
            other => {
                let digits = other
                    .strip_prefix("k=")
                    .or_else(|| other.strip_prefix('k'))
                    .ok_or_else(|| {
                        PunctuationError::InvalidStrategy(format!(
                            "`{other}` (expected solo, duo, tri or k=<N>)"
                        ))
                    })?;
                digits.parse::<usize>().map_err(|_| {
                    PunctuationError::InvalidStrategy(format!(
                        "`{other}`: group size is not a number"
                    ))
                })?
            }
        };
        Strategy::new(k, RemainderPolicy::Drop)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentarySentence {
    pub video_id: String,
    pub seq_index: usize,
    pub text: String,
    /// Inclusive range of cue indices merged into this sentence.
    pub cue_span: (usize, usize),
    /// False only for a kept trailing group shorter than the group size.
    pub complete: bool,
}

impl CommentarySentence {
    pub fn render_with_markers(
        &self,
        start_marker: &str,
        end_marker: &str,
    ) -> Result<String, PunctuationError> {
        render_with_markers(&self.text, start_marker, end_marker)
    }
}

pub fn punctuate(
    transcript: &Transcript,
    strategy: &Strategy,
) -> Result<Vec<CommentarySentence>, PunctuationError> {
    if transcript.cues.is_empty() {
        return Err(PunctuationError::EmptyTranscript);
    }
    let k = strategy.group_size;
    let sentences = transcript
        .cues
        .chunks(k)
        .filter(|group| group.len() == k || strategy.remainder == RemainderPolicy::Keep)
        .enumerate()
        .map(|(seq_index, group)| CommentarySentence {
            video_id: transcript.video_id.clone(),
            seq_index,
            text: group
                .iter()
                .map(|c| c.text.as_str())
                .collect::<Vec<_>>()
                .join(" "),
            cue_span: (group[0].index, group[group.len() - 1].index),
            complete: group.len() == k,
        })
        .collect();
    Ok(sentences)
}

fn check_marker(marker: &str) -> Result<(), PunctuationError> {
    if marker.is_empty() || marker.chars().any(char::is_whitespace) {
        return Err(PunctuationError::InvalidMarker(marker.to_string()));
    }
    Ok(())
}

/// Frames sentence text as `start_marker + " " + text + " " + end_marker`.
pub fn render_with_markers(
    text: &str,
    start_marker: &str,
    end_marker: &str,
) -> Result<String, PunctuationError> {
    check_marker(start_marker)?;
    check_marker(end_marker)?;
    Ok(format!("{start_marker} {text} {end_marker}"))
}

/// [`render_with_markers`] with the default `<start>` / `<end>` markers.
pub fn render_default(text: &str) -> String {
    format!("{DEFAULT_START_MARKER} {text} {DEFAULT_END_MARKER}")
}

/// Inverse of [`render_with_markers`]; `None` if the framing is absent.
pub fn strip_markers<'a>(
    rendered: &'a str,
    start_marker: &str,
    end_marker: &str,
) -> Option<&'a str> {
    rendered
        .strip_prefix(start_marker)?
        .strip_prefix(' ')?
        .strip_suffix(end_marker)?
        .strip_suffix(' ')
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::captions::CaptionCue;

    fn transcript(texts: &[&str]) -> Transcript {
        Transcript {
            video_id: "v".into(),
            cues: texts
                .iter()
                .enumerate()
                .map(|(i, t)| CaptionCue {
                    index: i,
                    start_ms: i as u64 * 1000,
                    end_ms: i as u64 * 1000 + 900,
                    text: t.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn duo_merge_from_commentary() {
        let t = transcript(&["their strengths of being able to burst", "down the bear"]);
        let s = punctuate(&t, &Strategy::duo()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(
            s[0].text,
            "their strengths of being able to burst down the bear"
        );
        assert_eq!(s[0].cue_span, (0, 1));
        assert!(s[0].complete);
    }

    #[test]
    fn solo_is_identity() {
        let texts = ["a b", "c", "d e f"];
        let s = punctuate(&transcript(&texts), &Strategy::solo()).unwrap();
        let got: Vec<_> = s.iter().map(|x| x.text.as_str()).collect();
        assert_eq!(got, texts);
        assert!(s.iter().all(|x| x.complete));
    }

    #[test]
    fn remainder_policies() {
        let t = transcript(&["1", "2", "3", "4", "5", "6", "7"]);
        let dropped = punctuate(&t, &Strategy::tri()).unwrap();
        assert_eq!(dropped.len(), 2);
        let kept = punctuate(&t, &Strategy::tri().with_remainder(RemainderPolicy::Keep)).unwrap();
        assert_eq!(kept.len(), 3);
        assert_eq!(kept[2].cue_span, (6, 6));
        assert!(!kept[2].complete);
        assert_eq!(kept[2].seq_index, 2);
    }

    #[test]
    fn empty_transcript() {
        let t = transcript(&[]);
        assert_eq!(
            punctuate(&t, &Strategy::solo()),
            Err(PunctuationError::EmptyTranscript)
        );
    }

    #[test]
    fn markers() {
        assert_eq!(
            render_default("down the bear test"),
            "<start> down the bear test <end>"
        );
        assert_eq!(render_with_markers("x", "[s]", "[e]").unwrap(), "[s] x [e]");
        assert_eq!(
            render_with_markers("x", "", "<end>"),
            Err(PunctuationError::InvalidMarker(String::new()))
        );
        assert!(render_with_markers("x", "<start>", "<e nd>").is_err());
        assert_eq!(
            strip_markers("<start> a b <end>", "<start>", "<end>"),
            Some("a b")
        );
        assert_eq!(strip_markers("a b", "<start>", "<end>"), None);
    }

    #[test]
    fn strategy_names_and_parsing() {
        for (spec, k, name) in [
            ("solo", 1, "solo"),
            ("duo", 2, "duo"),
            ("tri", 3, "tri"),
            ("k=5", 5, "k5"),
            ("k7", 7, "k7"),
        ] {
            let s: Strategy = spec.parse().unwrap();
            assert_eq!(s.group_size(), k);
            assert_eq!(s.name(), name);
        }
        assert!("k=0".parse::<Strategy>().is_err());
        assert!("quad".parse::<Strategy>().is_err());
        assert!("k=x".parse::<Strategy>().is_err());
        assert!(Strategy::new(0, RemainderPolicy::Keep).is_err());
        assert_eq!("keep".parse::<RemainderPolicy>(), Ok(RemainderPolicy::Keep));
        assert!("maybe".parse::<RemainderPolicy>().is_err());
    }
}
