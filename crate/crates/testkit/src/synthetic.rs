//! Seeded synthetic caption data.

use caster_punct::captions::{CaptionCue, Transcript};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCABULARY: &[&str] = &[
    "faker",
    "goes",
    "in",
    "the",
    "baron",
    "dragon",
    "nexus",
    "tower",
    "is",
    "down",
    "they're",
    "gonna",
    "teleport",
    "flash",
    "ult",
    "mid",
    "lane",
    "jungler",
    "blue",
    "side",
    "red",
    "team",
    "fight",
    "what",
    "a",
    "play",
    "super",
    "minions",
    "base",
    "bear",
    "rocks",
    "pull",
    "up",
    "curtain",
    "call",
    "ace",
    "and",
    "just",
    "file",
    "straight",
    "towards",
    "those",
    "gets",
    "rooted",
    "burst",
    "strengths",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sentence<R: Rng>(rng: &mut R, min_words: usize, max_words: usize) -> String {
    let n = rng.gen_range(min_words..=max_words);
    (0..n)
        .map(|_| *VOCABULARY.choose(rng).expect("vocabulary non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// A transcript of `cue_count` cues, 1 to 8 words each, 1.5 s apart.
pub fn transcript<R: Rng>(rng: &mut R, video_id: &str, cue_count: usize) -> Transcript {
    let cues = (0..cue_count)
        .map(|index| CaptionCue {
            index,
            start_ms: index as u64 * 1500,
            end_ms: index as u64 * 1500 + 1400,
            text: sentence(rng, 1, 8),
        })
        .collect();
    Transcript {
        video_id: video_id.to_string(),
        cues,
    }
}

/// Renders a transcript as a WebVTT file.
pub fn to_webvtt(transcript: &Transcript) -> String {
    let mut out = String::from("WEBVTT\n\n");
    for cue in &transcript.cues {
        out.push_str(&format!(
            "{} --> {}\n{}\n\n",
            vtt_time(cue.start_ms),
            vtt_time(cue.end_ms),
            cue.text
        ));
    }
    out
}

fn vtt_time(ms: u64) -> String {
    format!(
        "{:02}:{:02}:{:02}.{:03}",
        ms / 3_600_000,
        ms / 60_000 % 60,
        ms / 1000 % 60,
        ms % 1000
    )
}
