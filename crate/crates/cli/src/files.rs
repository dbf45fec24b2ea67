//! File formats owned by the CLI and atomic artifact writes.

use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use caster_punct::dataset::{write_jsonl, Corpus};
use caster_punct::punctuation::CommentarySentence;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Writes `bytes` to a hidden sibling and renames it into place, so readers
/// never see a half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .ok_or_else(|| anyhow!("{} is not a file path", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses one JSON value per non-empty line; errors name the 1-based line.
pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> anyhow::Result<Vec<T>> {
    text.as_bytes()
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|(i, line)| {
            let line = line?;
            serde_json::from_str(&line).map_err(|e| anyhow!("line {}: {e}", i + 1))
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> Vec<u8> {
    let mut out = Vec::new();
    for record in records {
        serde_json::to_writer(&mut out, record).expect("record serialization is infallible");
        out.push(b'\n');
    }
    out
}

pub fn corpus_jsonl(corpus: &Corpus) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl(corpus, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// `pairs-train.jsonl` -> `pairs-train.manifest.json`.
pub fn manifest_path(pairs_path: &Path) -> PathBuf {
    pairs_path.with_extension("manifest.json")
}

pub fn write_corpus(path: &Path, corpus: &Corpus) -> anyhow::Result<()> {
    write_atomic(path, &corpus_jsonl(corpus))?;
    let manifest = serde_json::to_vec_pretty(&corpus.manifest_record())?;
    write_atomic(&manifest_path(path), &manifest)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceRecord {
    pub video_id: String,
    pub seq_index: usize,
    pub strategy: String,
    pub text: String,
    pub cue_span: (usize, usize),
    pub complete: bool,
}

impl SentenceRecord {
    pub fn new(sentence: &CommentarySentence, strategy: &str) -> Self {
        SentenceRecord {
            video_id: sentence.video_id.clone(),
            seq_index: sentence.seq_index,
            strategy: strategy.to_string(),
            text: sentence.text.clone(),
            cue_span: sentence.cue_span,
            complete: sentence.complete,
        }
    }

    pub fn into_sentence(self) -> CommentarySentence {
        CommentarySentence {
            video_id: self.video_id,
            seq_index: self.seq_index,
            text: self.text,
            cue_span: self.cue_span,
            complete: self.complete,
        }
    }
}

/// One generated commentary next to its pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputRecord {
    pub video_id: String,
    pub pair_index: usize,
    pub strategy: String,
    pub context: String,
    pub target: String,
    pub commentary: String,
}
