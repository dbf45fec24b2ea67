//! The full experiment in one run.

use std::path::{Path, PathBuf};

use caster_punct::dataset::{build_corpus, corpus_stats, split_by_video, DatasetError};
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::failure::{Classify, CliResult, Failure, FailureClass};
use crate::files::{self, write_atomic};
use crate::stages::{self, FETCH_TIMEOUT_MS};

pub const TRANSCRIPTS_DIR: &str = "transcripts";
pub const TRAIN_PAIRS: &str = "pairs-train.jsonl";
pub const TEST_PAIRS: &str = "pairs-test.jsonl";
pub const OUTPUTS: &str = "outputs.jsonl";
pub const REPORT: &str = "report.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: Value,
    pub seed: u64,
    pub strategy: String,
    pub generator: Value,
    pub adapter: Option<Value>,
    pub counts: Counts,
    pub artifacts: Vec<ArtifactDigest>,
    /// Wall-clock time; the only field expected to differ between identical runs.
    pub created_at: String,
}

#[derive(Debug, Serialize)]
pub struct Counts {
    pub videos: usize,
    pub cues: usize,
    pub train_videos: usize,
    pub test_videos: usize,
    pub train_pairs: usize,
    pub test_pairs: usize,
}

#[derive(Debug, Serialize)]
pub struct ArtifactDigest {
    pub path: String,
    pub sha256: String,
}

pub struct PipelineRun {
    pub out: PathBuf,
    pub manifest: RunManifest,
}

pub fn run(config: &RunConfig) -> CliResult<PipelineRun> {
    let out = &config.out;
    let mut transcripts = Vec::with_capacity(config.inputs.len());
    for input in &config.inputs {
        log::info!("ingesting {input}");
        transcripts.push(stages::load_captions(input, FETCH_TIMEOUT_MS)?);
    }
    let mut written: Vec<(String, Vec<u8>)> = Vec::new();
    let mut emit = |relative: String, bytes: Vec<u8>, stage: &'static str| -> CliResult<()> {
        write_atomic(&out.join(&relative), &bytes).class(FailureClass::Io, stage)?;
        written.push((relative, bytes));
        Ok(())
    };
    for t in &transcripts {
        emit(
            format!("{TRANSCRIPTS_DIR}/{}.json", t.video_id),
            t.to_json().into_bytes(),
            "ingest",
        )?;
    }

    let corpus = build_corpus(&transcripts, &config.strategy).map_err(|e| match e {
        DatasetError::Punctuation(e) => Failure::new(FailureClass::Parse, "punctuate", e),
        other => Failure::new(FailureClass::Parse, "pairs", other),
    })?;
    let (train, test) =
        split_by_video(&corpus, &config.split).class(FailureClass::Split, "split")?;
    for (name, part) in [(TRAIN_PAIRS, &train), (TEST_PAIRS, &test)] {
        emit(name.to_string(), files::corpus_jsonl(part), "split")?;
        let manifest =
            serde_json::to_vec_pretty(&part.manifest_record()).expect("manifest serializes");
        let path = files::manifest_path(Path::new(name))
            .to_string_lossy()
            .into_owned();
        emit(path, manifest, "split")?;
    }
    if test.is_empty() {
        return Err(Failure::new(
            FailureClass::Split,
            "split",
            anyhow::anyhow!("the test split has no pairs to generate for"),
        ));
    }

    let generated = stages::generate(
        &train,
        &test,
        &config.generator,
        &out.join("outputs.partial.jsonl"),
    )?;
    emit(
        OUTPUTS.to_string(),
        files::to_jsonl(&generated.records),
        "generate",
    )?;

    let label = config
        .label
        .clone()
        .unwrap_or_else(|| format!("{}-{}", config.generator.kind(), config.strategy.name()));
    let report = stages::evaluate_outputs(
        &generated.records,
        Some(label),
        Some(config.generator.kind().to_string()),
        FailureClass::Split,
    )?;
    emit(
        REPORT.to_string(),
        report.to_json_pretty().into_bytes(),
        "eval",
    )?;

    let canonical = config.canonical_json();
    let train_stats = corpus_stats(&train);
    let test_stats = corpus_stats(&test);
    let manifest = RunManifest {
        tool: "caster-punct",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: files::sha256_hex(canonical.as_bytes()),
        config: serde_json::from_str(&canonical).expect("canonical config is JSON"),
        seed: config.split.seed,
        strategy: config.strategy.name(),
        generator: config.generator.record(),
        adapter: generated.adapter_info,
        counts: Counts {
            videos: transcripts.len(),
            cues: transcripts.iter().map(|t| t.cues.len()).sum(),
            train_videos: train_stats.video_count,
            test_videos: test_stats.video_count,
            train_pairs: train_stats.pair_count,
            test_pairs: test_stats.pair_count,
        },
        artifacts: written
            .iter()
            .map(|(path, bytes)| ArtifactDigest {
                path: path.clone(),
                sha256: files::sha256_hex(bytes),
            })
            .collect(),
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    write_atomic(&out.join(MANIFEST), &bytes).class(FailureClass::Io, "manifest")?;
    Ok(PipelineRun {
        out: out.clone(),
        manifest,
    })
}
