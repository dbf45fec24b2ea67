//! Stage bodies shared by the single-stage subcommands and the pipeline.

use std::path::Path;

use anyhow::anyhow;
use caster_punct::captions::{parse_captions, Transcript};
use caster_punct::dataset::{make_pairs, read_jsonl, CommentaryPair, Corpus, DatasetError};
use caster_punct::fetch::fetch_captions;
use caster_punct::generation::{build_index, run_external};
use caster_punct::metrics::{evaluate, MetricReport};
use caster_punct::punctuation::{punctuate, Strategy};
use serde_json::Value;

use crate::config::{GeneratorSpec, InputSource, InputSpec};
use crate::failure::{Classify, CliResult, Failure, FailureClass};
use crate::files::{self, OutputRecord, SentenceRecord};

pub const FETCH_TIMEOUT_MS: u64 = 30_000;

pub fn ensure_exists(paths: &[&Path], stage: &'static str) -> CliResult<()> {
    for path in paths {
        if !path.exists() {
            return Err(Failure::new(
                FailureClass::Io,
                stage,
                anyhow!("no such file: {}", path.display()),
            ));
        }
    }
    Ok(())
}

pub fn load_captions(spec: &InputSpec, fetch_timeout_ms: u64) -> CliResult<Transcript> {
    let data = match &spec.source {
        InputSource::File(path) => std::fs::read(path)
            .map_err(|e| anyhow!("reading {}: {e}", path.display()))
            .class(FailureClass::Io, "ingest")?,
        InputSource::Url(url) => fetch_captions(url, fetch_timeout_ms)
            .map_err(|e| anyhow!("fetching {url}: {e}"))
            .class(FailureClass::Io, "ingest")?,
    };
    parse_captions(&data, spec.format, &spec.video_id)
        .map_err(|e| anyhow!("{}: {e}", spec.display()))
        .class(FailureClass::Parse, "ingest")
}

pub fn read_transcript(path: &Path) -> CliResult<Transcript> {
    let text = files::read_to_string(path).class(FailureClass::Io, "punctuate")?;
    Transcript::from_json(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .class(FailureClass::Parse, "punctuate")
}

pub fn sentence_records(
    transcripts: &[Transcript],
    strategy: &Strategy,
) -> CliResult<Vec<SentenceRecord>> {
    let name = strategy.name();
    let mut records = Vec::new();
    for t in transcripts {
        let sentences = punctuate(t, strategy)
            .map_err(|e| anyhow!("{}: {e}", t.video_id))
            .class(FailureClass::Parse, "punctuate")?;
        records.extend(sentences.iter().map(|s| SentenceRecord::new(s, &name)));
    }
    Ok(records)
}

/// Pairs sentences video by video, in the order videos first appear.
pub fn pairs_from_sentences(records: Vec<SentenceRecord>) -> CliResult<Corpus> {
    let strategy = records
        .first()
        .map(|r| r.strategy.clone())
        .unwrap_or_default();
    if let Some(bad) = records.iter().find(|r| r.strategy != strategy) {
        return Err(Failure::new(
            FailureClass::Parse,
            "pairs",
            anyhow!("mixed strategies `{strategy}` and `{}`", bad.strategy),
        ));
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_video: std::collections::HashMap<String, Vec<_>> = std::collections::HashMap::new();
    for record in records {
        if !by_video.contains_key(&record.video_id) {
            order.push(record.video_id.clone());
        }
        by_video
            .entry(record.video_id.clone())
            .or_default()
            .push(record.into_sentence());
    }
    let mut pairs: Vec<CommentaryPair> = Vec::new();
    for video in &order {
        let mut sentences = by_video.remove(video).unwrap_or_default();
        sentences.sort_by_key(|s| s.seq_index);
        pairs.extend(make_pairs(&sentences, &strategy));
    }
    Corpus::new(strategy, pairs).class(FailureClass::Parse, "pairs")
}

pub fn read_pairs(path: &Path, stage: &'static str) -> CliResult<Corpus> {
    let text = files::read_to_string(path).class(FailureClass::Io, stage)?;
    read_jsonl(text.as_bytes()).map_err(|e| match e {
        DatasetError::Io(e) => Failure::new(FailureClass::Io, stage, e),
        other => Failure::new(
            FailureClass::Parse,
            stage,
            anyhow!("{}: {other}", path.display()),
        ),
    })
}

pub struct Generated {
    pub records: Vec<OutputRecord>,
    pub adapter_info: Option<Value>,
}

fn output_record(pair: &CommentaryPair, commentary: String) -> OutputRecord {
    OutputRecord {
        video_id: pair.video_id.clone(),
        pair_index: pair.pair_index,
        strategy: pair.strategy_name.clone(),
        context: pair.context.clone(),
        target: pair.target.clone(),
        commentary,
    }
}

/// Produces one commentary per test pair. If an external adapter aborts, the
/// answered pairs are written to `partial_path` before the failure returns.
pub fn generate(
    train: &Corpus,
    test: &Corpus,
    spec: &GeneratorSpec,
    partial_path: &Path,
) -> CliResult<Generated> {
    match spec {
        GeneratorSpec::Retrieval => {
            let index = build_index(train.pairs()).class(FailureClass::Split, "generate")?;
            let records = test
                .pairs()
                .iter()
                .map(|p| output_record(p, index.retrieve_generate(&p.context)))
                .collect();
            Ok(Generated {
                records,
                adapter_info: None,
            })
        }
        GeneratorSpec::External(config) => {
            let contexts: Vec<String> = test.pairs().iter().map(|p| p.context.clone()).collect();
            match run_external(config, &contexts) {
                Ok(run) => Ok(Generated {
                    records: test
                        .pairs()
                        .iter()
                        .zip(run.outputs)
                        .map(|(p, c)| output_record(p, c))
                        .collect(),
                    adapter_info: run.adapter_info,
                }),
                Err(err) => {
                    let partial: Vec<OutputRecord> = test
                        .pairs()
                        .iter()
                        .zip(&err.partial)
                        .filter_map(|(p, c)| c.clone().map(|c| output_record(p, c)))
                        .collect();
                    log::warn!(
                        "writing {} partial result(s) to {}",
                        partial.len(),
                        partial_path.display()
                    );
                    files::write_atomic(partial_path, &files::to_jsonl(&partial))
                        .class(FailureClass::Io, "generate")?;
                    Err(Failure::new(FailureClass::Adapter, "generate", err))
                }
            }
        }
    }
}

pub fn evaluate_outputs(
    records: &[OutputRecord],
    label: Option<String>,
    generator: Option<String>,
    empty_class: FailureClass,
) -> CliResult<MetricReport> {
    let pairs: Vec<(&str, &str)> = records
        .iter()
        .map(|r| (r.commentary.as_str(), r.target.as_str()))
        .collect();
    let mut report = evaluate(&pairs).map_err(|e| Failure::new(empty_class, "eval", e))?;
    report.config.label = label;
    report.config.strategy = records.first().map(|r| r.strategy.clone());
    report.config.generator = generator;
    Ok(report)
}
