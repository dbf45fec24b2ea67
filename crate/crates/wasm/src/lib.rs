//! Browser bindings for the caption punctuation and metric code.
//!
//! Each export takes plain strings and numbers and returns a JSON string;
//! the `*_json` functions hold the logic so they can be tested natively.

use caster_punct::captions::{parse_captions, CaptionFormat};
use caster_punct::dataset::{build_corpus, corpus_stats, make_pairs, CorpusStats};
use caster_punct::metrics::{
    bleu_sentence, meteor, meteor_alignment, rouge_l, rouge_n, tokenize, Prf,
};
use caster_punct::punctuation::{punctuate, render_default, RemainderPolicy, Strategy};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_SWEEP_K: usize = 5;

#[derive(Debug, Serialize)]
pub struct SentenceView {
    pub text: String,
    pub rendered: String,
    pub first_cue: usize,
    pub last_cue: usize,
    pub complete: bool,
}

#[derive(Debug, Serialize)]
pub struct PairView {
    pub context: String,
    pub target: String,
}

#[derive(Debug, Serialize)]
pub struct PunctuationView {
    pub video_id: String,
    pub strategy: String,
    pub cue_count: usize,
    pub sentences: Vec<SentenceView>,
    pub pairs: Vec<PairView>,
}

#[derive(Debug, Serialize)]
pub struct ScoreView {
    pub candidate_tokens: Vec<String>,
    pub reference_tokens: Vec<String>,
    pub bleu: f64,
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    pub meteor: f64,
    /// Matched (candidate, reference) token positions.
    pub alignment: Vec<(usize, usize)>,
    pub chunks: usize,
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub strategy: String,
    pub sentences: usize,
    pub stats: CorpusStats,
}

fn parse(captions: &str, format: &str) -> Result<caster_punct::captions::Transcript, String> {
    let format = format.parse::<CaptionFormat>().map_err(|e| e.to_string())?;
    parse_captions(captions.as_bytes(), format, "demo").map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("view serialization is infallible")
}

pub fn punctuate_json(
    captions: &str,
    format: &str,
    k: usize,
    keep: bool,
) -> Result<String, String> {
    let transcript = parse(captions, format)?;
    let policy = if keep {
        RemainderPolicy::Keep
    } else {
        RemainderPolicy::Drop
    };
    let strategy = Strategy::new(k, policy).map_err(|e| e.to_string())?;
    let sentences = punctuate(&transcript, &strategy).map_err(|e| e.to_string())?;
    let pairs = make_pairs(&sentences, &strategy.name());
    Ok(to_json(&PunctuationView {
        video_id: transcript.video_id.clone(),
        strategy: strategy.name(),
        cue_count: transcript.cues.len(),
        sentences: sentences
            .iter()
            .map(|s| SentenceView {
                text: s.text.clone(),
                rendered: render_default(&s.text),
                first_cue: s.cue_span.0,
                last_cue: s.cue_span.1,
                complete: s.complete,
            })
            .collect(),
        pairs: pairs
            .into_iter()
            .map(|p| PairView {
                context: p.context,
                target: p.target,
            })
            .collect(),
    }))
}

pub fn score_json(candidate: &str, reference: &str) -> Result<String, String> {
    let c = tokenize(candidate);
    let r = tokenize(reference);
    let bleu = if c.is_empty() {
        0.0
    } else {
        bleu_sentence(&c, std::slice::from_ref(&r), 4).map_err(|e| e.to_string())?
    };
    let alignment = meteor_alignment(&c, &r);
    Ok(to_json(&ScoreView {
        candidate_tokens: c.tokens().to_vec(),
        reference_tokens: r.tokens().to_vec(),
        bleu,
        rouge1: rouge_n(&c, &r, 1),
        rouge2: rouge_n(&c, &r, 2),
        rouge_l: rouge_l(&c, &r),
        meteor: meteor(&c, &r),
        alignment: alignment.pairs,
        chunks: alignment.chunks,
    }))
}

pub fn sweep_json(captions: &str, format: &str) -> Result<String, String> {
    let transcript = parse(captions, format)?;
    let rows = (1..=MAX_SWEEP_K)
        .map(|k| {
            let strategy = Strategy::new(k, RemainderPolicy::Drop).map_err(|e| e.to_string())?;
            let sentences = punctuate(&transcript, &strategy)
                .map_err(|e| e.to_string())?
                .len();
            let corpus = build_corpus(std::slice::from_ref(&transcript), &strategy)
                .map_err(|e| e.to_string())?;
            Ok(SweepRow {
                strategy: strategy.name(),
                sentences,
                stats: corpus_stats(&corpus),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(to_json(&rows))
}

/// Sentences and pairs for grouping size `k`.
#[wasm_bindgen(js_name = punctuateCaptions)]
pub fn punctuate_captions(
    captions: &str,
    format: &str,
    k: usize,
    keep: bool,
) -> Result<String, JsValue> {
    punctuate_json(captions, format, k, keep).map_err(|e| JsValue::from_str(&e))
}

/// Metric breakdown for one candidate against one reference.
#[wasm_bindgen(js_name = scorePair)]
pub fn score_pair(candidate: &str, reference: &str) -> Result<String, JsValue> {
    score_json(candidate, reference).map_err(|e| JsValue::from_str(&e))
}

/// Sentence and pair statistics for k = 1..=5.
#[wasm_bindgen(js_name = strategySweep)]
pub fn strategy_sweep(captions: &str, format: &str) -> Result<String, JsValue> {
    sweep_json(captions, format).map_err(|e| JsValue::from_str(&e))
}
