//! Test support: brute-force metric oracles, bundled fixtures and seeded
//! synthetic transcripts.
//!
//! The oracles here deliberately share no code with the metric
//! implementations: n-grams are enumerated with linear scans, LCS by trying
//! every subsequence, and METEOR alignments by enumerating every matching.

pub mod conformance;
pub mod http;
pub mod oracle;
pub mod synthetic;

/// (candidate, reference) commentary pairs, every side at most 8 tokens.
pub fn metric_fixture() -> Vec<(String, String)> {
    let raw = include_str!("../fixtures/metric_pairs.json");
    let pairs: Vec<(String, String)> = serde_json::from_str(raw).expect("fixture is valid JSON");
    pairs
}

/// Whitespace/punctuation tokenization written independently of the crate's tokenizer.
pub fn oracle_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let lowered = text
        .to_lowercase()
        .replace("<start>", " ")
        .replace("<end>", " ");
    let mut current = String::new();
    for c in lowered.chars() {
        if c.is_alphanumeric() || c == '\'' || c == '\u{2019}' {
            current.push(c);
        } else {
            if !current.is_empty() {
                out.push(current.clone());
                current.clear();
            }
            if !c.is_whitespace() {
                out.push(c.to_string());
            }
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}
