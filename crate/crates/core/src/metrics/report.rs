use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    bleu_corpus, bleu_sentence, meteor, rouge_l, rouge_n, tokenize, MetricError, Prf, TokenSeq,
};

pub const REPORT_VERSION: u32 = 1;
const BLEU_MAX_N: usize = 4;
const SCALE: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorParams {
    pub fmean: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub stages: Vec<String>,
}

/// Records every metric choice so reports computed under different
/// conventions can be told apart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub report_version: u32,
    pub tokenizer: String,
    pub bleu_max_n: usize,
    pub bleu_smoothing: String,
    pub bleu_aggregation: String,
    pub rouge_reported: String,
    pub meteor: MeteorParams,
    pub scale: f64,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub strategy: Option<String>,
    #[serde(default)]
    pub generator: Option<String>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            report_version: REPORT_VERSION,
            tokenizer: "lowercase; strip <start>/<end>; [letters digits apostrophes]+ | single non-space char".into(),
            bleu_max_n: BLEU_MAX_N,
            bleu_smoothing: "add-one on zero-match orders".into(),
            bleu_aggregation: "corpus (pooled counts)".into(),
            rouge_reported: "f1".into(),
            meteor: MeteorParams {
                fmean: "10PR/(R+9P)".into(),
                alpha: 0.9,
                beta: 3.0,
                gamma: 0.5,
                stages: vec!["exact".into()],
            },
            scale: SCALE,
            label: None,
            strategy: None,
            generator: None,
        }
    }
}

/// Corpus-level scores on the 0..100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusScores {
    pub bleu: f64,
    pub rouge1: f64,
    pub rouge2: f64,
    #[serde(rename = "rougeL")]
    pub rouge_l: f64,
    pub meteor: f64,
}

impl CorpusScores {
    pub fn values(&self) -> [f64; 5] {
        [
            self.bleu,
            self.rouge1,
            self.rouge2,
            self.rouge_l,
            self.meteor,
        ]
    }
}

/// Per-pair scores on the 0..1 scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub pair_index: usize,
    pub bleu_sentence: f64,
    pub rouge1: Prf,
    pub rouge2: Prf,
    #[serde(rename = "rougeL")]
    pub rouge_l: Prf,
    pub meteor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub config: MetricConfig,
    pub corpus: CorpusScores,
    pub per_pair: Vec<PairScores>,
}

impl MetricReport {
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    pub fn from_json(data: &str) -> Result<Self, MetricError> {
        let report: MetricReport =
            serde_json::from_str(data).map_err(|e| MetricError::Schema(e.to_string()))?;
        if report.config.report_version != REPORT_VERSION {
            return Err(MetricError::Schema(format!(
                "report version {} (expected {REPORT_VERSION})",
                report.config.report_version
            )));
        }
        Ok(report)
    }
}

/// Scores (candidate, reference) string pairs.
pub fn evaluate<C: AsRef<str>, R: AsRef<str>>(
    pairs: &[(C, R)],
) -> Result<MetricReport, MetricError> {
    let tokenized: Vec<(TokenSeq, TokenSeq)> = pairs
        .iter()
        .map(|(c, r)| (tokenize(c.as_ref()), tokenize(r.as_ref())))
        .collect();
    evaluate_tokens(&tokenized)
}

pub fn evaluate_tokens(pairs: &[(TokenSeq, TokenSeq)]) -> Result<MetricReport, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyEvaluation);
    }
    let per_pair: Vec<PairScores> = pairs
        .iter()
        .enumerate()
        .map(|(pair_index, (candidate, reference))| {
            Ok(PairScores {
                pair_index,
                bleu_sentence: bleu_sentence(
                    candidate,
                    std::slice::from_ref(reference),
                    BLEU_MAX_N,
                )?,
                rouge1: rouge_n(candidate, reference, 1),
                rouge2: rouge_n(candidate, reference, 2),
                rouge_l: rouge_l(candidate, reference),
                meteor: meteor(candidate, reference),
            })
        })
        .collect::<Result<_, MetricError>>()?;

    let candidates: Vec<TokenSeq> = pairs.iter().map(|(c, _)| c.clone()).collect();
    let references: Vec<Vec<TokenSeq>> = pairs.iter().map(|(_, r)| vec![r.clone()]).collect();
    let bleu = bleu_corpus(&candidates, &references, BLEU_MAX_N)?;

    let mean = |f: fn(&PairScores) -> f64| {
        per_pair.iter().map(f).sum::<f64>() / per_pair.len() as f64 * SCALE
    };
    let corpus = CorpusScores {
        bleu: bleu * SCALE,
        rouge1: mean(|p| p.rouge1.f1),
        rouge2: mean(|p| p.rouge2.f1),
        rouge_l: mean(|p| p.rouge_l.f1),
        meteor: mean(|p| p.meteor),
    };
    Ok(MetricReport {
        config: MetricConfig::default(),
        corpus,
        per_pair,
    })
}

pub const METRIC_COLUMNS: [&str; 5] = ["BLEU", "ROUGE-1", "ROUGE-2", "ROUGE-L", "METEOR"];

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    pub strategy: String,
    pub scores: CorpusScores,
    /// Per metric column: whether this row holds the highest value in its strategy group.
    pub best: [bool; 5],
}

/// One row per report, grouped by strategy in first-seen order.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
}

/// Builds the comparison table. Rows keep the order given within each
/// strategy group; every row tied for a group maximum is marked best.
pub fn compare_reports(reports: &[(String, MetricReport)]) -> Result<ComparisonTable, MetricError> {
    if reports.is_empty() {
        return Err(MetricError::EmptyEvaluation);
    }
    let mut groups: Vec<String> = Vec::new();
    let mut rows = Vec::with_capacity(reports.len());
    for (label, report) in reports {
        if report.config.report_version != REPORT_VERSION {
            return Err(MetricError::Schema(format!(
                "{label}: report version {} (expected {REPORT_VERSION})",
                report.config.report_version
            )));
        }
        let strategy = report
            .config
            .strategy
            .clone()
            .unwrap_or_else(|| "-".to_string());
        if !groups.contains(&strategy) {
            groups.push(strategy.clone());
        }
        rows.push(ComparisonRow {
            label: report.config.label.clone().unwrap_or_else(|| label.clone()),
            strategy,
            scores: report.corpus,
            best: [false; 5],
        });
    }
    rows.sort_by_key(|r| groups.iter().position(|g| *g == r.strategy));

    for group in &groups {
        for col in 0..5 {
            let max = rows
                .iter()
                .filter(|r| r.strategy == *group)
                .map(|r| r.scores.values()[col])
                .fold(f64::NEG_INFINITY, f64::max);
            for row in rows.iter_mut().filter(|r| r.strategy == *group) {
                row.best[col] = row.scores.values()[col] == max;
            }
        }
    }
    Ok(ComparisonTable { rows })
}

impl ComparisonTable {
    /// Fixed-width text table; group maxima carry a trailing `*`.
    pub fn render_text(&self) -> String {
        let label_width = self
            .rows
            .iter()
            .map(|r| r.label.len())
            .chain([
                "Model".len(),
                5 + self
                    .rows
                    .iter()
                    .map(|r| r.strategy.len())
                    .max()
                    .unwrap_or(0),
            ])
            .max()
            .unwrap_or(5);
        let mut out = String::new();
        let _ = write!(out, "{:<label_width$}", "Model");
        for col in METRIC_COLUMNS {
            let _ = write!(out, " | {col:>8}");
        }
        out.push('\n');
        let rule = "-".repeat(label_width + METRIC_COLUMNS.len() * 11);
        let mut current: Option<&str> = None;
        for row in &self.rows {
            if current != Some(row.strategy.as_str()) {
                let _ = writeln!(out, "{rule}");
                let _ = writeln!(out, "Case {}", row.strategy);
                current = Some(row.strategy.as_str());
            }
            let _ = write!(out, "{:<label_width$}", row.label);
            for (value, best) in row.scores.values().iter().zip(row.best) {
                let cell = format!("{value:.2}{}", if best { "*" } else { " " });
                let _ = write!(out, " | {cell:>8}");
            }
            out.push('\n');
        }
        out
    }

    pub fn render_csv(&self) -> String {
        let mut out = String::from("model,strategy,bleu,rouge1,rouge2,rougeL,meteor,best\n");
        for row in &self.rows {
            let best: Vec<&str> = METRIC_COLUMNS
                .iter()
                .zip(row.best)
                .filter(|(_, b)| *b)
                .map(|(c, _)| *c)
                .collect();
            let v = row.scores.values();
            let _ = writeln!(
                out,
                "{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{}",
                csv_field(&row.label),
                csv_field(&row.strategy),
                v[0],
                v[1],
                v[2],
                v[3],
                v[4],
                best.join(";")
            );
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_corpus() {
        let pairs = [
            ("the cat sat", "the cat sat"),
            ("down the bear", "down the bear"),
        ];
        let report = evaluate(&pairs).unwrap();
        assert_eq!(report.corpus.bleu, 100.0);
        assert_eq!(report.corpus.rouge1, 100.0);
        assert_eq!(report.corpus.rouge2, 100.0);
        assert_eq!(report.corpus.rouge_l, 100.0);
        assert!((report.corpus.meteor - (1.0 - 0.5 / 27.0) * 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_pair_matches_rouge_example() {
        let report = evaluate(&[("the cat sat", "the cat")]).unwrap();
        let p = &report.per_pair[0];
        assert_eq!(p.rouge1.recall, 1.0);
        assert!((p.rouge1.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((report.corpus.rouge1 - 80.0).abs() < 1e-9);
    }

    #[test]
    fn empty_evaluation() {
        let none: [(&str, &str); 0] = [];
        assert_eq!(evaluate(&none), Err(MetricError::EmptyEvaluation));
    }

    #[test]
    fn json_key_order_and_determinism() {
        let report = evaluate(&[("a b c", "a c b")]).unwrap();
        let json = report.to_json_pretty();
        assert_eq!(
            json,
            evaluate(&[("a b c", "a c b")]).unwrap().to_json_pretty()
        );
        let config = json.find("\"config\"").unwrap();
        let corpus = json.find("\"corpus\"").unwrap();
        let per_pair = json.find("\"per_pair\"").unwrap();
        assert!(config < corpus && corpus < per_pair);
        let keys = [
            "\"bleu\"",
            "\"rouge1\"",
            "\"rouge2\"",
            "\"rougeL\"",
            "\"meteor\"",
        ];
        let pos: Vec<usize> = keys
            .iter()
            .map(|k| corpus + json[corpus..].find(k).unwrap())
            .collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(MetricReport::from_json(&json).unwrap(), report);
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut report = evaluate(&[("a", "a")]).unwrap();
        report.config.report_version = 99;
        assert!(matches!(
            MetricReport::from_json(&report.to_json_pretty()),
            Err(MetricError::Schema(_))
        ));
        assert!(matches!(
            compare_reports(&[("x".into(), report)]),
            Err(MetricError::Schema(_))
        ));
    }

    fn report_with(strategy: &str, values: [f64; 5]) -> MetricReport {
        let mut r = evaluate(&[("a", "a")]).unwrap();
        r.config.strategy = Some(strategy.into());
        r.corpus = CorpusScores {
            bleu: values[0],
            rouge1: values[1],
            rouge2: values[2],
            rouge_l: values[3],
            meteor: values[4],
        };
        r
    }

    #[test]
    fn comparison_groups_and_marks() {
        let reports = vec![
            (
                "solo-a".to_string(),
                report_with("solo", [2.88, 0.17, 0.01, 0.17, 6.44]),
            ),
            (
                "duo-a".to_string(),
                report_with("duo", [1.13, 0.82, 0.01, 0.82, 12.24]),
            ),
            (
                "solo-b".to_string(),
                report_with("solo", [2.97, 3.91, 0.48, 3.91, 22.76]),
            ),
            (
                "duo-b".to_string(),
                report_with("duo", [1.05, 16.60, 8.99, 16.52, 11.76]),
            ),
        ];
        let table = compare_reports(&reports).unwrap();
        let labels: Vec<_> = table.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["solo-a", "solo-b", "duo-a", "duo-b"]);
        assert_eq!(table.rows[1].best, [true; 5]);
        assert_eq!(table.rows[2].best, [true, false, false, false, true]);
        assert_eq!(table.rows[3].best, [false, true, true, true, false]);
        let text = table.render_text();
        assert!(text.contains("Case solo"));
        assert!(text.contains("16.60*"));
        let csv = table.render_csv();
        assert_eq!(csv.lines().count(), 5);
        assert!(
            csv.contains("duo-b,duo,1.0500,16.6000,8.9900,16.5200,11.7600,ROUGE-1;ROUGE-2;ROUGE-L")
        );
    }

    #[test]
    fn ties_mark_every_maximum() {
        let reports = vec![
            ("a".to_string(), report_with("duo", [1.0; 5])),
            ("b".to_string(), report_with("duo", [1.0; 5])),
        ];
        let table = compare_reports(&reports).unwrap();
        assert!(table.rows.iter().all(|r| r.best == [true; 5]));
    }
}
