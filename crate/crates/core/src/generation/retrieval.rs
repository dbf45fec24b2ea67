use std::collections::BTreeMap;

use super::GenerationError;
use crate::dataset::CommentaryPair;
use crate::metrics::{tokenize, TokenSeq};

/// Similarities closer than this are ties and go to the lower index.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexEntry {
    pub context_tokens: TokenSeq,
    pub target: String,
    /// Position of the pair in the training list.
    pub pair_index: usize,
}

/// Immutable tf-idf index over training contexts.
///
/// Weights are raw term frequency times `idf(t) = ln(N / df(t))`, and each
/// entry vector is L2-normalized. An entry whose every term has zero idf
/// has a zero vector and never scores above zero.
#[derive(Debug, Clone)]
pub struct RetrievalIndex {
    entries: Vec<IndexEntry>,
    vocabulary: BTreeMap<String, usize>,
    idf: Vec<f64>,
    /// Sparse (term id, weight), sorted by term id.
    vectors: Vec<Vec<(usize, f64)>>,
}

pub fn build_index(train_pairs: &[CommentaryPair]) -> Result<RetrievalIndex, GenerationError> {
    if train_pairs.is_empty() {
        return Err(GenerationError::EmptyTrainingSet);
    }
    let entries: Vec<IndexEntry> = train_pairs
        .iter()
        .enumerate()
        .map(|(pair_index, pair)| IndexEntry {
            context_tokens: tokenize(&pair.context),
            target: pair.target.clone(),
            pair_index,
        })
        .collect();

    let mut vocabulary = BTreeMap::new();
    let mut document_frequency: Vec<usize> = Vec::new();
    let term_counts: Vec<BTreeMap<usize, usize>> = entries
        .iter()
        .map(|entry| {
            let mut counts = BTreeMap::new();
            for token in entry.context_tokens.tokens() {
                let next = vocabulary.len();
                let id = *vocabulary.entry(token.clone()).or_insert(next);
                if id == document_frequency.len() {
                    document_frequency.push(0);
                }
                *counts.entry(id).or_insert(0) += 1;
            }
            for &id in counts.keys() {
                document_frequency[id] += 1;
            }
            counts
        })
        .collect();

    let n = entries.len() as f64;
    let idf: Vec<f64> = document_frequency
        .iter()
        .map(|&df| (n / df as f64).ln())
        .collect();
    let vectors = term_counts
        .iter()
        .map(|counts| {
            normalized(
                counts
                    .iter()
                    .map(|(&id, &tf)| (id, tf as f64 * idf[id]))
                    .collect(),
            )
        })
        .collect();

    Ok(RetrievalIndex {
        entries,
        vocabulary,
        idf,
        vectors,
    })
}

fn normalized(mut weights: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    if norm > 0.0 {
        for (_, w) in &mut weights {
            *w /= norm;
        }
    }
    weights
}

fn dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut sum) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

impl RetrievalIndex {
    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn idf(&self, token: &str) -> Option<f64> {
        self.vocabulary.get(token).map(|&id| self.idf[id])
    }

    fn query_vector(&self, context: &str) -> Vec<(usize, f64)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for token in tokenize(context).tokens() {
            if let Some(&id) = self.vocabulary.get(token) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        normalized(
            counts
                .into_iter()
                .map(|(id, tf)| (id, tf as f64 * self.idf[id]))
                .collect(),
        )
    }

    /// Cosine similarity of the query against every entry, in entry order.
    pub fn similarities(&self, context: &str) -> Vec<f64> {
        let query = self.query_vector(context);
        self.vectors.iter().map(|v| dot(&query, v)).collect()
    }

    /// The entry with maximal cosine similarity; ties and the all-zero case
    /// resolve to the smallest pair index.
    pub fn nearest(&self, context: &str) -> &IndexEntry {
        let mut best = 0;
        let mut best_score = 0.0;
        for (i, score) in self.similarities(context).into_iter().enumerate() {
            if score > best_score + TIE_EPSILON {
                best = i;
                best_score = score;
            }
        }
        &self.entries[best]
    }

    pub fn retrieve_generate(&self, context: &str) -> String {
        self.nearest(context).target.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(context: &str, target: &str) -> CommentaryPair {
        CommentaryPair {
            video_id: "v".into(),
            pair_index: 0,
            context: context.into(),
            target: target.into(),
            strategy_name: "duo".into(),
        }
    }

    #[test]
    fn single_pair_has_zero_idf() {
        let index = build_index(&[pair("down the bear", "gg")]).unwrap();
        assert_eq!(index.len(), 1);
        assert_eq!(index.idf("bear"), Some(0.0));
        assert_eq!(index.retrieve_generate("anything"), "gg");
    }

    #[test]
    fn duplicates_kept() {
        let index = build_index(&[pair("a b", "x"), pair("a b", "y")]).unwrap();
        assert_eq!(index.entries()[0].pair_index, 0);
        assert_eq!(index.entries()[1].pair_index, 1);
        assert_eq!(index.retrieve_generate("a b"), "x");
    }

    #[test]
    fn empty_training_set() {
        assert_eq!(
            build_index(&[]).unwrap_err(),
            GenerationError::EmptyTrainingSet
        );
    }

    #[test]
    fn exact_context_retrieves_its_target() {
        let index = build_index(&[
            pair("faker goes in", "t0"),
            pair("baron is up", "t1"),
            pair("the nexus falls", "t2"),
        ])
        .unwrap();
        assert_eq!(index.retrieve_generate("<start> baron is up <end>"), "t1");
        assert_eq!(index.retrieve_generate("the nexus falls"), "t2");
        assert_eq!(index.retrieve_generate("completely unrelated words"), "t0");
        let sims = index.similarities("baron is up");
        assert!((sims[1] - 1.0).abs() < 1e-12);
    }
}
