use super::{clipped_overlap, ngram_counts, ngram_total, MetricError, NgramCounts, TokenSeq};

/// Corpus BLEU over pooled clipped n-gram counts.
///
/// For each order `n` in `1..=max_n` the clipped matches and candidate n-gram
/// totals are summed over the whole corpus. An order whose pooled match count
/// is zero is smoothed to `(0 + 1) / (total + 1)`. The brevity penalty is
/// `min(1, exp(1 - r/c))` where `r` sums each candidate's closest reference
/// length (shorter wins ties) and `c` is the total candidate length.
pub fn bleu_corpus(
    candidates: &[TokenSeq],
    references: &[Vec<TokenSeq>],
    max_n: usize,
) -> Result<f64, MetricError> {
    if candidates.len() != references.len() {
        return Err(MetricError::LengthMismatch {
            candidates: candidates.len(),
            references: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(MetricError::EmptyEvaluation);
    }
    if references.iter().any(Vec::is_empty) {
        return Err(MetricError::MissingReference);
    }
    assert!(max_n >= 1, "BLEU needs at least unigrams");

    let mut matches = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let mut candidate_len = 0usize;
    let mut reference_len = 0usize;

    for (candidate, refs) in candidates.iter().zip(references) {
        candidate_len += candidate.len();
        reference_len += closest_reference_length(candidate.len(), refs);
        for n in 1..=max_n {
            let counts = ngram_counts(candidate, n);
            let clip = max_reference_counts(refs, n);
            matches[n - 1] += clipped_overlap(&counts, &clip);
            totals[n - 1] += ngram_total(candidate.len(), n);
        }
    }

    if candidate_len == 0 {
        return Ok(0.0);
    }

    let log_precision_sum: f64 = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| {
            if m == 0 {
                (1.0 / (t as f64 + 1.0)).ln()
            } else {
                (m as f64 / t as f64).ln()
            }
        })
        .sum();
    let brevity = if candidate_len >= reference_len {
        1.0
    } else {
        (1.0 - reference_len as f64 / candidate_len as f64).exp()
    };
    Ok(brevity * (log_precision_sum / max_n as f64).exp())
}

/// BLEU of one candidate against its references, with the corpus formula.
pub fn bleu_sentence(
    candidate: &TokenSeq,
    references: &[TokenSeq],
    max_n: usize,
) -> Result<f64, MetricError> {
    bleu_corpus(
        std::slice::from_ref(candidate),
        &[references.to_vec()],
        max_n,
    )
}

fn closest_reference_length(candidate_len: usize, refs: &[TokenSeq]) -> usize {
    refs.iter()
        .map(TokenSeq::len)
        .min_by_key(|&len| (len.abs_diff(candidate_len), len))
        .expect("references checked non-empty")
}

fn max_reference_counts(refs: &[TokenSeq], n: usize) -> NgramCounts<'_> {
    let mut clip = NgramCounts::new();
    for reference in refs {
        for (gram, count) in ngram_counts(reference, n) {
            let slot = clip.entry(gram).or_insert(0);
            *slot = (*slot).max(count);
        }
    }
    clip
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(words: &[&str]) -> TokenSeq {
        TokenSeq::new(words)
    }

    #[test]
    fn identical_corpus_scores_one() {
        let cands = vec![
            seq(&["the", "cat", "sat", "on", "the", "mat"]),
            seq(&["gg"]),
        ];
        let refs: Vec<_> = cands.iter().map(|c| vec![c.clone()]).collect();
        assert_eq!(bleu_corpus(&cands, &refs, 4).unwrap(), 1.0);
    }

    #[test]
    fn brevity_penalty_example() {
        let score = bleu_corpus(
            &[seq(&["the", "cat"])],
            &[vec![seq(&["the", "cat", "sat"])]],
            2,
        )
        .unwrap();
        assert!((score - (-0.5f64).exp()).abs() < 1e-12);
        assert!((score - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn smoothed_disjoint_is_positive() {
        let score = bleu_corpus(&[seq(&["x", "y"])], &[vec![seq(&["a", "b"])]], 4).unwrap();
        // p1 = 1/3, p2 = 1/2, p3 = p4 = 1/1
        let expected = ((1.0f64 / 3.0).ln() + 0.5f64.ln()) / 4.0;
        assert!(score > 0.0);
        assert!((score - expected.exp()).abs() < 1e-12);
    }

    #[test]
    fn closest_reference_prefers_shorter_on_tie() {
        let refs = [seq(&["a", "b"]), seq(&["a", "b", "c", "d"])];
        assert_eq!(closest_reference_length(3, &refs), 2);
    }

    #[test]
    fn multi_reference_clipping() {
        let cand = seq(&["the", "the", "the"]);
        let refs = vec![vec![seq(&["the", "cat"]), seq(&["the", "the", "dog"])]];
        let score = bleu_corpus(std::slice::from_ref(&cand), &refs, 1).unwrap();
        assert!((score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn errors_and_empty() {
        assert_eq!(
            bleu_corpus(&[seq(&["a"])], &[], 4),
            Err(MetricError::LengthMismatch {
                candidates: 1,
                references: 0
            })
        );
        assert_eq!(
            bleu_corpus(&[seq(&["a"])], &[vec![]], 4),
            Err(MetricError::MissingReference)
        );
        assert_eq!(bleu_corpus(&[seq(&[])], &[vec![seq(&["a"])]], 4), Ok(0.0));
    }
}
