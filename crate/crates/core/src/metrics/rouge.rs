use super::{clipped_overlap, ngram_counts, ngram_total, Prf, TokenSeq};

/// ROUGE-N with clipped n-gram overlap.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> Prf {
    let overlap = clipped_overlap(&ngram_counts(candidate, n), &ngram_counts(reference, n));
    Prf::from_counts(
        overlap,
        ngram_total(candidate.len(), n),
        ngram_total(reference.len(), n),
    )
}

/// ROUGE-L: LCS length over candidate and reference lengths, F with beta = 1.
pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> Prf {
    let lcs = lcs_length(candidate.tokens(), reference.tokens());
    Prf::from_counts(lcs, candidate.len(), reference.len())
}

/// Longest common subsequence length, two-row DP in O(|a|·|b|) time.
pub fn lcs_length<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut curr = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            curr[j + 1] = if x == y {
                prev[j] + 1
            } else {
                prev[j + 1].max(curr[j])
            };
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}
