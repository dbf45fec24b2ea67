//! Exhaustive reference computations for small inputs.

type Tokens = [String];

/// Every contiguous n-gram, in position order, with repeats.
pub fn enumerate_ngrams(tokens: &Tokens, n: usize) -> Vec<Vec<String>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start + n <= tokens.len() {
        out.push(tokens[start..start + n].to_vec());
        start += 1;
    }
    out
}

fn occurrences(grams: &[Vec<String>], gram: &[String]) -> usize {
    grams.iter().filter(|g| g.as_slice() == gram).count()
}

/// Clipped matches: each distinct candidate n-gram counts at most as often
/// as it occurs in the best reference.
pub fn clipped_matches(candidate: &Tokens, references: &[Vec<String>], n: usize) -> usize {
    let cand = enumerate_ngrams(candidate, n);
    let refs: Vec<Vec<Vec<String>>> = references.iter().map(|r| enumerate_ngrams(r, n)).collect();
    let mut seen: Vec<&Vec<String>> = Vec::new();
    let mut total = 0;
    for gram in &cand {
        if seen.contains(&gram) {
            continue;
        }
        seen.push(gram);
        let here = occurrences(&cand, gram);
        let cap = refs.iter().map(|r| occurrences(r, gram)).max().unwrap_or(0);
        total += here.min(cap);
    }
    total
}

pub fn bleu_corpus(
    candidates: &[Vec<String>],
    references: &[Vec<Vec<String>>],
    max_n: usize,
) -> f64 {
    let c: usize = candidates.iter().map(Vec::len).sum();
    if c == 0 {
        return 0.0;
    }
    let mut r = 0usize;
    for (cand, refs) in candidates.iter().zip(references) {
        let mut best: Option<usize> = None;
        for reference in refs {
            let len = reference.len();
            best = match best {
                None => Some(len),
                Some(b) => {
                    let (db, dl) = (b.abs_diff(cand.len()), len.abs_diff(cand.len()));
                    if dl < db || (dl == db && len < b) {
                        Some(len)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        r += best.unwrap();
    }
    let mut log_sum = 0.0;
    for n in 1..=max_n {
        let mut matches = 0usize;
        let mut total = 0usize;
        for (cand, refs) in candidates.iter().zip(references) {
            matches += clipped_matches(cand, refs, n);
            total += enumerate_ngrams(cand, n).len();
        }
        let p = if matches == 0 {
            1.0 / (total as f64 + 1.0)
        } else {
            matches as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp().min(1.0)
    };
    bp * (log_sum / max_n as f64).exp()
}

/// (precision, recall, f1)
pub fn prf(overlap: usize, candidate_total: usize, reference_total: usize) -> (f64, f64, f64) {
    let p = if candidate_total == 0 {
        0.0
    } else {
        overlap as f64 / candidate_total as f64
    };
    let r = if reference_total == 0 {
        0.0
    } else {
        overlap as f64 / reference_total as f64
    };
    let f = if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    };
    (p, r, f)
}

pub fn rouge_n(candidate: &Tokens, reference: &Tokens, n: usize) -> (f64, f64, f64) {
    let overlap = clipped_matches(candidate, &[reference.to_vec()], n);
    prf(
        overlap,
        enumerate_ngrams(candidate, n).len(),
        enumerate_ngrams(reference, n).len(),
    )
}

fn is_subsequence(needle: &[&String], haystack: &Tokens) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == *n))
}

/// LCS by trying every subsequence of the shorter side. Exponential; keep inputs small.
pub fn lcs_enumerate(a: &Tokens, b: &Tokens) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    assert!(short.len() <= 16, "exhaustive LCS limited to 16 tokens");
    let mut best = 0;
    for mask in 0u32..(1 << short.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let picked: Vec<&String> = (0..short.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| &short[i])
            .collect();
        if is_subsequence(&picked, long) {
            best = size;
        }
    }
    best
}

pub fn rouge_l(candidate: &Tokens, reference: &Tokens) -> (f64, f64, f64) {
    prf(
        lcs_enumerate(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

fn chunks_of(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort();
    let mut chunks = 0;
    for (k, &(i, j)) in sorted.iter().enumerate() {
        if k == 0 || !(sorted[k - 1].0 + 1 == i && sorted[k - 1].1 + 1 == j) {
            chunks += 1;
        }
    }
    chunks
}

/// Enumerates every one-to-one exact matching and returns
/// (maximum match count, fewest chunks among matchings of that size).
pub fn meteor_alignment(candidate: &Tokens, reference: &Tokens) -> (usize, usize) {
    fn walk(
        i: usize,
        candidate: &Tokens,
        reference: &Tokens,
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == candidate.len() {
            let m = current.len();
            let c = chunks_of(current);
            if m > best.0 || (m == best.0 && c < best.1) {
                *best = (m, c);
            }
            return;
        }
        walk(i + 1, candidate, reference, used, current, best);
        for j in 0..reference.len() {
            if !used[j] && reference[j] == candidate[i] {
                used[j] = true;
                current.push((i, j));
                walk(i + 1, candidate, reference, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0);
    walk(
        0,
        candidate,
        reference,
        &mut vec![false; reference.len()],
        &mut Vec::new(),
        &mut best,
    );
    best
}

pub fn meteor(candidate: &Tokens, reference: &Tokens) -> f64 {
    let (m, chunks) = meteor_alignment(candidate, reference);
    if m == 0 {
        return 0.0;
    }
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = p * r / (0.9 * p + 0.1 * r);
    let frag = chunks as f64 / m as f64;
    fmean * (1.0 - 0.5 * frag * frag * frag)
}

/// Cosine similarity of raw-tf times ln(N/df) vectors, computed densely.
pub fn tfidf_cosines(documents: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let mut vocab: Vec<String> = documents.iter().flatten().cloned().collect();
    vocab.sort();
    vocab.dedup();
    let n = documents.len() as f64;
    let idf: Vec<f64> = vocab
        .iter()
        .map(|t| {
            let df = documents.iter().filter(|d| d.contains(t)).count() as f64;
            (n / df).ln()
        })
        .collect();
    let vector = |doc: &[String]| -> Vec<f64> {
        vocab
            .iter()
            .zip(&idf)
            .map(|(t, w)| doc.iter().filter(|x| *x == t).count() as f64 * w)
            .collect()
    };
    let q = vector(query);
    let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    documents
        .iter()
        .map(|d| {
            let v = vector(d);
            let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if qn == 0.0 || vn == 0.0 {
                0.0
            } else {
                q.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (qn * vn)
            }
        })
        .collect()
}
