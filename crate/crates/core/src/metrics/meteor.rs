use std::collections::HashMap;

use super::TokenSeq;

/// Alignments with at most this many matches are searched exhaustively;
/// larger ones use the greedy left-to-right aligner.
pub const EXHAUSTIVE_ALIGNMENT_LIMIT: usize = 10;

const FRAGMENTATION_GAMMA: f64 = 0.5;
const FRAGMENTATION_BETA: i32 = 3;

/// An exact-match unigram alignment between candidate and reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeteorAlignment {
    /// (candidate position, reference position), ascending by candidate position.
    pub pairs: Vec<(usize, usize)>,
    pub chunks: usize,
}

impl MeteorAlignment {
    pub fn matches(&self) -> usize {
        self.pairs.len()
    }
}

/// Number of maximal runs contiguous in both sequences.
pub(crate) fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    if pairs.is_empty() {
        return 0;
    }
    1 + pairs
        .windows(2)
        .filter(|w| !(w[1].0 == w[0].0 + 1 && w[1].1 == w[0].1 + 1))
        .count()
}

/// Exact-match METEOR: `Fmean = 10PR / (R + 9P)`, penalty `0.5 * (chunks / m)^3`.
pub fn meteor(candidate: &TokenSeq, reference: &TokenSeq) -> f64 {
    let alignment = meteor_alignment(candidate, reference);
    let m = alignment.matches();
    if m == 0 {
        return 0.0;
    }
    let precision = m as f64 / candidate.len() as f64;
    let recall = m as f64 / reference.len() as f64;
    let fmean = 10.0 * precision * recall / (recall + 9.0 * precision);
    let penalty =
        FRAGMENTATION_GAMMA * (alignment.chunks as f64 / m as f64).powi(FRAGMENTATION_BETA);
    fmean * (1.0 - penalty)
}

/// A maximum-cardinality exact-match alignment with the fewest chunks
/// (guaranteed minimal when it has at most [`EXHAUSTIVE_ALIGNMENT_LIMIT`] matches).
pub fn meteor_alignment(candidate: &TokenSeq, reference: &TokenSeq) -> MeteorAlignment {
    let problem = Problem::new(candidate.tokens(), reference.tokens());
    let greedy = problem.greedy();
    let pairs = if problem.total_matches <= EXHAUSTIVE_ALIGNMENT_LIMIT && problem.total_matches > 1
    {
        problem.exhaustive(greedy)
    } else {
        greedy
    };
    MeteorAlignment {
        chunks: count_chunks(&pairs),
        pairs,
    }
}

struct Problem {
    /// Type id per candidate position; `None` for tokens absent from the reference.
    candidate: Vec<Option<usize>>,
    reference: Vec<Option<usize>>,
    /// Reference positions of each type, ascending.
    positions: Vec<Vec<usize>>,
    /// Matches required per type: min of the two occurrence counts.
    needed: Vec<usize>,
    /// Occurrences of the same type at later candidate positions.
    later_same: Vec<usize>,
    total_matches: usize,
}

impl Problem {
    fn new(candidate: &[String], reference: &[String]) -> Self {
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for token in reference {
            let next = ids.len();
            ids.entry(token.as_str()).or_insert(next);
        }
        let reference_types: Vec<Option<usize>> = reference
            .iter()
            .map(|t| ids.get(t.as_str()).copied())
            .collect();
        let candidate_types: Vec<Option<usize>> = candidate
            .iter()
            .map(|t| ids.get(t.as_str()).copied())
            .collect();

        let mut positions = vec![Vec::new(); ids.len()];
        for (j, t) in reference_types.iter().enumerate() {
            positions[t.expect("reference tokens all have ids")].push(j);
        }
        let mut candidate_counts = vec![0usize; ids.len()];
        for t in candidate_types.iter().flatten() {
            candidate_counts[*t] += 1;
        }
        let needed: Vec<usize> = candidate_counts
            .iter()
            .zip(&positions)
            .map(|(&c, p)| c.min(p.len()))
            .collect();

        let mut seen = vec![0usize; ids.len()];
        let mut later_same = vec![0usize; candidate.len()];
        for (i, t) in candidate_types.iter().enumerate().rev() {
            if let Some(t) = t {
                later_same[i] = seen[*t];
                seen[*t] += 1;
            }
        }

        Problem {
            candidate: candidate_types,
            reference: reference_types,
            positions,
            total_matches: needed.iter().sum(),
            needed,
            later_same,
        }
    }

    /// Left to right; continue the previous chunk when possible, otherwise
    /// take the leftmost unused reference occurrence.
    fn greedy(&self) -> Vec<(usize, usize)> {
        let mut used = vec![false; self.reference.len()];
        let mut needed = self.needed.clone();
        let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(self.total_matches);
        for (i, t) in self.candidate.iter().enumerate() {
            let Some(t) = *t else { continue };
            if needed[t] == 0 {
                continue;
            }
            let continuation = pairs
                .last()
                .filter(|&&(ci, _)| ci + 1 == i)
                .map(|&(_, rj)| rj + 1)
                .filter(|&j| j < self.reference.len() && self.reference[j] == Some(t) && !used[j]);
            let j = continuation.or_else(|| self.positions[t].iter().copied().find(|&j| !used[j]));
            if let Some(j) = j {
                used[j] = true;
                needed[t] -= 1;
                pairs.push((i, j));
            }
        }
        pairs
    }

    fn exhaustive(&self, seed: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
        let links = seed.len() - count_chunks(&seed).min(seed.len());
        let mut search = Search {
            problem: self,
            used: vec![false; self.reference.len()],
            needed: self.needed.clone(),
            current: Vec::with_capacity(self.total_matches),
            best_links: links,
            best: seed,
        };
        search.descend(0, 0);
        search.best
    }
}

/// Branch and bound over candidate positions. Minimizing chunks among
/// alignments of fixed size `m` is maximizing links, where a link is a
/// match `(i, j)` directly following a match `(i - 1, j - 1)`.
struct Search<'a> {
    problem: &'a Problem,
    used: Vec<bool>,
    needed: Vec<usize>,
    current: Vec<(usize, usize)>,
    best_links: usize,
    best: Vec<(usize, usize)>,
}

impl Search<'_> {
    fn descend(&mut self, i: usize, links: usize) {
        let matched = self.current.len();
        let remaining = self.problem.total_matches - matched;
        if remaining == 0 {
            if links > self.best_links {
                self.best_links = links;
                self.best = self.current.clone();
            }
            return;
        }
        // every remaining match adds at most one link
        if links + remaining <= self.best_links || i >= self.problem.candidate.len() {
            return;
        }
        let Some(t) = self.problem.candidate[i] else {
            self.descend(i + 1, links);
            return;
        };

        if self.needed[t] > 0 {
            let follows = self
                .current
                .last()
                .filter(|&&(ci, _)| ci + 1 == i)
                .map(|&(_, rj)| rj + 1);
            let mut order: Vec<usize> = self.problem.positions[t]
                .iter()
                .copied()
                .filter(|&j| !self.used[j])
                .collect();
            if let Some(f) = follows {
                if let Some(k) = order.iter().position(|&j| j == f) {
                    order[..=k].rotate_right(1);
                }
            }
            for j in order {
                let link = usize::from(follows == Some(j));
                self.used[j] = true;
                self.needed[t] -= 1;
                self.current.push((i, j));
                self.descend(i + 1, links + link);
                self.current.pop();
                self.needed[t] += 1;
                self.used[j] = false;
            }
        }
        if self.problem.later_same[i] >= self.needed[t] {
            self.descend(i + 1, links);
        }
    }
}
