//! Safe dynamic pruning for top-k evaluation, MaxScore style.
//!
//! Lists are split into an essential set (which alone can produce new top-k
//! entries) and a non-essential prefix of the smallest per-term upper bounds.
//! Candidates are generated by a docid-ordered merge of the essential lists;
//! non-essential lists are consulted lazily per candidate with an early
//! abandon once the remaining upper bound cannot reach the current kth
//! entry. All comparisons against the threshold are strict: a candidate that
//! can only tie the kth score must still be scored because the docid
//! tie-break may admit it. Candidate scores are accumulated in the same
//! canonical list order as the exhaustive evaluator, so results are equal
//! bit for bit, not merely up to reordering error.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::Add;

use num_traits::Zero;

use crate::index::{DocOrdinal, InvertedIndex};
use crate::scalar::Scalar;

use super::TermPostings;

/// Heap entry ordered so the weakest kept result is at the top of the
/// max-heap: lower score is "greater", ties resolved by higher docid rank.
struct Weakest<S> {
    score: S,
    rank: u32,
    ordinal: DocOrdinal,
}

impl<S: PartialOrd> Weakest<S> {
    fn cmp_weakness(&self, other: &Self) -> Ordering {
        other
            .score
            .partial_cmp(&self.score)
            .expect("scores are finite")
            .then_with(|| self.rank.cmp(&other.rank))
    }
}

impl<S: PartialOrd> PartialEq for Weakest<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_weakness(other) == Ordering::Equal
    }
}

impl<S: PartialOrd> Eq for Weakest<S> {}

impl<S: PartialOrd> PartialOrd for Weakest<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: PartialOrd> Ord for Weakest<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_weakness(other)
    }
}

fn next_geq<S>(postings: &[(DocOrdinal, S)], from: usize, target: DocOrdinal) -> usize {
    from + postings[from..].partition_point(|&(d, _)| d < target)
}

/// Top-k with MaxScore pruning. Lists must be in canonical (sorted-term)
/// order with per-term upper bounds that dominate every contribution.
/// Returns `(ordinal, score)` pairs sorted by descending score, ties by
/// ascending docid rank; exactly what the exhaustive evaluator returns.
pub(crate) fn topk_maxscore<S, F: Scalar>(
    lists: Vec<TermPostings<S>>,
    index: &InvertedIndex<F>,
    k: usize,
) -> Vec<(DocOrdinal, S)>
where
    S: Copy + PartialOrd + Zero + Add<Output = S>,
{
    let n = lists.len();
    if k == 0 || n == 0 {
        return Vec::new();
    }

    // suffix_ub[i] = sum of upper bounds of lists i..n in canonical order
    let mut suffix_ub = vec![S::zero(); n + 1];
    for i in (0..n).rev() {
        suffix_ub[i] = lists[i].max_contribution + suffix_ub[i + 1];
    }

    // selection order for the non-essential set: cheapest bounds first
    let mut by_ub: Vec<usize> = (0..n).collect();
    by_ub.sort_by(|&a, &b| {
        lists[a]
            .max_contribution
            .partial_cmp(&lists[b].max_contribution)
            .expect("bounds are finite")
            .then_with(|| a.cmp(&b))
    });
    let mut cum_sel = vec![S::zero(); n];
    {
        let mut acc = S::zero();
        for (j, &i) in by_ub.iter().enumerate() {
            acc = acc + lists[i].max_contribution;
            cum_sel[j] = acc;
        }
    }

    let mut cursors = vec![0usize; n];
    let mut essential = vec![true; n];
    let mut num_non_essential = 0usize;
    let mut heap: BinaryHeap<Weakest<S>> = BinaryHeap::with_capacity(k + 1);
    let mut ess_contrib: Vec<Option<S>> = (0..n).map(|_| None).collect();
    let mut matched: Vec<usize> = Vec::with_capacity(n);

    loop {
        // next candidate: smallest current ordinal over live essential lists
        let mut candidate: Option<DocOrdinal> = None;
        for i in 0..n {
            if essential[i] && cursors[i] < lists[i].postings.len() {
                let d = lists[i].postings[cursors[i]].0;
                candidate = Some(candidate.map_or(d, |c| c.min(d)));
            }
        }
        let Some(doc) = candidate else { break };
        let rank = index.lex_rank(doc);

        // consume the candidate from every essential list first, so an
        // abandoned candidate is never proposed again
        matched.clear();
        for i in 0..n {
            if essential[i]
                && cursors[i] < lists[i].postings.len()
                && lists[i].postings[cursors[i]].0 == doc
            {
                ess_contrib[i] = Some(lists[i].postings[cursors[i]].1);
                cursors[i] += 1;
                matched.push(i);
            }
        }

        // score in canonical list order, abandoning when the remaining
        // bound cannot reach the current kth entry
        let mut score = S::zero();
        let mut abandoned = false;
        for (i, list) in lists.iter().enumerate() {
            if essential[i] {
                if let Some(c) = ess_contrib[i] {
                    score = score + c;
                }
                continue;
            }
            if heap.len() == k {
                let worst = heap.peek().expect("heap is full");
                if score + suffix_ub[i] < worst.score {
                    abandoned = true;
                    break;
                }
            }
            let pos = next_geq(&list.postings, cursors[i], doc);
            cursors[i] = pos;
            if pos < list.postings.len() && list.postings[pos].0 == doc {
                score = score + list.postings[pos].1;
                cursors[i] = pos + 1;
            }
        }
        for &i in &matched {
            ess_contrib[i] = None;
        }
        if abandoned {
            continue;
        }

        if heap.len() < k {
            heap.push(Weakest {
                score,
                rank,
                ordinal: doc,
            });
        } else {
            let worst = heap.peek().expect("heap is full");
            if score > worst.score || (score == worst.score && rank < worst.rank) {
                heap.pop();
                heap.push(Weakest {
                    score,
                    rank,
                    ordinal: doc,
                });
            }
        }

        if heap.len() == k {
            let worst_score = heap.peek().expect("heap is full").score;
            while num_non_essential < n && cum_sel[num_non_essential] < worst_score {
                essential[by_ub[num_non_essential]] = false;
                num_non_essential += 1;
            }
            if num_non_essential == n {
                // even a document matching every term scores below the kth
                break;
            }
        }
    }

    let mut out = heap.into_vec();
    out.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("scores are finite")
            .then_with(|| a.rank.cmp(&b.rank))
    });
    out.into_iter().map(|w| (w.ordinal, w.score)).collect()
}
