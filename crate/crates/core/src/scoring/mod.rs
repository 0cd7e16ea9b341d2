//! Top-k query evaluation in two modes: learned-impact summation and BM25.
//!
//! The exhaustive evaluator accumulates every matching posting and is the
//! ground truth; the pruned evaluator (see [`pruned`]) must return exactly
//! the same lists. Scores in impact mode are integer sums `sum_t q_t *
//! impact(t, d)`; BM25 scores are real. Ties are always broken by ascending
//! external docid so results are reproducible across runs, thread counts,
//! and implementations.

mod pruned;

use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;
use std::ops::Add;

use num_traits::Zero;
use rayon::prelude::*;

use crate::corpus::parse_weighted_record;
use crate::error::{Error, Result};
use crate::index::{DocOrdinal, IndexMode, InvertedIndex};
use crate::scalar::{from_f64, from_u64, Scalar};

/// A query as a sparse integer-weight vector. Unit mode gives every distinct
/// term weight 1 (the sum-of-matched-impacts scoring rule); file mode carries
/// weights quantized with the index's own scale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryVector {
    pub qid: String,
    pub weights: BTreeMap<String, u32>,
}

impl QueryVector {
    /// Unit weights over the distinct terms.
    pub fn unit(qid: &str, terms: &[String]) -> Self {
        QueryVector {
            qid: qid.to_owned(),
            weights: terms.iter().map(|t| (t.clone(), 1)).collect(),
        }
    }
}

/// One scored document in a ranked list. Scores are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc<F> {
    pub docid: String,
    pub score: F,
}

/// A per-query ranking: descending score, ties by ascending docid, no
/// duplicate docids.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList<F> {
    pub qid: String,
    pub entries: Vec<ScoredDoc<F>>,
}

impl<F: Scalar> RankedList<F> {
    pub fn new(qid: impl Into<String>) -> Self {
        RankedList {
            qid: qid.into(),
            entries: Vec::new(),
        }
    }

    /// Sorts entries into the canonical order (score descending, docid
    /// ascending) and truncates to `limit`.
    pub fn from_unsorted(
        qid: impl Into<String>,
        mut entries: Vec<ScoredDoc<F>>,
        limit: usize,
    ) -> Self {
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("ranked-list scores are finite")
                .then_with(|| a.docid.cmp(&b.docid))
        });
        entries.truncate(limit);
        RankedList {
            qid: qid.into(),
            entries,
        }
    }

    /// A copy holding at most the first `depth` entries.
    pub fn truncated(&self, depth: usize) -> Self {
        RankedList {
            qid: self.qid.clone(),
            entries: self.entries.iter().take(depth).cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A set of ranked lists keyed by qid.
#[derive(Debug, Clone, PartialEq)]
pub struct Run<F> {
    lists: BTreeMap<String, RankedList<F>>,
}

impl<F: Scalar> Run<F> {
    pub fn new() -> Self {
        Run {
            lists: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, list: RankedList<F>) -> Result<()> {
        if self.lists.contains_key(&list.qid) {
            return Err(Error::DuplicateQueryId {
                qid: list.qid.clone(),
            });
        }
        self.lists.insert(list.qid.clone(), list);
        Ok(())
    }

    pub fn get(&self, qid: &str) -> Option<&RankedList<F>> {
        self.lists.get(qid)
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.lists.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RankedList<F>> {
        self.lists.values()
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }
}

impl<F: Scalar> Default for Run<F> {
    fn default() -> Self {
        Self::new()
    }
}

/// BM25 parameters. The defaults k1 = 0.9, b = 0.4 are the usual choices for
/// passage-length corpora.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params<F> {
    pub k1: F,
    pub b: F,
}

impl<F: Scalar> Default for Bm25Params<F> {
    fn default() -> Self {
        Bm25Params {
            k1: from_f64(0.9),
            b: from_f64(0.4),
        }
    }
}

impl<F: Scalar> Bm25Params<F> {
    pub fn new(k1: F, b: F) -> Result<Self> {
        let params = Bm25Params { k1, b };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let ok = self.k1 >= F::zero()
            && self.k1.is_finite()
            && self.b >= F::zero()
            && self.b <= F::one();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBm25Params)
        }
    }
}

/// A query in whichever shape the index mode expects.
#[derive(Debug, Clone, PartialEq)]
pub enum Query {
    /// Integer-weighted vector for an impact index.
    Weighted(QueryVector),
    /// Bag of analyzed terms for a frequency index. Repeated terms contribute
    /// once per occurrence.
    Terms { qid: String, terms: Vec<String> },
}

impl Query {
    pub fn qid(&self) -> &str {
        match self {
            Query::Weighted(qv) => &qv.qid,
            Query::Terms { qid, .. } => qid,
        }
    }
}

/// Decoded postings of one query term, with contributions already multiplied
/// by the query-side weight, in canonical (sorted-term) order across lists.
pub(crate) struct TermPostings<S> {
    pub postings: Vec<(DocOrdinal, S)>,
    pub max_contribution: S,
}

/// Read-only query evaluator over an immutable index.
pub struct Searcher<'a, F> {
    index: &'a InvertedIndex<F>,
    bm25: Bm25Params<F>,
}

impl<'a, F: Scalar> Searcher<'a, F> {
    pub fn new(index: &'a InvertedIndex<F>) -> Self {
        Searcher {
            index,
            bm25: Bm25Params::default(),
        }
    }

    pub fn with_bm25_params(index: &'a InvertedIndex<F>, params: Bm25Params<F>) -> Result<Self> {
        params.validate()?;
        Ok(Searcher {
            index,
            bm25: params,
        })
    }

    pub fn index(&self) -> &InvertedIndex<F> {
        self.index
    }

    /// Full impact score map: `score(d) = sum_t q_t * impact(t, d)` over the
    /// query terms. Documents that match nothing are omitted; query terms
    /// absent from the lexicon contribute nothing.
    pub fn impact_scores(&self, query: &QueryVector) -> Result<BTreeMap<String, u64>> {
        let lists = self.impact_lists(query)?;
        let acc = accumulate(&lists);
        Ok(acc
            .into_iter()
            .map(|(ord, s)| (self.index.docid(ord).to_owned(), s))
            .collect())
    }

    /// Full BM25 score map over analyzed query terms.
    pub fn bm25_scores(&self, terms: &[String]) -> Result<BTreeMap<String, F>> {
        let lists = self.bm25_lists(terms)?;
        let acc = accumulate(&lists);
        Ok(acc
            .into_iter()
            .map(|(ord, s)| (self.index.docid(ord).to_owned(), s))
            .collect())
    }

    /// Exhaustive top-k evaluation: the k highest-scoring documents under the
    /// active mode, fewer if fewer documents score above zero.
    pub fn search_topk(&self, query: &Query, k: usize) -> Result<RankedList<F>> {
        match query {
            Query::Weighted(qv) => {
                let lists = self.impact_lists(qv)?;
                let top = topk_from_accumulator(accumulate(&lists), self.index, k);
                Ok(self.ranked_list(&qv.qid, top, |s| from_u64::<F>(s)))
            }
            Query::Terms { qid, terms } => {
                let lists = self.bm25_lists(terms)?;
                let top = topk_from_accumulator(accumulate(&lists), self.index, k);
                Ok(self.ranked_list(qid, top, |s| s))
            }
        }
    }

    /// MaxScore-style dynamically pruned evaluation. Safe pruning only: the
    /// result is exactly [`Searcher::search_topk`]'s, list-equal.
    pub fn search_topk_pruned(&self, query: &Query, k: usize) -> Result<RankedList<F>> {
        match query {
            Query::Weighted(qv) => {
                let lists = self.impact_lists(qv)?;
                let top = pruned::topk_maxscore(lists, self.index, k);
                Ok(self.ranked_list(&qv.qid, top, |s| from_u64::<F>(s)))
            }
            Query::Terms { qid, terms } => {
                let lists = self.bm25_lists(terms)?;
                let top = pruned::topk_maxscore(lists, self.index, k);
                Ok(self.ranked_list(qid, top, |s| s))
            }
        }
    }

    fn ranked_list<S: Copy>(
        &self,
        qid: &str,
        top: Vec<(DocOrdinal, S)>,
        to_score: impl Fn(S) -> F,
    ) -> RankedList<F> {
        RankedList {
            qid: qid.to_owned(),
            entries: top
                .into_iter()
                .map(|(ord, s)| ScoredDoc {
                    docid: self.index.docid(ord).to_owned(),
                    score: to_score(s),
                })
                .collect(),
        }
    }

    fn impact_lists(&self, query: &QueryVector) -> Result<Vec<TermPostings<u64>>> {
        if !matches!(self.index.mode(), IndexMode::Impact { .. }) {
            return Err(Error::ModeMismatch { expected: "impact" });
        }
        let mut lists = Vec::new();
        for (term, &qw) in &query.weights {
            if qw == 0 {
                continue;
            }
            let Some(entry) = self.index.term_entry(term) else {
                continue;
            };
            let postings = self.index.postings(term)?.expect("term is in lexicon");
            lists.push(TermPostings {
                postings: postings
                    .iter()
                    .map(|p| (p.ordinal, u64::from(qw) * u64::from(p.impact)))
                    .collect(),
                max_contribution: u64::from(qw) * u64::from(entry.max_impact),
            });
        }
        Ok(lists)
    }

    fn bm25_lists(&self, terms: &[String]) -> Result<Vec<TermPostings<F>>> {
        if !matches!(self.index.mode(), IndexMode::Frequency) {
            return Err(Error::ModeMismatch {
                expected: "frequency",
            });
        }
        // empty corpus (or all-empty documents): nothing can match
        if self.index.total_doc_len() == 0 {
            return Ok(Vec::new());
        }
        let mut counts: BTreeMap<&str, u32> = BTreeMap::new();
        for t in terms {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }

        let n_docs = from_u64::<F>(self.index.num_docs() as u64);
        let avgdl = self.index.avgdl();
        let k1 = self.bm25.k1;
        let b = self.bm25.b;
        let one = F::one();
        let half = from_f64::<F>(0.5);

        let mut lists = Vec::new();
        for (term, count) in counts {
            let Some(entry) = self.index.term_entry(term) else {
                continue;
            };
            let postings = self.index.postings(term)?.expect("term is in lexicon");
            let df = from_u64::<F>(u64::from(entry.doc_count));
            let idf = (one + (n_docs - df + half) / (df + half)).ln();
            let count_f = from_u64::<F>(u64::from(count));

            let contributions: Vec<(DocOrdinal, F)> = postings
                .iter()
                .map(|p| {
                    let tf = from_u64::<F>(u64::from(p.impact));
                    let dl = from_u64::<F>(u64::from(self.index.doc_length(p.ordinal)));
                    let norm = k1 * (one - b + b * dl / avgdl);
                    let score = idf * (tf * (k1 + one)) / (tf + norm) * count_f;
                    (p.ordinal, score)
                })
                .collect();

            // Safe per-term bound: the contribution grows with tf and shrinks
            // with dl, so max_tf at dl = 0 dominates every posting. The tiny
            // inflation keeps the bound above float-rounded partial sums.
            let max_tf = from_u64::<F>(u64::from(entry.max_impact));
            let bound = idf * (max_tf * (k1 + one)) / (max_tf + k1 * (one - b)) * count_f;
            let bound = bound * from_f64::<F>(1.0 + 1e-12);

            lists.push(TermPostings {
                postings: contributions,
                max_contribution: bound,
            });
        }
        Ok(lists)
    }
}

/// Term-at-a-time accumulation over the given lists. Per document, additions
/// happen in list order; lists arrive in canonical (sorted-term) order, which
/// the pruned evaluator reproduces so float sums are bit-identical.
pub(crate) fn accumulate<S>(lists: &[TermPostings<S>]) -> HashMap<DocOrdinal, S>
where
    S: Copy + Zero + Add<Output = S>,
{
    let mut acc: HashMap<DocOrdinal, S> = HashMap::new();
    for list in lists {
        for &(ord, contribution) in &list.postings {
            acc.entry(ord)
                .and_modify(|s| *s = *s + contribution)
                .or_insert(contribution);
        }
    }
    acc
}

fn topk_from_accumulator<S, F: Scalar>(
    acc: HashMap<DocOrdinal, S>,
    index: &InvertedIndex<F>,
    k: usize,
) -> Vec<(DocOrdinal, S)>
where
    S: Copy + PartialOrd,
{
    let mut scored: Vec<(DocOrdinal, S)> = acc.into_iter().collect();
    scored.sort_unstable_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("scores are finite")
            .then_with(|| index.lex_rank(a.0).cmp(&index.lex_rank(b.0)))
    });
    scored.truncate(k);
    scored
}

/// Evaluates a batch of queries in parallel and collects a [`Run`]. Results
/// are deterministic regardless of thread count: each query is independent
/// and the run is keyed by qid.
pub fn run_queries<F: Scalar>(
    index: &InvertedIndex<F>,
    queries: &[Query],
    k: usize,
    pruned: bool,
    params: Bm25Params<F>,
) -> Result<Run<F>> {
    let searcher = Searcher::with_bm25_params(index, params)?;
    let lists: Vec<RankedList<F>> = queries
        .par_iter()
        .map(|q| {
            if pruned {
                searcher.search_topk_pruned(q, k)
            } else {
                searcher.search_topk(q, k)
            }
        })
        .collect::<Result<_>>()?;
    let mut run = Run::new();
    for list in lists {
        run.insert(list)?;
    }
    Ok(run)
}

/// Parses a TSV queries file: `qid<TAB>query text`. Duplicate qids are
/// rejected.
pub fn parse_queries_tsv<R: BufRead>(reader: R) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (qid, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected qid<TAB>query text"))?;
        if qid.is_empty() || qid.chars().any(char::is_whitespace) {
            return Err(Error::parse(lineno, format!("invalid qid {qid:?}")));
        }
        if !seen.insert(qid.to_owned()) {
            return Err(Error::parse(lineno, format!("duplicate query id {qid:?}")));
        }
        out.push((qid.to_owned(), text.to_owned()));
    }
    Ok(out)
}

/// Parses a weighted JSONL queries file: `{"id": qid, "vector": {term:
/// weight}}` per line, real-valued weights to be quantized against an index.
pub fn parse_weighted_queries<F: Scalar, R: BufRead>(
    reader: R,
) -> Result<Vec<(String, BTreeMap<String, F>)>> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (qid, weights) = parse_weighted_record::<F>(&line, lineno)?;
        if !seen.insert(qid.clone()) {
            return Err(Error::parse(lineno, format!("duplicate query id {qid:?}")));
        }
        out.push((qid, weights));
    }
    Ok(out)
}
