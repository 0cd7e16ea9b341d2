//! Shared generators and independent oracles for the randomized suites.
//!
//! Oracles reimplement the contracts from scratch (own quantization, own
//! linear scan, own sort) so they stay independent of the library paths they
//! check.

#![allow(dead_code)]

use std::collections::BTreeMap;

use impactd::corpus::WeightedDocument;
use impactd::scoring::{QueryVector, RankedList, Run, ScoredDoc};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vocab(size: usize) -> Vec<String> {
    (0..size).map(|i| format!("t{i}")).collect()
}

/// Random weighted corpus with unpadded docids ("d0", "d1", ..., "d10") so
/// lexicographic docid order differs from insertion order and the tie-break
/// logic gets exercised.
pub fn random_weighted_corpus(
    rng: &mut ChaCha8Rng,
    n_docs: usize,
    vocab: &[String],
    max_terms_per_doc: usize,
    max_weight: f64,
) -> Vec<WeightedDocument<f64>> {
    (0..n_docs)
        .map(|i| {
            let n_terms = rng.random_range(0..=max_terms_per_doc);
            let mut weights = BTreeMap::new();
            for _ in 0..n_terms {
                let term = vocab[rng.random_range(0..vocab.len())].clone();
                let w = rng.random_range(0.0..max_weight);
                weights.insert(term, w);
            }
            WeightedDocument {
                docid: format!("d{i}"),
                weights,
            }
        })
        .collect()
}

pub fn random_query_vector(
    rng: &mut ChaCha8Rng,
    qid: &str,
    vocab: &[String],
    max_terms: usize,
    max_qweight: u32,
) -> QueryVector {
    let n_terms = rng.random_range(1..=max_terms);
    let mut weights = BTreeMap::new();
    for _ in 0..n_terms {
        let term = vocab[rng.random_range(0..vocab.len())].clone();
        let w = rng.random_range(1..=max_qweight);
        weights.insert(term, w);
    }
    QueryVector {
        qid: qid.to_owned(),
        weights,
    }
}

/// Random raw documents as token sequences over the vocabulary.
pub fn random_raw_contents(rng: &mut ChaCha8Rng, vocab: &[String], max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn random_terms(rng: &mut ChaCha8Rng, vocab: &[String], max_terms: usize) -> Vec<String> {
    let n = rng.random_range(1..=max_terms);
    (0..n)
        .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
        .collect()
}

/// A random run whose scores survive 6-decimal TREC printing exactly: each
/// score is parsed from a freshly formatted 6-decimal string.
pub fn random_run(rng: &mut ChaCha8Rng, n_queries: usize, max_docs: usize) -> Run<f64> {
    let mut run = Run::new();
    for q in 0..n_queries {
        let n_docs = rng.random_range(1..=max_docs);
        let mut entries = Vec::new();
        for d in 0..n_docs {
            let int_part = rng.random_range(0..100);
            let frac_part = rng.random_range(0..1_000_000);
            let score: f64 = format!("{int_part}.{frac_part:06}").parse().unwrap();
            entries.push(ScoredDoc {
                docid: format!("d{d}"),
                score,
            });
        }
        run.insert(RankedList::from_unsorted(
            format!("q{q}"),
            entries,
            usize::MAX,
        ))
        .unwrap();
    }
    run
}

// ---------------------------------------------------------------------------
// independent oracles
// ---------------------------------------------------------------------------

/// Quantization reimplemented from the stated rule.
pub fn oracle_quantize(w: f64, max_weight: f64, bits: u32) -> u32 {
    let top = (1u32 << bits) - 1;
    let scaled = w / max_weight * f64::from(top);
    let rounded = (scaled + 0.5).floor();
    if rounded <= 0.0 {
        0
    } else if rounded >= f64::from(top) {
        top
    } else {
        rounded as u32
    }
}

/// Linear-scan top-k over the stored documents: quantize every matching
/// (term, doc) weight, sum, sort by score descending with ascending-docid
/// ties, truncate.
pub fn oracle_impact_topk(
    docs: &[WeightedDocument<f64>],
    max_weight: f64,
    bits: u32,
    query: &QueryVector,
    k: usize,
) -> Vec<(String, u64)> {
    let mut scored: Vec<(String, u64)> = docs
        .iter()
        .filter_map(|doc| {
            let mut score = 0u64;
            for (term, &qw) in &query.weights {
                if let Some(&w) = doc.weights.get(term) {
                    score += u64::from(qw) * u64::from(oracle_quantize(w, max_weight, bits));
                }
            }
            (score > 0).then(|| (doc.docid.clone(), score))
        })
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// BM25 recomputed from the formula over raw token lists, summing once per
/// query-term occurrence. Everything (tf, df, dl, avgdl) is derived here,
/// independent of the index.
pub fn oracle_bm25_scores(
    docs: &[(String, Vec<String>)],
    query_terms: &[String],
    k1: f64,
    b: f64,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let n = docs.len() as f64;
    let total_len: usize = docs.iter().map(|(_, toks)| toks.len()).sum();
    if total_len == 0 {
        return out;
    }
    let avgdl = total_len as f64 / n;
    let df = |term: &str| {
        docs.iter()
            .filter(|(_, toks)| toks.iter().any(|t| t == term))
            .count() as f64
    };
    for (docid, toks) in docs {
        let dl = toks.len() as f64;
        let mut score = 0.0;
        for term in query_terms {
            let tf = toks.iter().filter(|t| *t == term).count() as f64;
            if tf == 0.0 {
                continue;
            }
            let d = df(term);
            let idf = (1.0 + (n - d + 0.5) / (d + 0.5)).ln();
            score += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if score > 0.0 {
            out.insert(docid.clone(), score);
        }
    }
    out
}

pub fn ranked_as_pairs(list: &RankedList<f64>) -> Vec<(String, f64)> {
    list.entries
        .iter()
        .map(|e| (e.docid.clone(), e.score))
        .collect()
}
