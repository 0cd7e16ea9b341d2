//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them). Randomized suites use
//! fixed seeds; every tolerance is pinned in the assertions.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use common::{impactd as run_cli, ok as cli_ok, read_bytes, write};
use impactd::corpus::WeightedDocument;
use impactd::eval::{mrr_at_k, Metric, Qrels};
use impactd::fusion::{fuse_query, minmax_normalize, tune_alpha, FusionConfig};
use impactd::index::{
    build_impact_index, decode_postings, encode_postings, quantize, InvertedIndex, Posting,
};
use impactd::scoring::{Query, QueryVector, RankedList, Run, ScoredDoc, Searcher};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

fn criterion<T>(name: &str, f: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(value) => {
            println!("[PASS] {name}");
            value
        }
        Err(cause) => {
            println!("[FAIL] {name}");
            resume_unwind(cause);
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// shared generators and oracles
// ---------------------------------------------------------------------------

fn random_corpus(
    rng: &mut ChaCha8Rng,
    n_docs: usize,
    vocab_size: usize,
    max_terms: usize,
    max_weight: f64,
) -> Vec<WeightedDocument<f64>> {
    (0..n_docs)
        .map(|i| {
            let n_terms = rng.random_range(0..=max_terms);
            let mut weights = BTreeMap::new();
            for _ in 0..n_terms {
                let term = format!("t{}", rng.random_range(0..vocab_size));
                weights.insert(term, rng.random_range(0.0..max_weight));
            }
            WeightedDocument {
                docid: format!("d{i}"),
                weights,
            }
        })
        .collect()
}

fn random_query(rng: &mut ChaCha8Rng, vocab_size: usize) -> QueryVector {
    let n_terms = rng.random_range(1..=5);
    let mut weights = BTreeMap::new();
    for _ in 0..n_terms {
        weights.insert(
            format!("t{}", rng.random_range(0..vocab_size)),
            rng.random_range(1..=10u32),
        );
    }
    QueryVector {
        qid: "q".into(),
        weights,
    }
}

fn oracle_quantize(w: f64, max_weight: f64, bits: u32) -> u32 {
    let top = (1u32 << bits) - 1;
    let rounded = (w / max_weight * f64::from(top) + 0.5).floor();
    if rounded <= 0.0 {
        0
    } else if rounded >= f64::from(top) {
        top
    } else {
        rounded as u32
    }
}

/// Independent linear scan: quantizes each stored document itself, scores,
/// sorts by (score desc, docid asc), truncates.
fn oracle_topk(
    docs: &[WeightedDocument<f64>],
    max_weight: f64,
    query: &QueryVector,
    k: usize,
) -> Vec<(String, u64)> {
    let mut scored: Vec<(String, u64)> = docs
        .iter()
        .filter_map(|doc| {
            let mut score = 0u64;
            for (term, &qw) in &query.weights {
                if let Some(&w) = doc.weights.get(term) {
                    score += u64::from(qw) * u64::from(oracle_quantize(w, max_weight, 8));
                }
            }
            (score > 0).then(|| (doc.docid.clone(), score))
        })
        .collect();
    scored.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

fn as_integer_pairs(list: &RankedList<f64>) -> Vec<(String, u64)> {
    list.entries
        .iter()
        .map(|e| (e.docid.clone(), e.score as u64))
        .collect()
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_impact_oracle_equivalence() {
    criterion(
        "oracle equivalence (impact): 50 corpora x 500 queries, list-identical, < 60 s",
        || {
            let start = Instant::now();
            let mut rng = rng(0xACCE01);
            for corpus_no in 0..50 {
                let n_docs = rng.random_range(100..=500);
                let docs = random_corpus(&mut rng, n_docs, 100, 20, 10.0);
                let max_weight = docs
                    .iter()
                    .flat_map(|d| d.weights.values().copied())
                    .fold(0.0, f64::max);
                let index = build_impact_index(docs.clone(), 8, None).unwrap();
                let searcher = Searcher::new(&index);
                for query_no in 0..500 {
                    let qv = random_query(&mut rng, 100);
                    let k = [1usize, 10, 100][query_no % 3];
                    let got = searcher
                        .search_topk(&Query::Weighted(qv.clone()), k)
                        .unwrap();
                    let expected = oracle_topk(&docs, max_weight, &qv, k);
                    assert_eq!(
                        as_integer_pairs(&got),
                        expected,
                        "corpus {corpus_no} query {query_no} k={k}"
                    );
                }
            }
            let elapsed = start.elapsed();
            assert!(
                elapsed.as_secs() < 60,
                "suite took {elapsed:?}, budget is one minute"
            );
        },
    );
}

#[test]
fn criterion_2_bm25_oracle() {
    criterion(
        "oracle equivalence (BM25): ln(4/3) example at 1e-6, formula oracle at 1e-9",
        || {
            use impactd::corpus::RawDocument;
            use impactd::index::build_frequency_index;

            // hand-computed single-document example
            let index = build_frequency_index::<f64>(vec![RawDocument {
                docid: "d".into(),
                contents: "a".into(),
            }])
            .unwrap();
            let searcher = Searcher::new(&index);
            let score = searcher.bm25_scores(&["a".into()]).unwrap()["d"];
            assert!((score - 0.287682).abs() <= 1e-6, "{score}");
            assert!((score - (4.0f64 / 3.0).ln()).abs() <= 1e-12, "{score}");

            // random instances against an independent from-the-formula scorer
            let mut rng = rng(0xACCE02);
            for _ in 0..20 {
                let n_docs = rng.random_range(10..=60);
                let raw: Vec<RawDocument> = (0..n_docs)
                    .map(|i| {
                        let len = rng.random_range(0..=25);
                        let tokens: Vec<String> = (0..len)
                            .map(|_| format!("t{}", rng.random_range(0..30)))
                            .collect();
                        RawDocument {
                            docid: format!("d{i}"),
                            contents: tokens.join(" "),
                        }
                    })
                    .collect();
                let tokenized: Vec<(String, Vec<String>)> = raw
                    .iter()
                    .map(|d| (d.docid.clone(), impactd::analyze(&d.contents)))
                    .collect();
                let n = tokenized.len() as f64;
                let total_len: usize = tokenized.iter().map(|(_, t)| t.len()).sum();
                let index = build_frequency_index::<f64>(raw).unwrap();
                let searcher = Searcher::new(&index);
                for _ in 0..50 {
                    let terms: Vec<String> = (0..rng.random_range(1..=4))
                        .map(|_| format!("t{}", rng.random_range(0..30)))
                        .collect();
                    let got = searcher.bm25_scores(&terms).unwrap();
                    if total_len == 0 {
                        assert!(got.is_empty());
                        continue;
                    }
                    let avgdl = total_len as f64 / n;
                    for (docid, tokens) in &tokenized {
                        let dl = tokens.len() as f64;
                        let mut want = 0.0;
                        for term in &terms {
                            let tf = tokens.iter().filter(|t| *t == term).count() as f64;
                            if tf == 0.0 {
                                continue;
                            }
                            let df = tokenized
                                .iter()
                                .filter(|(_, toks)| toks.iter().any(|t| t == term))
                                .count() as f64;
                            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
                            want += idf * (tf * 1.9) / (tf + 0.9 * (1.0 - 0.4 + 0.4 * dl / avgdl));
                        }
                        let got_score = got.get(docid).copied().unwrap_or(0.0);
                        assert!(
                            (got_score - want).abs() <= 1e-9 * want.abs().max(1.0),
                            "{docid}: {got_score} vs {want}"
                        );
                    }
                }
            }
        },
    );
}

#[test]
fn criterion_3_pruned_equals_exhaustive() {
    criterion(
        "pruned evaluation: list-identical to exhaustive on the random suite",
        || {
            let mut rng = rng(0xACCE01); // the same suite as criterion 1
            for corpus_no in 0..50 {
                let n_docs = rng.random_range(100..=500);
                let docs = random_corpus(&mut rng, n_docs, 100, 20, 10.0);
                let index = build_impact_index(docs, 8, None).unwrap();
                let searcher = Searcher::new(&index);
                for query_no in 0..500 {
                    let qv = random_query(&mut rng, 100);
                    let k = [1usize, 10, 100][query_no % 3];
                    let q = Query::Weighted(qv);
                    let exhaustive = searcher.search_topk(&q, k).unwrap();
                    let pruned = searcher.search_topk_pruned(&q, k).unwrap();
                    assert_eq!(
                        pruned, exhaustive,
                        "corpus {corpus_no} query {query_no} k={k}"
                    );
                }
            }
        },
    );
}

#[test]
fn criterion_4_codec_roundtrip_and_persistence() {
    criterion(
        "codec: 10^4 posting lists round-trip exactly; save/load preserves query results",
        || {
            let mut rng = rng(0xACCE04);
            for _ in 0..10_000 {
                let len = rng.random_range(0..=200);
                let mut ordinal: u32 = rng.random_range(0..1000);
                let mut postings = Vec::with_capacity(len);
                for i in 0..len {
                    if i > 0 {
                        ordinal += rng.random_range(1..=1000);
                    }
                    postings.push(Posting {
                        ordinal,
                        impact: rng.random_range(0..=u32::from(u16::MAX)),
                    });
                }
                let bytes = encode_postings(&postings);
                assert_eq!(decode_postings(&bytes).unwrap(), postings);
            }

            // persistence keeps query results identical
            let docs = random_corpus(&mut rng, 200, 80, 15, 10.0);
            let index = build_impact_index(docs, 8, None).unwrap();
            let dir = tempdir().unwrap();
            let path = dir.path().join("acceptance.idx");
            index.save(&path).unwrap();
            let loaded = InvertedIndex::<f64>::load(&path).unwrap();
            assert_eq!(loaded, index);
            let searcher = Searcher::new(&index);
            let loaded_searcher = Searcher::new(&loaded);
            for _ in 0..200 {
                let qv = random_query(&mut rng, 80);
                let q = Query::Weighted(qv.clone());
                assert_eq!(
                    searcher.search_topk(&q, 10).unwrap(),
                    loaded_searcher.search_topk(&q, 10).unwrap()
                );
                assert_eq!(
                    searcher.impact_scores(&qv).unwrap(),
                    loaded_searcher.impact_scores(&qv).unwrap()
                );
            }
        },
    );
}

#[test]
fn criterion_5_quantization_properties() {
    criterion(
        "quantization: q(0)=0, q(max)=top code, monotone; midpoint 2.5/5.0@8 = 128",
        || {
            assert_eq!(quantize(2.5, 5.0, 8).unwrap(), 128);
            let mut rng = rng(0xACCE05);
            for _ in 0..1000 {
                let bits = rng.random_range(1..=16u8);
                let max_weight = rng.random_range(0.001..1000.0f64);
                let top = (1u32 << bits) - 1;
                assert_eq!(quantize(0.0, max_weight, bits).unwrap(), 0);
                assert_eq!(quantize(max_weight, max_weight, bits).unwrap(), top);
                let mut weights: Vec<f64> = (0..100)
                    .map(|_| rng.random_range(0.0..max_weight))
                    .collect();
                weights.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut prev = 0u32;
                for w in weights {
                    let code = quantize(w, max_weight, bits).unwrap();
                    assert!(code >= prev, "bits={bits} max={max_weight} w={w}");
                    assert!(code <= top);
                    prev = code;
                }
            }
        },
    );
}

#[test]
fn criterion_6_fusion_semantics() {
    criterion(
        "fusion: alpha-zero ordering, affine invariance, 3-doc example, tuned optimum",
        || {
            let list = |qid: &str, docs: &[(&str, f64)]| -> RankedList<f64> {
                RankedList::from_unsorted(
                    qid,
                    docs.iter()
                        .map(|(d, s)| ScoredDoc {
                            docid: d.to_string(),
                            score: *s,
                        })
                        .collect(),
                    usize::MAX,
                )
            };

            // hand-computed 3-doc fusion example, exact
            let dense = list("q", &[("d1", 1.0), ("d2", 0.0)]);
            let sparse = list("q", &[("d2", 1.0), ("d3", 0.5)]);
            let fused = fuse_query(&dense, &sparse, &FusionConfig::new(0.5, 1000).unwrap());
            let got: Vec<(&str, f64)> = fused
                .entries
                .iter()
                .map(|e| (e.docid.as_str(), e.score))
                .collect();
            assert_eq!(got, [("d1", 1.0), ("d2", 0.5), ("d3", 0.25)]);

            let mut rng = rng(0xACCE06);

            // alpha = 0 preserves dense ordering on dense docids
            for _ in 0..200 {
                let dense_docs: Vec<(String, f64)> = (0..rng.random_range(1..20))
                    .map(|i| (format!("d{i}"), rng.random_range(0.0..100.0)))
                    .collect();
                let sparse_docs: Vec<(String, f64)> = (0..rng.random_range(0..20))
                    .map(|i| (format!("s{i}"), rng.random_range(0.0..100.0)))
                    .collect();
                let to_list = |qid: &str, docs: &[(String, f64)]| {
                    RankedList::from_unsorted(
                        qid,
                        docs.iter()
                            .map(|(d, s)| ScoredDoc {
                                docid: d.clone(),
                                score: *s,
                            })
                            .collect(),
                        usize::MAX,
                    )
                };
                let nd = minmax_normalize(&to_list("q", &dense_docs));
                let ns = minmax_normalize(&to_list("q", &sparse_docs));
                let fused = fuse_query(&nd, &ns, &FusionConfig::new(0.0, 1000).unwrap());
                let dense_order: Vec<&str> = nd.entries.iter().map(|e| e.docid.as_str()).collect();
                let fused_dense: Vec<&str> = fused
                    .entries
                    .iter()
                    .filter(|e| e.docid.starts_with('d'))
                    .map(|e| e.docid.as_str())
                    .collect();
                assert_eq!(fused_dense, dense_order);
            }

            // min-max affine invariance, exact under exactly representable
            // transforms (integer scores, power-of-two scale, integer shift)
            for _ in 0..200 {
                let docs: Vec<(String, f64)> = (0..rng.random_range(1..30))
                    .map(|i| (format!("d{i}"), f64::from(rng.random_range(-500..500))))
                    .collect();
                let exponent = rng.random_range(-3..=3);
                let scale = (2.0f64).powi(exponent);
                let shift = f64::from(rng.random_range(-100..100));
                let transformed: Vec<(String, f64)> = docs
                    .iter()
                    .map(|(d, s)| (d.clone(), s * scale + shift))
                    .collect();
                let to_list = |docs: &[(String, f64)]| {
                    RankedList::from_unsorted(
                        "q",
                        docs.iter()
                            .map(|(d, s)| ScoredDoc {
                                docid: d.clone(),
                                score: *s,
                            })
                            .collect(),
                        usize::MAX,
                    )
                };
                assert_eq!(
                    minmax_normalize(&to_list(&docs)),
                    minmax_normalize(&to_list(&transformed))
                );
            }

            // tune-alpha on the constructed instance returns the
            // hand-enumerated optimum (alpha = 0.55, MRR@10 = 0.5)
            let mut dense_run = Run::new();
            dense_run
                .insert(list("q1", &[("d1", 1.0), ("d2", 0.5), ("dr", 0.0)]))
                .unwrap();
            let mut sparse_run = Run::new();
            sparse_run
                .insert(list("q1", &[("dr", 1.0), ("d1", 0.5), ("d2", 0.0)]))
                .unwrap();
            let mut qrels = Qrels::new();
            qrels.insert("q1", "dr", 1);
            let result = tune_alpha(
                &dense_run,
                &sparse_run,
                &qrels,
                Metric::MrrAt(10),
                0.05,
                1000,
            )
            .unwrap();
            assert_eq!(result.evaluations.len(), 41);
            assert!((result.best_alpha - 0.55).abs() < 1e-9);
            assert_eq!(result.best_value, 0.5);
            for &(alpha, value) in &result.evaluations {
                let expected = if alpha > 0.5 { 0.5 } else { 1.0 / 3.0 };
                assert_eq!(value, expected, "alpha={alpha}");
            }
        },
    );
}

#[test]
fn criterion_7_metric_examples_and_oracle() {
    criterion(
        "metrics: MRR examples exact; brute-force oracle agreement on random runs",
        || {
            let list_of = |qid: &str, n: usize| -> RankedList<f64> {
                RankedList {
                    qid: qid.into(),
                    entries: (0..n)
                        .map(|i| ScoredDoc {
                            docid: format!("d{i:02}"),
                            score: (n - i) as f64,
                        })
                        .collect(),
                }
            };
            let run_with = |list: RankedList<f64>| {
                let mut run = Run::new();
                run.insert(list).unwrap();
                run
            };

            // rank 1 -> 1.0
            let mut qrels = Qrels::new();
            qrels.insert("q", "d00", 1);
            assert_eq!(
                mrr_at_k(&run_with(list_of("q", 5)), &qrels, 10)
                    .unwrap()
                    .mean,
                1.0
            );
            // first relevant at rank 3 -> 1/3
            let mut qrels = Qrels::new();
            qrels.insert("q", "d02", 1);
            assert_eq!(
                mrr_at_k(&run_with(list_of("q", 5)), &qrels, 10)
                    .unwrap()
                    .mean,
                1.0 / 3.0
            );
            // relevant at rank 11 with k = 10 -> 0
            let mut qrels = Qrels::new();
            qrels.insert("q", "d10", 1);
            assert_eq!(
                mrr_at_k(&run_with(list_of("q", 15)), &qrels, 10)
                    .unwrap()
                    .mean,
                0.0
            );

            // brute-force oracle agreement on random runs
            let mut rng = rng(0xACCE07);
            for _ in 0..100 {
                let mut run = Run::new();
                let mut qrels = Qrels::new();
                for q in 0..6 {
                    let qid = format!("q{q}");
                    let n = rng.random_range(1..=20);
                    let entries: Vec<ScoredDoc<f64>> = (0..n)
                        .map(|d| ScoredDoc {
                            docid: format!("d{d}"),
                            score: rng.random_range(0.0..10.0),
                        })
                        .collect();
                    run.insert(RankedList::from_unsorted(qid.clone(), entries, usize::MAX))
                        .unwrap();
                    for d in 0..20 {
                        if rng.random_bool(0.25) {
                            qrels.insert(&qid, &format!("d{d}"), rng.random_range(0..=1));
                        }
                    }
                    qrels.insert(&qid, "dx", 0);
                }
                for k in [1usize, 5, 10] {
                    let got = mrr_at_k(&run, &qrels, k).unwrap().mean;
                    // full-scan oracle with no early exit
                    let mut total = 0.0;
                    for qid in qrels.qids() {
                        let mut first: Option<usize> = None;
                        if let Some(list) = run.get(qid) {
                            for (pos, e) in list.entries.iter().enumerate() {
                                if qrels.is_relevant(qid, &e.docid) && first.is_none_or(|f| pos < f)
                                {
                                    first = Some(pos);
                                }
                            }
                        }
                        if let Some(pos) = first {
                            if pos < k {
                                total += 1.0 / (pos + 1) as f64;
                            }
                        }
                    }
                    let want = total / qrels.num_queries() as f64;
                    assert!((got - want).abs() < 1e-12, "k={k}: {got} vs {want}");
                }
            }
        },
    );
}

/// Builds the synthetic vocabulary-mismatch fixture: queries ask for "car",
/// relevant documents only say "automobile" until the expansion file appends
/// the missing term.
fn write_expansion_fixture(dir: &std::path::Path) {
    let mut corpus = String::new();
    let mut expansions = String::new();
    let mut queries = String::new();
    let mut qrels = String::new();
    for i in 0..10 {
        corpus.push_str(&format!(
            "{{\"id\":\"rel{i}\",\"contents\":\"automobile engine roadtrip topic{i}\"}}\n"
        ));
        expansions.push_str(&format!("rel{i}\tcar car\n"));
        queries.push_str(&format!("q{i}\tcar topic{i}\n"));
        qrels.push_str(&format!("q{i} 0 rel{i} 1\n"));
    }
    for i in 0..10 {
        corpus.push_str(&format!(
            "{{\"id\":\"noise{i}\",\"contents\":\"banana stand filler topic{i} topic{i}\"}}\n"
        ));
    }
    write(dir, "corpus.jsonl", &corpus);
    write(dir, "expansions.tsv", &expansions);
    write(dir, "queries.tsv", &queries);
    write(dir, "qrels.txt", &qrels);
}

fn mrr_from_eval_stdout(stdout: &str) -> f64 {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix("mrr@10 all "))
        .expect("eval output")
        .trim()
        .parse()
        .expect("metric value")
}

/// Runs build -> search -> eval over a corpus directory, with and without
/// the expansion file, and returns (mrr_without, mrr_with).
fn expansion_direction(dir: &std::path::Path) -> (f64, f64) {
    cli_ok(
        &[
            "build",
            "--corpus",
            "corpus.jsonl",
            "--mode",
            "frequency",
            "-o",
            "plain.idx",
        ],
        dir,
    );
    cli_ok(
        &[
            "build",
            "--corpus",
            "corpus.jsonl",
            "--mode",
            "frequency",
            "--expansions",
            "expansions.tsv",
            "-o",
            "expanded.idx",
        ],
        dir,
    );
    cli_ok(
        &[
            "search",
            "--index",
            "plain.idx",
            "--queries",
            "queries.tsv",
            "-k",
            "1000",
            "-o",
            "plain.trec",
        ],
        dir,
    );
    cli_ok(
        &[
            "search",
            "--index",
            "expanded.idx",
            "--queries",
            "queries.tsv",
            "-k",
            "1000",
            "-o",
            "expanded.trec",
        ],
        dir,
    );
    let without = cli_ok(
        &[
            "eval",
            "--run",
            "plain.trec",
            "--qrels",
            "qrels.txt",
            "--metric",
            "mrr@10",
        ],
        dir,
    );
    let with = cli_ok(
        &[
            "eval",
            "--run",
            "expanded.trec",
            "--qrels",
            "qrels.txt",
            "--metric",
            "mrr@10",
        ],
        dir,
    );
    (
        mrr_from_eval_stdout(&without.stdout),
        mrr_from_eval_stdout(&with.stdout),
    )
}

#[test]
fn criterion_8_expansion_direction_smoke() {
    criterion(
        "expansion smoke: BM25-with-expansion MRR >= BM25-without (direction only)",
        || {
            // hermetic synthetic fixture through the real CLI pipeline
            let dir = tempdir().unwrap();
            write_expansion_fixture(dir.path());
            let (without, with) = expansion_direction(dir.path());
            assert!(
                with >= without,
                "expansion must not hurt on the mismatch fixture: {with} < {without}"
            );
            assert!(with > 0.0);

            // optional: a real sample (collection.jsonl, expansions.tsv,
            // queries.tsv, qrels.txt) named by IMPACTD_MSMARCO_SAMPLE
            if let Ok(sample) = std::env::var("IMPACTD_MSMARCO_SAMPLE") {
                let sample_dir = tempdir().unwrap();
                let src = std::path::Path::new(&sample);
                std::fs::copy(
                    src.join("collection.jsonl"),
                    sample_dir.path().join("corpus.jsonl"),
                )
                .expect("sample collection.jsonl");
                for name in ["expansions.tsv", "queries.tsv", "qrels.txt"] {
                    std::fs::copy(src.join(name), sample_dir.path().join(name))
                        .unwrap_or_else(|_| panic!("sample {name}"));
                }
                let (without, with) = expansion_direction(sample_dir.path());
                assert!(
                    with >= without,
                    "sample: MRR with expansion {with} < without {without}"
                );
                println!("sample direction check: {without:.4} -> {with:.4}");
            }
        },
    );
}

#[test]
fn criterion_9_cli_determinism_across_thread_counts() {
    criterion(
        "determinism: every subcommand byte-identical across runs and thread counts",
        || {
            let dir = tempdir().unwrap();
            let dir = dir.path();
            // a corpus large enough that parallel sections actually split
            let mut corpus = String::new();
            let mut rng = rng(0xACCE09);
            for i in 0..300 {
                let len = rng.random_range(1..=20);
                let words: Vec<String> = (0..len)
                    .map(|_| format!("w{}", rng.random_range(0..50)))
                    .collect();
                corpus.push_str(&format!(
                    "{{\"id\":\"d{i}\",\"contents\":\"{}\"}}\n",
                    words.join(" ")
                ));
            }
            write(dir, "corpus.jsonl", &corpus);
            let mut queries = String::new();
            for q in 0..40 {
                queries.push_str(&format!("q{q}\tw{} w{}\n", q % 50, (q * 7) % 50));
            }
            write(dir, "queries.tsv", &queries);
            let mut qrels = String::new();
            for q in 0..40 {
                qrels.push_str(&format!("q{q} 0 d{} 1\n", (q * 3) % 300));
            }
            write(dir, "qrels.txt", &qrels);

            let compare = |args: &[&str], outputs: &[&str]| {
                let mut snapshots: Vec<(String, Vec<Vec<u8>>)> = Vec::new();
                for threads in ["1", "4"] {
                    let mut full: Vec<&str> = args.to_vec();
                    full.extend_from_slice(&["--threads", threads]);
                    let result = run_cli(&full, dir);
                    assert!(result.status.success(), "{full:?}: {}", result.stderr);
                    let files = outputs.iter().map(|o| read_bytes(dir, o)).collect();
                    snapshots.push((result.stdout, files));
                }
                let (first_out, first_files) = &snapshots[0];
                for (out, files) in &snapshots[1..] {
                    assert_eq!(
                        out, first_out,
                        "stdout differs across thread counts: {args:?}"
                    );
                    assert_eq!(
                        files, first_files,
                        "files differ across thread counts: {args:?}"
                    );
                }
            };

            compare(
                &[
                    "build",
                    "--corpus",
                    "corpus.jsonl",
                    "--mode",
                    "frequency",
                    "-o",
                    "det.idx",
                ],
                &["det.idx"],
            );
            compare(
                &[
                    "search",
                    "--index",
                    "det.idx",
                    "--queries",
                    "queries.tsv",
                    "-k",
                    "50",
                    "-o",
                    "det.trec",
                ],
                &["det.trec"],
            );
            compare(
                &[
                    "search",
                    "--index",
                    "det.idx",
                    "--queries",
                    "queries.tsv",
                    "-k",
                    "50",
                    "--pruned",
                    "-o",
                    "det_pruned.trec",
                ],
                &["det_pruned.trec"],
            );
            assert_eq!(
                read_bytes(dir, "det.trec"),
                read_bytes(dir, "det_pruned.trec")
            );

            // a second run to fuse against: shuffle scores by reusing the
            // qrels docs at fixed scores
            let mut sparse = String::new();
            for q in 0..40 {
                for d in 0..5 {
                    sparse.push_str(&format!(
                        "q{q} Q0 d{} {} {}.000000 synthetic\n",
                        (q * 3 + d * 11) % 300,
                        d + 1,
                        5 - d
                    ));
                }
            }
            write(dir, "sparse.trec", &sparse);
            compare(
                &[
                    "fuse",
                    "--dense",
                    "det.trec",
                    "--sparse",
                    "sparse.trec",
                    "--alpha",
                    "0.8",
                    "-o",
                    "det_fused.trec",
                ],
                &["det_fused.trec"],
            );
            compare(
                &[
                    "tune-alpha",
                    "--dense",
                    "det.trec",
                    "--sparse",
                    "sparse.trec",
                    "--qrels",
                    "qrels.txt",
                    "--step",
                    "0.25",
                    "--verbose",
                ],
                &[],
            );
            compare(
                &[
                    "eval",
                    "--run",
                    "det_fused.trec",
                    "--qrels",
                    "qrels.txt",
                    "--metric",
                    "mrr@10",
                    "--per-query",
                ],
                &[],
            );
        },
    );
}
