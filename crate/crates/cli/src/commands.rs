use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

use impactd::corpus::{self, parse_expansions_tsv, parse_raw_corpus, parse_weighted_corpus};
use impactd::eval::{parse_qrels, parse_trec_run, write_trec_run, Metric};
use impactd::fusion::{self, FusionConfig};
use impactd::index::{FrequencyIndexBuilder, ImpactIndexBuilder};
use impactd::scoring::{self, Query, QueryVector};
use impactd::{analyze, Bm25Params, Index, Qrels, Run};

use crate::{IndexModeArg, QueryWeightsArg};

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn in_file(path: &Path) -> String {
    path.display().to_string()
}

pub fn build(
    corpus: &Path,
    mode: IndexModeArg,
    expansions: Option<&Path>,
    bits: u8,
    output: &Path,
) -> Result<()> {
    let index: Index = match mode {
        IndexModeArg::Impact => {
            if expansions.is_some() {
                bail!("--expansions applies to raw corpora only: weighted corpora are taken as already expanded");
            }
            // pass 1: global maximum weight for the quantization scale
            let mut max_weight = 0.0f64;
            for doc in parse_weighted_corpus::<f64, _>(open(corpus)?) {
                let doc = doc.with_context(|| in_file(corpus))?;
                for &w in doc.weights.values() {
                    max_weight = max_weight.max(w);
                }
            }
            // pass 2: quantize and build
            let mut builder = ImpactIndexBuilder::new(bits, max_weight)?;
            for doc in parse_weighted_corpus::<f64, _>(open(corpus)?) {
                let doc = doc.with_context(|| in_file(corpus))?;
                builder.add(&doc).with_context(|| in_file(corpus))?;
            }
            builder.finish()
        }
        IndexModeArg::Frequency => {
            let expansion_map = match expansions {
                Some(path) => parse_expansions_tsv(open(path)?).with_context(|| in_file(path))?,
                None => corpus::ExpansionMap::default(),
            };
            let mut used: HashSet<String> = HashSet::new();
            let mut builder = FrequencyIndexBuilder::new();
            for doc in parse_raw_corpus(open(corpus)?) {
                let doc = doc.with_context(|| in_file(corpus))?;
                let doc = match expansion_map.get(&doc.docid) {
                    Some(terms) => {
                        used.insert(doc.docid.clone());
                        corpus::expand_document(doc, terms)
                    }
                    None => doc,
                };
                builder.add(&doc).with_context(|| in_file(corpus))?;
            }
            let unmatched = expansion_map
                .docids()
                .filter(|d| !used.contains(*d))
                .count();
            if unmatched > 0 {
                eprintln!(
                    "warning: {unmatched} expansion entr{} matched no document",
                    if unmatched == 1 { "y" } else { "ies" }
                );
            }
            builder.finish()
        }
    };

    index
        .save(output)
        .with_context(|| format!("writing {}", output.display()))?;
    let bytes = fs::metadata(output)?.len();
    eprintln!(
        "indexed {} documents, {} terms, {} postings; wrote {} bytes to {}",
        index.num_docs(),
        index.num_terms(),
        index.num_postings(),
        bytes,
        output.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn search(
    index_path: &Path,
    queries_path: &Path,
    query_weights: QueryWeightsArg,
    k: usize,
    k1: f64,
    b: f64,
    pruned: bool,
    tag: &str,
    output: &Path,
) -> Result<()> {
    let index = Index::load(index_path).with_context(|| in_file(index_path))?;
    let frequency_mode = matches!(index.mode(), impactd::IndexMode::Frequency);

    let queries: Vec<Query> = match (frequency_mode, query_weights) {
        (true, QueryWeightsArg::File) => {
            bail!("mode mismatch: weighted query files require an impact index, {} is a frequency index", index_path.display())
        }
        (true, QueryWeightsArg::Unit) => scoring::parse_queries_tsv(open(queries_path)?)
            .with_context(|| in_file(queries_path))?
            .into_iter()
            .map(|(qid, text)| Query::Terms {
                qid,
                terms: analyze(&text),
            })
            .collect(),
        (false, QueryWeightsArg::Unit) => scoring::parse_queries_tsv(open(queries_path)?)
            .with_context(|| in_file(queries_path))?
            .into_iter()
            .map(|(qid, text)| Query::Weighted(QueryVector::unit(&qid, &analyze(&text))))
            .collect(),
        (false, QueryWeightsArg::File) => {
            let parsed = scoring::parse_weighted_queries::<f64, _>(open(queries_path)?)
                .with_context(|| in_file(queries_path))?;
            parsed
                .into_iter()
                .map(|(qid, weights)| {
                    index
                        .quantize_query(&qid, &weights)
                        .map(Query::Weighted)
                        .map_err(anyhow::Error::from)
                })
                .collect::<Result<_>>()?
        }
    };

    let params = Bm25Params::new(k1, b)?;
    let run = scoring::run_queries(&index, &queries, k, pruned, params)?;
    write_run(&run, tag, output)?;
    eprintln!(
        "searched {} queries (k={k}, {}), wrote {}",
        queries.len(),
        if pruned { "pruned" } else { "exhaustive" },
        output.display()
    );
    Ok(())
}

pub fn fuse(
    dense: &Path,
    sparse: &Path,
    alpha: f64,
    depth: usize,
    tag: &str,
    output: &Path,
) -> Result<()> {
    let dense_run = parse_trec_run::<f64, _>(open(dense)?).with_context(|| in_file(dense))?;
    let sparse_run = parse_trec_run::<f64, _>(open(sparse)?).with_context(|| in_file(sparse))?;
    let config = FusionConfig::new(alpha, depth)?;
    let fused = fusion::fuse_runs(&dense_run, &sparse_run, &config);
    write_run(&fused, tag, output)?;
    eprintln!(
        "fused {} queries at alpha={alpha}, wrote {}",
        fused.len(),
        output.display()
    );
    Ok(())
}

pub fn tune_alpha(
    dense: &Path,
    sparse: &Path,
    qrels_path: &Path,
    metric: &str,
    step: f64,
    depth: usize,
    verbose: bool,
) -> Result<()> {
    let dense_run = parse_trec_run::<f64, _>(open(dense)?).with_context(|| in_file(dense))?;
    let sparse_run = parse_trec_run::<f64, _>(open(sparse)?).with_context(|| in_file(sparse))?;
    let qrels = load_qrels(qrels_path)?;
    let metric: Metric = metric.parse()?;
    let result = fusion::tune_alpha(&dense_run, &sparse_run, &qrels, metric, step, depth)?;

    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if verbose {
        for (alpha, value) in &result.evaluations {
            writeln!(out, "alpha {alpha} {metric} {value:.6}")?;
        }
        writeln!(out, "evaluated {} grid points", result.evaluations.len())?;
    }
    // best alpha is printed with full round-trip precision so feeding it
    // back into `fuse --alpha` reproduces this exact fusion
    writeln!(out, "best-alpha {}", result.best_alpha)?;
    writeln!(out, "{metric} {:.6}", result.best_value)?;
    Ok(())
}

pub fn eval(run_path: &Path, qrels_path: &Path, metric: &str, per_query: bool) -> Result<()> {
    let run = parse_trec_run::<f64, _>(open(run_path)?).with_context(|| in_file(run_path))?;
    let qrels = load_qrels(qrels_path)?;
    let metric: Metric = metric.parse()?;
    if !run.qids().any(|qid| qrels.qids().any(|q| q == qid)) {
        bail!(
            "no overlap between run qids ({}) and qrels qids ({})",
            run_path.display(),
            qrels_path.display()
        );
    }
    let report = metric.evaluate(&run, &qrels)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if per_query {
        for (qid, value) in &report.per_query {
            writeln!(out, "{metric} {qid} {value:.6}")?;
        }
    }
    writeln!(out, "{metric} all {:.6}", report.mean)?;
    Ok(())
}

fn load_qrels(path: &Path) -> Result<Qrels> {
    let (qrels, overridden) = parse_qrels(open(path)?).with_context(|| in_file(path))?;
    if overridden > 0 {
        eprintln!(
            "warning: {overridden} duplicate qrels judgment{} overridden by later lines",
            if overridden == 1 { "" } else { "s" }
        );
    }
    Ok(qrels)
}

fn write_run(run: &Run, tag: &str, output: &Path) -> Result<()> {
    let file = File::create(output).with_context(|| format!("creating {}", output.display()))?;
    let mut writer = BufWriter::new(file);
    write_trec_run(run, tag, &mut writer)?;
    writer.flush()?;
    Ok(())
}
