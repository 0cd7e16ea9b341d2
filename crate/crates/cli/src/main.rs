//! `impactd`: build quantized impact or BM25 frequency indexes, run top-k
//! searches, fuse dense and sparse runs, tune the fusion weight, and score
//! runs against qrels. Diagnostics go to stderr; data goes to files or
//! stdout. Identical inputs and flags produce byte-identical outputs
//! regardless of thread count.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "impactd",
    version,
    about = "Impact-scored sparse retrieval engine with BM25, run fusion, and TREC evaluation"
)]
struct Cli {
    /// Worker threads for parallel sections (0 = available parallelism)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IndexModeArg {
    /// Quantized learned weights from a weighted JSONL corpus
    Impact,
    /// Raw term frequencies for BM25 from a raw JSONL corpus
    Frequency,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum QueryWeightsArg {
    /// Unit weight per distinct analyzed query term
    Unit,
    /// Real-valued weights from a JSONL file, quantized with the index scale
    File,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index from a corpus.
    ///
    /// Raw corpus (frequency mode): JSONL, e.g. {"id":"d1","contents":"a b"}.
    /// Weighted corpus (impact mode): JSONL, e.g. {"id":"d1","vector":{"a":1.5}}.
    /// Expansion file: TSV, e.g. "d1<TAB>car vehicle" (frequency mode only).
    Build {
        /// Corpus file (JSONL; format depends on --mode)
        #[arg(long)]
        corpus: PathBuf,
        /// What the index stores
        #[arg(long, value_enum)]
        mode: IndexModeArg,
        /// Expansion TSV appended to raw documents before analysis
        #[arg(long)]
        expansions: Option<PathBuf>,
        /// Quantization bits for impact mode (1..=16)
        #[arg(long, default_value_t = 8)]
        bits: u8,
        /// Output index file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Search an index and write a TREC run file.
    ///
    /// Text queries: TSV, e.g. "q1<TAB>what is bm25".
    /// Weighted queries: JSONL, e.g. {"id":"q1","vector":{"bm25":2.0}}.
    /// Run output: "qid Q0 docid rank score tag" per line.
    Search {
        /// Index file produced by `build`
        #[arg(long)]
        index: PathBuf,
        /// Queries file (TSV for unit weights, JSONL for file weights)
        #[arg(long)]
        queries: PathBuf,
        /// Query weighting scheme (impact indexes only; frequency uses BM25)
        #[arg(long, value_enum, default_value_t = QueryWeightsArg::Unit)]
        query_weights: QueryWeightsArg,
        /// Results per query
        #[arg(short, long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        k: u64,
        /// BM25 k1 (frequency indexes)
        #[arg(long, default_value_t = 0.9)]
        k1: f64,
        /// BM25 b (frequency indexes)
        #[arg(long, default_value_t = 0.4)]
        b: f64,
        /// Use the dynamically pruned evaluator (same results, fewer scored
        /// documents)
        #[arg(long)]
        pruned: bool,
        /// Run tag written in the last column
        #[arg(long, default_value = "impactd")]
        tag: String,
        /// Output run file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fuse a dense and a sparse run: per query, min-max normalize both
    /// sides over the top --depth entries, then score dense + alpha * sparse.
    ///
    /// Run files: TREC format, e.g. "q1 Q0 d9 1 14.200000 tag".
    Fuse {
        /// Dense run file (TREC format)
        #[arg(long)]
        dense: PathBuf,
        /// Sparse run file (TREC format)
        #[arg(long)]
        sparse: PathBuf,
        /// Interpolation weight in [0, 2]
        #[arg(long)]
        alpha: f64,
        /// Retrieval depth for normalization and output truncation
        #[arg(long, default_value_t = 1000)]
        depth: usize,
        /// Run tag written in the last column
        #[arg(long, default_value = "impactd")]
        tag: String,
        /// Output run file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Line-search the fusion weight over [0, 2] against qrels.
    ///
    /// Qrels: "qid 0 docid grade" per line, e.g. "q1 0 d9 1".
    TuneAlpha {
        /// Dense run file (TREC format)
        #[arg(long)]
        dense: PathBuf,
        /// Sparse run file (TREC format)
        #[arg(long)]
        sparse: PathBuf,
        /// Relevance judgments
        #[arg(long)]
        qrels: PathBuf,
        /// Metric to maximize (mrr@K or recall@K)
        #[arg(long, default_value = "mrr@10")]
        metric: String,
        /// Grid step over [0, 2]
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Retrieval depth for normalization and truncation
        #[arg(long, default_value_t = 1000)]
        depth: usize,
        /// Print every evaluated grid point
        #[arg(long)]
        verbose: bool,
    },
    /// Score a run against qrels (mrr@K or recall@K).
    ///
    /// Example: eval --run run.trec --qrels dev.qrels --metric mrr@10
    Eval {
        /// Run file (TREC format)
        #[arg(long)]
        run: PathBuf,
        /// Relevance judgments ("qid 0 docid grade" per line)
        #[arg(long)]
        qrels: PathBuf,
        /// Metric to compute
        #[arg(long, default_value = "mrr@10")]
        metric: String,
        /// Also print one line per query
        #[arg(long)]
        per_query: bool,
    },
}

fn run(cli: Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()?;
    match cli.command {
        Command::Build {
            corpus,
            mode,
            expansions,
            bits,
            output,
        } => commands::build(&corpus, mode, expansions.as_deref(), bits, &output),
        Command::Search {
            index,
            queries,
            query_weights,
            k,
            k1,
            b,
            pruned,
            tag,
            output,
        } => commands::search(
            &index,
            &queries,
            query_weights,
            k as usize,
            k1,
            b,
            pruned,
            &tag,
            &output,
        ),
        Command::Fuse {
            dense,
            sparse,
            alpha,
            depth,
            tag,
            output,
        } => commands::fuse(&dense, &sparse, alpha, depth, &tag, &output),
        Command::TuneAlpha {
            dense,
            sparse,
            qrels,
            metric,
            step,
            depth,
            verbose,
        } => commands::tune_alpha(&dense, &sparse, &qrels, &metric, step, depth, verbose),
        Command::Eval {
            run,
            qrels,
            metric,
            per_query,
        } => commands::eval(&run, &qrels, &metric, per_query),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
