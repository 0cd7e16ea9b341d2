use std::io;

use thiserror::Error;

/// Errors surfaced by parsing, indexing, storage, search, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    /// A malformed line in a line-oriented input file (JSONL, TSV, TREC run,
    /// qrels). Line numbers are 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("negative weight {weight} for term {term:?} in {docid:?}: term weights must be non-negative")]
    NegativeWeight {
        docid: String,
        term: String,
        weight: f64,
    },

    #[error("invalid docid {docid:?}: docids must be non-empty and contain no whitespace")]
    InvalidDocId { docid: String },

    #[error("duplicate docid {docid:?}")]
    DuplicateDocId { docid: String },

    #[error("duplicate query id {qid:?}")]
    DuplicateQueryId { qid: String },

    #[error("quantization bits must be in 1..=16, got {bits}")]
    InvalidBits { bits: u8 },

    #[error("quantization max weight must be positive and finite, got {max_weight}")]
    InvalidMaxWeight { max_weight: f64 },

    #[error("BM25 parameters out of range: k1 must be >= 0 and b in [0, 1]")]
    InvalidBm25Params,

    #[error("truncated posting data at byte {offset}")]
    TruncatedPostings { offset: usize },

    #[error("corrupt posting data at byte {offset}: {msg}")]
    CorruptPostings { offset: usize, msg: String },

    #[error("not an index file")]
    NotAnIndex,

    #[error("unsupported index version {found} (this build reads version {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },

    #[error("index checksum mismatch: file is corrupt")]
    ChecksumMismatch,

    #[error("corrupt index file: {msg}")]
    CorruptIndex { msg: String },

    #[error("index mode mismatch: this operation requires a {expected} index")]
    ModeMismatch { expected: &'static str },

    #[error("qrels are empty")]
    EmptyQrels,

    #[error("qrels contain no relevant documents")]
    NoRelevantDocuments,

    #[error("invalid metric {name:?}: expected mrr@K or recall@K")]
    InvalidMetric { name: String },

    #[error("fusion alpha must be in [0, 2], got {alpha}")]
    InvalidAlpha { alpha: f64 },

    #[error("grid step must be positive and finite, got {step}")]
    InvalidGridStep { step: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
