//! Impact-scored sparse retrieval at desk scale.
//!
//! The pipeline: parse a raw or pre-weighted corpus ([`corpus`]), build a
//! compressed inverted index with quantized impacts or raw term frequencies
//! ([`index`]), answer top-k queries by impact summation or BM25
//! ([`scoring`]), combine dense and sparse run files by normalized linear
//! interpolation ([`fusion`]), and measure MRR@k / Recall@k against qrels
//! ([`eval`]).
//!
//! Real-valued math (weights, BM25 scores, normalized fusion scores, metric
//! values) is generic over [`Scalar`] (f32 or f64); quantized impacts and
//! term frequencies are integers. The aliases at the crate root pin the f64
//! instantiation the CLI uses:
//!
//! ```
//! use impactd::corpus::WeightedDocument;
//!
//! let doc = WeightedDocument::<f64> {
//!     docid: "d1".into(),
//!     weights: [("apple".to_string(), 1.5)].into_iter().collect(),
//! };
//! let index: impactd::Index = impactd::index::build_impact_index(vec![doc], 8, None).unwrap();
//! assert_eq!(index.num_docs(), 1);
//! ```

pub mod corpus;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod index;
pub mod scalar;
pub mod scoring;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use corpus::{analyze, expand_document, ExpansionMap, RawDocument};
pub use eval::{Metric, Qrels};
pub use index::Posting;
pub use scoring::{Query, QueryVector};

/// Double-precision aliases for the generic types; the generic forms live in
/// their modules.
pub type Index = index::InvertedIndex<f64>;
pub type IndexMode = index::IndexMode<f64>;
pub type WeightedDocument = corpus::WeightedDocument<f64>;
pub type ScoredDoc = scoring::ScoredDoc<f64>;
pub type RankedList = scoring::RankedList<f64>;
pub type Run = scoring::Run<f64>;
pub type Searcher<'a> = scoring::Searcher<'a, f64>;
pub type Bm25Params = scoring::Bm25Params<f64>;
pub type FusionConfig = fusion::FusionConfig<f64>;
pub type TuneResult = fusion::TuneResult<f64>;
pub type MetricReport = eval::MetricReport<f64>;
