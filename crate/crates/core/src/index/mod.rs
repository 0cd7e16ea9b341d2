//! Quantized impact-score inverted index with corpus statistics.
//!
//! Two modes share one container. An impact index stores quantized learned
//! weights per (term, doc) pair; a frequency index stores raw term
//! frequencies plus the document-length statistics BM25 needs. Posting lists
//! are docid-ordered and compressed with the delta-gap varint codec.

mod codec;
mod quantize;
mod storage;

pub use codec::{decode_postings, encode_postings};
pub use quantize::{quantize, Quantizer};

use std::collections::{BTreeMap, HashMap};

use crate::corpus::{analyze, RawDocument, WeightedDocument};
use crate::error::{Error, Result};
use crate::scalar::{from_u64, Scalar};
use crate::scoring::QueryVector;

/// Dense internal document id, assigned in ingestion order.
pub type DocOrdinal = u32;

/// One entry of a posting list: a document ordinal and its integer impact
/// (quantized weight in impact mode, raw term frequency in frequency mode).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub ordinal: DocOrdinal,
    pub impact: u32,
}

/// What the integer impacts mean, plus the quantization scale in impact mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexMode<F> {
    /// Impacts are raw term frequencies; quantization is unset.
    Frequency,
    /// Impacts are weights quantized to `bits` against the global
    /// `max_weight` observed at build time.
    Impact { bits: u8, max_weight: F },
}

impl<F> IndexMode<F> {
    pub fn name(&self) -> &'static str {
        match self {
            IndexMode::Frequency => "frequency",
            IndexMode::Impact { .. } => "impact",
        }
    }
}

/// Per-term lexicon entry: document frequency, the largest impact in the
/// list (for safe pruning), and the posting-list locator in the blob.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermEntry {
    pub doc_count: u32,
    pub max_impact: u32,
    pub(crate) offset: usize,
    pub(crate) byte_len: usize,
}

/// An immutable inverted index. Any number of readers may query it
/// concurrently; construction is single-writer through the builders.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex<F> {
    mode: IndexMode<F>,
    lexicon: BTreeMap<String, TermEntry>,
    postings_blob: Vec<u8>,
    docids: Vec<String>,
    doc_lengths: Vec<u32>,
    total_doc_len: u64,
    // derived at build/load time, not serialized
    ordinals: HashMap<String, DocOrdinal>,
    lex_ranks: Vec<u32>,
}

impl<F: Scalar> InvertedIndex<F> {
    pub fn mode(&self) -> &IndexMode<F> {
        &self.mode
    }

    pub fn num_docs(&self) -> usize {
        self.docids.len()
    }

    pub fn num_terms(&self) -> usize {
        self.lexicon.len()
    }

    /// Total number of indexed (term, doc) pairs: the sum of document
    /// frequencies over the lexicon.
    pub fn num_postings(&self) -> u64 {
        self.lexicon.values().map(|e| u64::from(e.doc_count)).sum()
    }

    pub fn total_doc_len(&self) -> u64 {
        self.total_doc_len
    }

    /// Average document length. Kept as integers internally; the one division
    /// happens here.
    pub fn avgdl(&self) -> F {
        if self.docids.is_empty() {
            return F::zero();
        }
        from_u64::<F>(self.total_doc_len) / from_u64::<F>(self.docids.len() as u64)
    }

    pub fn doc_length(&self, ordinal: DocOrdinal) -> u32 {
        self.doc_lengths[ordinal as usize]
    }

    pub fn docid(&self, ordinal: DocOrdinal) -> &str {
        &self.docids[ordinal as usize]
    }

    pub fn ordinal(&self, docid: &str) -> Option<DocOrdinal> {
        self.ordinals.get(docid).copied()
    }

    pub fn term_entry(&self, term: &str) -> Option<&TermEntry> {
        self.lexicon.get(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, &TermEntry)> {
        self.lexicon.iter().map(|(t, e)| (t.as_str(), e))
    }

    /// Decodes the posting list for `term`, or `None` if the term is not in
    /// the lexicon.
    pub fn postings(&self, term: &str) -> Result<Option<Vec<Posting>>> {
        match self.lexicon.get(term) {
            None => Ok(None),
            Some(entry) => {
                let slice = &self.postings_blob[entry.offset..entry.offset + entry.byte_len];
                decode_postings(slice).map(Some)
            }
        }
    }

    /// The quantizer shared by documents and queries in impact mode. `None`
    /// for frequency indexes and for degenerate impact indexes built from a
    /// corpus with no positive weight.
    pub fn quantizer(&self) -> Option<Quantizer<F>> {
        match self.mode {
            IndexMode::Frequency => None,
            IndexMode::Impact { bits, max_weight } => Quantizer::new(max_weight, bits).ok(),
        }
    }

    /// Quantizes real-valued query weights with the index's own scale so
    /// document and query impacts are commensurable. Terms that quantize to
    /// zero are dropped.
    pub fn quantize_query(&self, qid: &str, weights: &BTreeMap<String, F>) -> Result<QueryVector> {
        if matches!(self.mode, IndexMode::Frequency) {
            return Err(Error::ModeMismatch { expected: "impact" });
        }
        let quantizer = self.quantizer();
        let mut out = BTreeMap::new();
        for (term, &w) in weights {
            if w < F::zero() {
                return Err(Error::NegativeWeight {
                    docid: qid.to_owned(),
                    term: term.clone(),
                    weight: w.to_f64().unwrap_or(f64::NAN),
                });
            }
            let code = quantizer.as_ref().map_or(0, |q| q.quantize(w));
            if code >= 1 {
                out.insert(term.clone(), code);
            }
        }
        Ok(QueryVector {
            qid: qid.to_owned(),
            weights: out,
        })
    }

    /// Tie-break rank of a document: its position in the lexicographic order
    /// of all external docids. Lower rank sorts first among equal scores.
    pub(crate) fn lex_rank(&self, ordinal: DocOrdinal) -> u32 {
        self.lex_ranks[ordinal as usize]
    }

    pub(crate) fn from_parts(
        mode: IndexMode<F>,
        lexicon: BTreeMap<String, TermEntry>,
        postings_blob: Vec<u8>,
        docids: Vec<String>,
        doc_lengths: Vec<u32>,
        total_doc_len: u64,
    ) -> Self {
        let ordinals = docids
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i as DocOrdinal))
            .collect();
        let lex_ranks = compute_lex_ranks(&docids);
        InvertedIndex {
            mode,
            lexicon,
            postings_blob,
            docids,
            doc_lengths,
            total_doc_len,
            ordinals,
            lex_ranks,
        }
    }
}

fn compute_lex_ranks(docids: &[String]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..docids.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| docids[a as usize].cmp(&docids[b as usize]));
    let mut ranks = vec![0u32; docids.len()];
    for (rank, &ord) in order.iter().enumerate() {
        ranks[ord as usize] = rank as u32;
    }
    ranks
}

/// Shared document bookkeeping for both builders.
struct DocTable {
    docids: Vec<String>,
    doc_lengths: Vec<u32>,
    ordinals: HashMap<String, DocOrdinal>,
    total_doc_len: u64,
}

impl DocTable {
    fn new() -> Self {
        DocTable {
            docids: Vec::new(),
            doc_lengths: Vec::new(),
            ordinals: HashMap::new(),
            total_doc_len: 0,
        }
    }

    fn add(&mut self, docid: &str) -> Result<DocOrdinal> {
        if docid.is_empty() || docid.chars().any(char::is_whitespace) {
            return Err(Error::InvalidDocId {
                docid: docid.to_owned(),
            });
        }
        let ordinal = self.docids.len() as u64;
        if ordinal > u64::from(u32::MAX) {
            return Err(Error::CorruptIndex {
                msg: "corpus exceeds u32 document ordinals".into(),
            });
        }
        let ordinal = ordinal as DocOrdinal;
        if self.ordinals.insert(docid.to_owned(), ordinal).is_some() {
            return Err(Error::DuplicateDocId {
                docid: docid.to_owned(),
            });
        }
        self.docids.push(docid.to_owned());
        self.doc_lengths.push(0);
        Ok(ordinal)
    }

    fn set_length(&mut self, ordinal: DocOrdinal, dl: u32) {
        self.doc_lengths[ordinal as usize] = dl;
        self.total_doc_len += u64::from(dl);
    }
}

fn assemble<F: Scalar>(
    mode: IndexMode<F>,
    lists: BTreeMap<String, Vec<Posting>>,
    table: DocTable,
) -> InvertedIndex<F> {
    let mut blob = Vec::new();
    let mut lexicon = BTreeMap::new();
    for (term, postings) in lists {
        let bytes = encode_postings(&postings);
        let entry = TermEntry {
            doc_count: postings.len() as u32,
            max_impact: postings.iter().map(|p| p.impact).max().unwrap_or(0),
            offset: blob.len(),
            byte_len: bytes.len(),
        };
        blob.extend_from_slice(&bytes);
        lexicon.insert(term, entry);
    }
    InvertedIndex::from_parts(
        mode,
        lexicon,
        blob,
        table.docids,
        table.doc_lengths,
        table.total_doc_len,
    )
}

/// Streaming builder for impact indexes. The quantization scale must be known
/// up front; use [`build_impact_index`] to compute it from an in-memory
/// corpus, or make one pass over the corpus for the global maximum first.
pub struct ImpactIndexBuilder<F> {
    bits: u8,
    max_weight: F,
    quantizer: Option<Quantizer<F>>,
    lists: BTreeMap<String, Vec<Posting>>,
    table: DocTable,
}

impl<F: Scalar> ImpactIndexBuilder<F> {
    /// `max_weight` is the global maximum document weight. Zero is accepted
    /// (a corpus with no positive weight) and yields an index with no
    /// postings.
    pub fn new(bits: u8, max_weight: F) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidBits { bits });
        }
        if max_weight < F::zero() || !max_weight.is_finite() {
            return Err(Error::InvalidMaxWeight {
                max_weight: max_weight.to_f64().unwrap_or(f64::NAN),
            });
        }
        let quantizer = if max_weight > F::zero() {
            Some(Quantizer::new(max_weight, bits)?)
        } else {
            None
        };
        Ok(ImpactIndexBuilder {
            bits,
            max_weight,
            quantizer,
            lists: BTreeMap::new(),
            table: DocTable::new(),
        })
    }

    pub fn add(&mut self, doc: &WeightedDocument<F>) -> Result<()> {
        let ordinal = self.table.add(&doc.docid)?;
        let mut dl = 0u32;
        for (term, &w) in &doc.weights {
            if w < F::zero() {
                return Err(Error::NegativeWeight {
                    docid: doc.docid.clone(),
                    term: term.clone(),
                    weight: w.to_f64().unwrap_or(f64::NAN),
                });
            }
            let impact = self.quantizer.as_ref().map_or(0, |q| q.quantize(w));
            if impact >= 1 {
                self.lists
                    .entry(term.clone())
                    .or_default()
                    .push(Posting { ordinal, impact });
                dl += 1;
            }
        }
        self.table.set_length(ordinal, dl);
        Ok(())
    }

    pub fn finish(self) -> InvertedIndex<F> {
        let mode = IndexMode::Impact {
            bits: self.bits,
            max_weight: self.max_weight,
        };
        assemble(mode, self.lists, self.table)
    }
}

/// Streaming builder for frequency (BM25) indexes. Documents are analyzed
/// here; the document length is the token count.
pub struct FrequencyIndexBuilder {
    lists: BTreeMap<String, Vec<Posting>>,
    table: DocTable,
}

impl FrequencyIndexBuilder {
    pub fn new() -> Self {
        FrequencyIndexBuilder {
            lists: BTreeMap::new(),
            table: DocTable::new(),
        }
    }

    pub fn add(&mut self, doc: &RawDocument) -> Result<()> {
        let ordinal = self.table.add(&doc.docid)?;
        let tokens = analyze(&doc.contents);
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for token in &tokens {
            *counts.entry(token.clone()).or_insert(0) += 1;
        }
        for (term, tf) in counts {
            self.lists.entry(term).or_default().push(Posting {
                ordinal,
                impact: tf,
            });
        }
        self.table.set_length(ordinal, tokens.len() as u32);
        Ok(())
    }

    pub fn finish<F: Scalar>(self) -> InvertedIndex<F> {
        assemble(IndexMode::Frequency, self.lists, self.table)
    }
}

impl Default for FrequencyIndexBuilder {
    fn default() -> Self {
        Self::new()
    }
}

/// Builds an impact index. When `max_weight` is `None` the global maximum is
/// computed from the documents first (the two-pass scheme collapsed onto an
/// in-memory corpus).
pub fn build_impact_index<F: Scalar>(
    docs: impl IntoIterator<Item = WeightedDocument<F>>,
    bits: u8,
    max_weight: Option<F>,
) -> Result<InvertedIndex<F>> {
    match max_weight {
        Some(mw) => {
            let mut builder = ImpactIndexBuilder::new(bits, mw)?;
            for doc in docs {
                builder.add(&doc)?;
            }
            Ok(builder.finish())
        }
        None => {
            let docs: Vec<_> = docs.into_iter().collect();
            let mw = docs
                .iter()
                .flat_map(|d| d.weights.values().copied())
                .fold(F::zero(), F::max);
            let mut builder = ImpactIndexBuilder::new(bits, mw)?;
            for doc in &docs {
                builder.add(doc)?;
            }
            Ok(builder.finish())
        }
    }
}

/// Builds a frequency index for BM25 over analyzed raw documents.
pub fn build_frequency_index<F: Scalar>(
    docs: impl IntoIterator<Item = RawDocument>,
) -> Result<InvertedIndex<F>> {
    let mut builder = FrequencyIndexBuilder::new();
    for doc in docs {
        builder.add(&doc)?;
    }
    Ok(builder.finish())
}
