//! Corpus parsing, document expansion, and text analysis.
//!
//! Two corpus encodings are understood:
//!
//! - raw JSONL, one `{"id": ..., "contents": ...}` object per line, fed to
//!   the frequency (BM25) indexing pipeline after analysis;
//! - weighted JSONL, one `{"id": ..., "vector": {term: weight}}` object per
//!   line, carrying precomputed non-negative term weights for the impact
//!   pipeline.
//!
//! Expansion files are TSV (`docid<TAB>term1 term2 ...`); expansion terms are
//! appended to the raw text so repeated terms raise term frequency.

use std::collections::{BTreeMap, HashSet};
use std::io::BufRead;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A document before vectorization: an id and its text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub docid: String,
    pub contents: String,
}

/// A document as a sparse term-weight vector. All weights are non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDocument<F> {
    pub docid: String,
    pub weights: BTreeMap<String, F>,
}

/// Expansion terms keyed by docid, parsed from a TSV file.
#[derive(Debug, Clone, Default)]
pub struct ExpansionMap {
    terms: BTreeMap<String, Vec<String>>,
}

impl ExpansionMap {
    pub fn get(&self, docid: &str) -> Option<&[String]> {
        self.terms.get(docid).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn docids(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }
}

/// Splits on any non-alphanumeric character and lowercases the tokens.
/// Empty tokens are dropped; order and duplicates are preserved. No stemming,
/// no stopword removal.
pub fn analyze(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

/// Appends expansion terms to a document's text: the original contents, one
/// space, then the terms joined by spaces. An empty expansion list returns
/// the document unchanged. Repeated expansion terms legitimately raise term
/// frequency downstream.
pub fn expand_document(doc: RawDocument, expansions: &[String]) -> RawDocument {
    if expansions.is_empty() {
        return doc;
    }
    let mut contents = doc.contents;
    contents.push(' ');
    contents.push_str(&expansions.join(" "));
    RawDocument {
        docid: doc.docid,
        contents,
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    contents: String,
}

#[derive(Deserialize)]
struct WeightedRecord {
    id: String,
    vector: BTreeMap<String, f64>,
}

fn check_id(id: &str, line: usize, what: &str) -> Result<()> {
    if id.is_empty() {
        return Err(Error::parse(line, format!("empty {what}")));
    }
    if id.chars().any(char::is_whitespace) {
        return Err(Error::parse(
            line,
            format!("{what} {id:?} contains whitespace"),
        ));
    }
    Ok(())
}

/// Parses one raw-corpus JSONL line.
fn parse_raw_record(line: &str, lineno: usize) -> Result<RawDocument> {
    let rec: RawRecord = serde_json::from_str(line)
        .map_err(|e| Error::parse(lineno, format!("invalid raw corpus record: {e}")))?;
    check_id(&rec.id, lineno, "docid")?;
    Ok(RawDocument {
        docid: rec.id,
        contents: rec.contents,
    })
}

/// Parses one weighted JSONL line into an id and a validated weight map.
/// Shared by the weighted-corpus and weighted-query readers.
pub(crate) fn parse_weighted_record<F: Scalar>(
    line: &str,
    lineno: usize,
) -> Result<(String, BTreeMap<String, F>)> {
    let rec: WeightedRecord = serde_json::from_str(line)
        .map_err(|e| Error::parse(lineno, format!("invalid weighted record: {e}")))?;
    check_id(&rec.id, lineno, "docid")?;
    let mut weights = BTreeMap::new();
    for (term, w) in rec.vector {
        if term.is_empty() {
            return Err(Error::parse(lineno, format!("empty term in {:?}", rec.id)));
        }
        if w < 0.0 {
            return Err(Error::parse(
                lineno,
                format!(
                    "negative weight {w} for term {term:?} in {:?}: term weights must be non-negative",
                    rec.id
                ),
            ));
        }
        let wf = F::from_f64(w).filter(|x| x.is_finite()).ok_or_else(|| {
            Error::parse(lineno, format!("weight {w} for term {term:?} out of range"))
        })?;
        weights.insert(term, wf);
    }
    Ok((rec.id, weights))
}

/// Streams a raw JSONL corpus. Blank lines are skipped; malformed lines yield
/// an error carrying the 1-based line number. Duplicate docids are caught at
/// index-build time.
pub fn parse_raw_corpus<R: BufRead>(reader: R) -> impl Iterator<Item = Result<RawDocument>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(parse_raw_record(&line, lineno))
    })
}

/// Streams a weighted JSONL corpus in file order. Negative weights and
/// duplicate docids are rejected.
pub fn parse_weighted_corpus<F: Scalar, R: BufRead>(
    reader: R,
) -> impl Iterator<Item = Result<WeightedDocument<F>>> {
    let mut seen: HashSet<String> = HashSet::new();
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(e.into())),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(
            parse_weighted_record::<F>(&line, lineno).and_then(|(docid, weights)| {
                if !seen.insert(docid.clone()) {
                    return Err(Error::parse(lineno, format!("duplicate docid {docid:?}")));
                }
                Ok(WeightedDocument { docid, weights })
            }),
        )
    })
}

/// Parses an expansion TSV: `docid<TAB>term1 term2 ...`. Multiple lines for
/// the same docid are merged in file order.
pub fn parse_expansions_tsv<R: BufRead>(reader: R) -> Result<ExpansionMap> {
    let mut map = ExpansionMap::default();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (docid, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected docid<TAB>terms"))?;
        check_id(docid, lineno, "docid")?;
        let terms = rest.split_whitespace().map(str::to_owned);
        map.terms.entry(docid.to_owned()).or_default().extend(terms);
    }
    Ok(map)
}
