//! Run and qrels parsing plus ranked-retrieval metrics (MRR@k, Recall@k).
//!
//! Run files are TREC interchange format, `qid Q0 docid rank score tag` with
//! single spaces; qrels lines are `qid 0 docid grade`. On read, ranks are
//! re-derived from the scores with the standard tie-break (descending score,
//! ascending docid) so a run's ordering never depends on the rank column of
//! whatever tool produced it.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{from_usize, Scalar};
use crate::scoring::{RankedList, Run, ScoredDoc};

/// Relevance judgments: qid -> docid -> grade. A document is relevant when
/// its grade is >= 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Qrels {
    judgments: BTreeMap<String, BTreeMap<String, u32>>,
}

impl Qrels {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment; returns true if it overrode an earlier grade for
    /// the same (qid, docid).
    pub fn insert(&mut self, qid: &str, docid: &str, grade: u32) -> bool {
        self.judgments
            .entry(qid.to_owned())
            .or_default()
            .insert(docid.to_owned(), grade)
            .is_some()
    }

    pub fn grade(&self, qid: &str, docid: &str) -> Option<u32> {
        self.judgments.get(qid).and_then(|m| m.get(docid)).copied()
    }

    pub fn is_relevant(&self, qid: &str, docid: &str) -> bool {
        self.grade(qid, docid).is_some_and(|g| g >= 1)
    }

    pub fn relevant_count(&self, qid: &str) -> usize {
        self.judgments
            .get(qid)
            .map_or(0, |m| m.values().filter(|&&g| g >= 1).count())
    }

    pub fn qids(&self) -> impl Iterator<Item = &str> {
        self.judgments.keys().map(String::as_str)
    }

    pub fn num_queries(&self) -> usize {
        self.judgments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.judgments.is_empty()
    }
}

/// Parses qrels lines `qid 0 docid grade` (whitespace-separated). A later
/// duplicate (qid, docid) overrides the earlier grade; the override count is
/// returned for the caller to warn about.
pub fn parse_qrels<R: BufRead>(reader: R) -> Result<(Qrels, usize)> {
    let mut qrels = Qrels::new();
    let mut overridden = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected 4 fields `qid 0 docid grade`, got {}",
                    fields.len()
                ),
            ));
        }
        let grade: u32 = fields[3]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-integer grade {:?}", fields[3])))?;
        if qrels.insert(fields[0], fields[2], grade) {
            overridden += 1;
        }
    }
    Ok((qrels, overridden))
}

/// A retrieval metric with its cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    MrrAt(usize),
    RecallAt(usize),
}

impl Metric {
    pub fn evaluate<F: Scalar>(&self, run: &Run<F>, qrels: &Qrels) -> Result<MetricReport<F>> {
        match *self {
            Metric::MrrAt(k) => mrr_at_k(run, qrels, k),
            Metric::RecallAt(k) => recall_at_k(run, qrels, k),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::MrrAt(k) => write!(f, "mrr@{k}"),
            Metric::RecallAt(k) => write!(f, "recall@{k}"),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let invalid = || Error::InvalidMetric { name: s.to_owned() };
        let (name, k) = s.split_once('@').ok_or_else(invalid)?;
        let k: usize = k.parse().map_err(|_| invalid())?;
        if k == 0 {
            return Err(invalid());
        }
        match name.to_ascii_lowercase().as_str() {
            "mrr" => Ok(Metric::MrrAt(k)),
            "recall" => Ok(Metric::RecallAt(k)),
            _ => Err(invalid()),
        }
    }
}

/// Per-query metric values and their arithmetic mean.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<F> {
    pub metric: Metric,
    pub per_query: BTreeMap<String, F>,
    pub mean: F,
}

fn mean_of<F: Scalar>(per_query: &BTreeMap<String, F>) -> F {
    if per_query.is_empty() {
        return F::zero();
    }
    let sum = per_query.values().fold(F::zero(), |acc, &v| acc + v);
    sum / from_usize::<F>(per_query.len())
}

/// Mean reciprocal rank at cutoff `k`: per query, 1/r for the rank r of the
/// first relevant document within the top k, else 0. Averaged over every
/// query in the qrels, so queries missing from the run score 0.
pub fn mrr_at_k<F: Scalar>(run: &Run<F>, qrels: &Qrels, k: usize) -> Result<MetricReport<F>> {
    if qrels.is_empty() {
        return Err(Error::EmptyQrels);
    }
    let qids: Vec<&str> = qrels.qids().collect();
    let values: Vec<(String, F)> = qids
        .par_iter()
        .map(|&qid| {
            let value = run
                .get(qid)
                .and_then(|list| {
                    list.entries
                        .iter()
                        .take(k)
                        .position(|e| qrels.is_relevant(qid, &e.docid))
                })
                .map_or(F::zero(), |pos| F::one() / from_usize::<F>(pos + 1));
            (qid.to_owned(), value)
        })
        .collect();
    let per_query: BTreeMap<String, F> = values.into_iter().collect();
    let mean = mean_of(&per_query);
    Ok(MetricReport {
        metric: Metric::MrrAt(k),
        per_query,
        mean,
    })
}

/// Recall at cutoff `k`: per query, the fraction of relevant documents found
/// in the top k. Queries with no relevant documents are excluded from the
/// mean; it is an error if no query has any.
pub fn recall_at_k<F: Scalar>(run: &Run<F>, qrels: &Qrels, k: usize) -> Result<MetricReport<F>> {
    if qrels.is_empty() {
        return Err(Error::EmptyQrels);
    }
    let qids: Vec<&str> = qrels
        .qids()
        .filter(|q| qrels.relevant_count(q) > 0)
        .collect();
    if qids.is_empty() {
        return Err(Error::NoRelevantDocuments);
    }
    let values: Vec<(String, F)> = qids
        .par_iter()
        .map(|&qid| {
            let total = qrels.relevant_count(qid);
            let found = run.get(qid).map_or(0, |list| {
                list.entries
                    .iter()
                    .take(k)
                    .filter(|e| qrels.is_relevant(qid, &e.docid))
                    .count()
            });
            (
                qid.to_owned(),
                from_usize::<F>(found) / from_usize::<F>(total),
            )
        })
        .collect();
    let per_query: BTreeMap<String, F> = values.into_iter().collect();
    let mean = mean_of(&per_query);
    Ok(MetricReport {
        metric: Metric::RecallAt(k),
        per_query,
        mean,
    })
}

/// Parses a TREC run. Each line is `qid Q0 docid rank score tag`; the rank
/// field must be an integer but the stored ordering is re-derived from the
/// scores. Duplicate (qid, docid) pairs are rejected.
pub fn parse_trec_run<F: Scalar, R: BufRead>(reader: R) -> Result<Run<F>> {
    let mut per_qid: BTreeMap<String, Vec<ScoredDoc<F>>> = BTreeMap::new();
    let mut seen: std::collections::HashSet<(String, String)> = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(Error::parse(
                lineno,
                format!(
                    "expected 6 fields `qid Q0 docid rank score tag`, got {}",
                    fields.len()
                ),
            ));
        }
        let qid = fields[0];
        let docid = fields[2];
        fields[3]
            .parse::<u64>()
            .map_err(|_| Error::parse(lineno, format!("non-integer rank {:?}", fields[3])))?;
        let score: f64 = fields[4]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("non-numeric score {:?}", fields[4])))?;
        if !score.is_finite() {
            return Err(Error::parse(lineno, format!("non-finite score {score}")));
        }
        if !seen.insert((qid.to_owned(), docid.to_owned())) {
            return Err(Error::parse(
                lineno,
                format!("duplicate (qid, docid) pair ({qid:?}, {docid:?})"),
            ));
        }
        per_qid.entry(qid.to_owned()).or_default().push(ScoredDoc {
            docid: docid.to_owned(),
            score: crate::scalar::from_f64::<F>(score),
        });
    }
    let mut run = Run::new();
    for (qid, entries) in per_qid {
        run.insert(RankedList::from_unsorted(qid, entries, usize::MAX))?;
    }
    Ok(run)
}

/// Writes a run in TREC format. Queries are emitted in sorted qid order,
/// ranks start at 1, scores are printed with 6 decimal places.
pub fn write_trec_run<F: Scalar, W: Write>(run: &Run<F>, tag: &str, mut out: W) -> Result<()> {
    for list in run.iter() {
        for (i, entry) in list.entries.iter().enumerate() {
            writeln!(
                out,
                "{} Q0 {} {} {:.6} {}",
                list.qid,
                entry.docid,
                i + 1,
                entry.score,
                tag
            )?;
        }
    }
    Ok(())
}
