//! Dense-sparse hybrid fusion: per-query min-max normalization, linear
//! interpolation `s_dense + alpha * s_sparse`, and grid line search for the
//! interpolation weight against qrels.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{Metric, Qrels};
use crate::scalar::{from_f64, from_usize, Scalar};
use crate::scoring::{RankedList, Run, ScoredDoc};

pub const DEFAULT_FUSION_DEPTH: usize = 1000;

/// Fusion settings: the interpolation weight (in [0, 2]) and the retrieval
/// depth over which lists are normalized, fused, and truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig<F> {
    pub alpha: F,
    pub depth: usize,
}

impl<F: Scalar> FusionConfig<F> {
    pub fn new(alpha: F, depth: usize) -> Result<Self> {
        if alpha < F::zero() || alpha > from_f64::<F>(2.0) || !alpha.is_finite() {
            return Err(Error::InvalidAlpha {
                alpha: alpha.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(FusionConfig { alpha, depth })
    }
}

/// Min-max normalizes scores into [0, 1]: `(s - min) / (max - min)`. A
/// constant-score list maps to 0.5 everywhere. Ordering is unchanged (the
/// transform is monotone); entries are re-sorted only to keep the canonical
/// tie-break if distinct scores collapse.
pub fn minmax_normalize<F: Scalar>(list: &RankedList<F>) -> RankedList<F> {
    if list.entries.is_empty() {
        return list.clone();
    }
    // entries are sorted descending, so min and max sit at the ends
    let max = list.entries.first().expect("non-empty").score;
    let min = list.entries.last().expect("non-empty").score;
    let entries: Vec<ScoredDoc<F>> = if max == min {
        let half = from_f64::<F>(0.5);
        list.entries
            .iter()
            .map(|e| ScoredDoc {
                docid: e.docid.clone(),
                score: half,
            })
            .collect()
    } else {
        let range = max - min;
        list.entries
            .iter()
            .map(|e| ScoredDoc {
                docid: e.docid.clone(),
                score: (e.score - min) / range,
            })
            .collect()
    };
    RankedList::from_unsorted(list.qid.clone(), entries, usize::MAX)
}

/// Fuses two normalized lists for one query: the candidate set is the union
/// of docids, a missing side contributes 0, and the fused score is
/// `s_dense + alpha * s_sparse`. The result is reordered with the standard
/// tie-break and truncated to `depth`.
pub fn fuse_query<F: Scalar>(
    dense: &RankedList<F>,
    sparse: &RankedList<F>,
    config: &FusionConfig<F>,
) -> RankedList<F> {
    debug_assert!(
        dense.is_empty() || sparse.is_empty() || dense.qid == sparse.qid,
        "fusing lists for different queries"
    );
    let qid = if dense.is_empty() && !sparse.is_empty() {
        sparse.qid.clone()
    } else {
        dense.qid.clone()
    };
    let mut scores: BTreeMap<&str, (F, F)> = BTreeMap::new();
    for e in &dense.entries {
        scores.entry(&e.docid).or_insert((F::zero(), F::zero())).0 = e.score;
    }
    for e in &sparse.entries {
        scores.entry(&e.docid).or_insert((F::zero(), F::zero())).1 = e.score;
    }
    let entries: Vec<ScoredDoc<F>> = scores
        .into_iter()
        .map(|(docid, (d, s))| ScoredDoc {
            docid: docid.to_owned(),
            score: d + config.alpha * s,
        })
        .collect();
    RankedList::from_unsorted(qid, entries, config.depth)
}

/// Fuses two runs query by query: each side is truncated to the configured
/// depth, min-max normalized, then interpolated. Qids present in only one
/// run are fused against an empty other side.
pub fn fuse_runs<F: Scalar>(dense: &Run<F>, sparse: &Run<F>, config: &FusionConfig<F>) -> Run<F> {
    let qids: BTreeSet<&str> = dense.qids().chain(sparse.qids()).collect();
    let qid_list: Vec<&str> = qids.into_iter().collect();
    let fused: Vec<RankedList<F>> = qid_list
        .par_iter()
        .map(|&qid| {
            let norm_side = |side: Option<&RankedList<F>>| match side {
                Some(list) => minmax_normalize(&list.truncated(config.depth)),
                None => RankedList::new(qid),
            };
            let d = norm_side(dense.get(qid));
            let s = norm_side(sparse.get(qid));
            fuse_query(&d, &s, config)
        })
        .collect();
    let mut run = Run::new();
    for list in fused {
        run.insert(list).expect("qids are unique by construction");
    }
    run
}

/// Outcome of the alpha line search: the winning grid point, its metric
/// value, and every evaluated (alpha, value) pair in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneResult<F> {
    pub best_alpha: F,
    pub best_value: F,
    pub evaluations: Vec<(F, F)>,
}

/// Evaluation grid over [0, 2]: multiples of `step`, with the endpoint
/// clamped onto exactly 2.0 when `step` divides 2 (up to float drift).
fn alpha_grid<F: Scalar>(step: F) -> Vec<F> {
    let two = from_f64::<F>(2.0);
    let ratio = two / step;
    let rounded = ratio.round();
    let n = if (rounded * step - two).abs() <= step * from_f64::<F>(1e-6) {
        rounded
    } else {
        ratio.floor()
    };
    let n = n.to_usize().unwrap_or(0);
    (0..=n)
        .map(|i| {
            let alpha = from_usize::<F>(i) * step;
            if alpha > two {
                two
            } else {
                alpha
            }
        })
        .collect()
}

/// Line search for the interpolation weight: evaluates `metric` on the fused
/// run at every grid point in [0, 2] and returns the maximizer, smallest
/// alpha on ties.
pub fn tune_alpha<F: Scalar>(
    dense: &Run<F>,
    sparse: &Run<F>,
    qrels: &Qrels,
    metric: Metric,
    grid_step: F,
    depth: usize,
) -> Result<TuneResult<F>> {
    if grid_step <= F::zero() || !grid_step.is_finite() {
        return Err(Error::InvalidGridStep {
            step: grid_step.to_f64().unwrap_or(f64::NAN),
        });
    }
    if qrels.is_empty() {
        return Err(Error::EmptyQrels);
    }
    let alphas = alpha_grid(grid_step);
    let evaluations: Vec<(F, F)> = alphas
        .par_iter()
        .map(|&alpha| {
            let config = FusionConfig { alpha, depth };
            let fused = fuse_runs(dense, sparse, &config);
            metric.evaluate(&fused, qrels).map(|r| (alpha, r.mean))
        })
        .collect::<Result<_>>()?;
    let (mut best_alpha, mut best_value) = evaluations[0];
    for &(alpha, value) in &evaluations[1..] {
        if value > best_value {
            best_alpha = alpha;
            best_value = value;
        }
    }
    Ok(TuneResult {
        best_alpha,
        best_value,
        evaluations,
    })
}
