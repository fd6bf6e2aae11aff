// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold-agnostic evaluation: AUC-ROC and the range-based
//! precision/recall AUC.
//!
//! The range-based metric is computed with flat positional bias, existence
//! reward weight 0 and no cardinality penalty:
//!
//! * range recall = mean over real ranges of the fraction of the range
//!   covered by predictions;
//! * range precision = mean over predicted ranges of the fraction of the
//!   range that overlaps real anomalies (1 when nothing is predicted).
//!
//! Thresholds are [`PTRT_THRESHOLDS`] evenly spaced quantiles of the scores
//! (linear interpolation); a time step is predicted anomalous when its score
//! is strictly above the threshold. Points are visited from the highest
//! threshold down and integrated with the trapezoid rule over recall.

use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

pub const PTRT_THRESHOLDS: usize = 250;

/// Half-open `[start, end)` run of anomalous time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AnomalyRange {
    pub start: usize,
    pub end: usize,
}

impl AnomalyRange {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn contains(&self, t: usize) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub auc_roc: f64,
    pub auc_ptrt: f64,
    pub n_thresholds: usize,
}

/// Maximal runs of `true`, sorted and disjoint.
pub fn labels_to_ranges(labels: &[bool]) -> Vec<AnomalyRange> {
    let mut out = Vec::new();
    let mut start = None;
    for (t, &l) in labels.iter().enumerate() {
        match (l, start) {
            (true, None) => start = Some(t),
            (false, Some(s)) => {
                out.push(AnomalyRange { start: s, end: t });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(AnomalyRange {
            start: s,
            end: labels.len(),
        });
    }
    out
}

fn check_lengths<T>(scores: &[T], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            actual: scores.len(),
        });
    }
    Ok(())
}

/// Area under the ROC curve in its Mann-Whitney form: the probability that a
/// random positive scores above a random negative, ties counting one half.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| cmp_scalar(scores[a], scores[b]));

    // Sum of 1-based mid-ranks of the positives.
    let mut rank_sum = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let mid_rank = (i + 1 + j) as f64 / 2.0;
        let tied_pos = order[i..j].iter().filter(|&&t| labels[t]).count();
        rank_sum += mid_rank * tied_pos as f64;
        i = j;
    }
    let p = positives as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * negatives as f64))
}

/// Range precision and recall when steps with `predicted[t]` are flagged.
pub(crate) fn range_precision_recall(
    predicted: &[bool],
    labels: &[bool],
    real: &[AnomalyRange],
) -> (f64, f64) {
    let pred_ranges = labels_to_ranges(predicted);
    if pred_ranges.is_empty() {
        return (1.0, 0.0);
    }
    let covered = |r: &AnomalyRange, mask: &[bool]| {
        mask[r.start..r.end].iter().filter(|&&b| b).count() as f64 / r.len() as f64
    };
    let recall = real.iter().map(|r| covered(r, predicted)).sum::<f64>() / real.len() as f64;
    let precision =
        pred_ranges.iter().map(|r| covered(r, labels)).sum::<f64>() / pred_ranges.len() as f64;
    (precision, recall)
}

/// `p`-quantile of ascending `sorted` with linear interpolation.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

/// Trapezoid area under `(recall, precision)` points given in visiting order.
pub(crate) fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

/// Range-based precision/recall AUC over [`PTRT_THRESHOLDS`] quantile thresholds.
pub fn range_pr_auc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    check_lengths(scores, labels)?;
    let real = labels_to_ranges(labels);
    if real.is_empty() {
        return Err(Error::NoAnomalyRange);
    }
    let values: Vec<f64> = scores.iter().map(|s| s.to_f64_lossy()).collect();
    let mut sorted = values.clone();
    sorted.sort_unstable_by(|a, b| cmp_scalar(*a, *b));

    let mut predicted = vec![false; values.len()];
    let mut points = Vec::with_capacity(PTRT_THRESHOLDS);
    for q in (0..PTRT_THRESHOLDS).rev() {
        let threshold = quantile(&sorted, q as f64 / (PTRT_THRESHOLDS - 1) as f64);
        for (p, &v) in predicted.iter_mut().zip(&values) {
            *p = v > threshold;
        }
        let (precision, recall) = range_precision_recall(&predicted, labels, &real);
        points.push((recall, precision));
    }
    Ok(trapezoid(&points))
}

/// Both metrics at once.
pub fn evaluate<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<EvalResult> {
    Ok(EvalResult {
        auc_roc: auc_roc(scores, labels)?,
        auc_ptrt: range_pr_auc(scores, labels)?,
        n_thresholds: PTRT_THRESHOLDS,
    })
}
