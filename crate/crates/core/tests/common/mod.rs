// SPDX-License-Identifier: MIT OR Apache-2.0

//! Slow reference implementations shared by the integration tests.
//!
//! Everything here is written from the definitions, with no reuse of library
//! internals, so agreement with the library is meaningful.

#![allow(dead_code)]

use mdmp::{MultivariateSeries, Placement, ProfileVariant, Reduction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random-walk columns, occasionally with an exactly constant stretch so the
/// flat-window convention gets exercised.
pub fn random_series(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: usize,
    m: usize,
) -> MultivariateSeries<f64> {
    let columns = (0..d)
        .map(|_| {
            let mut level = rng.random_range(-5.0..5.0);
            let mut col: Vec<f64> = (0..n)
                .map(|_| {
                    level += rng.random_range(-1.0..1.0);
                    level
                })
                .collect();
            if n > 3 * m && rng.random_bool(0.3) {
                let start = rng.random_range(0..n - 2 * m);
                let c = col[start];
                col[start..start + 2 * m].fill(c);
            }
            col
        })
        .collect();
    MultivariateSeries::from_columns(columns).unwrap()
}

fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn is_flat(mean: f64, std: f64) -> bool {
    std < 1e-8 * mean.abs().max(1.0)
}

/// z-normalized Euclidean distance straight from the definition.
pub fn naive_distance(a: &[f64], b: &[f64]) -> f64 {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    match (is_flat(ma, sa), is_flat(mb, sb)) {
        (true, true) => 0.0,
        (true, false) | (false, true) => (a.len() as f64).sqrt(),
        (false, false) => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let diff = (x - ma) / sa - (y - mb) / sb;
                diff * diff
            })
            .sum::<f64>()
            .sqrt(),
    }
}

/// `D[i][j][dim]` for every query offset `i` and target offset `j`. Trivial
/// matches (`|i - j| < ceil(m/2)`) are `+inf` when `self_join`.
pub fn distance_tensor(
    query: &MultivariateSeries<f64>,
    target: &MultivariateSeries<f64>,
    m: usize,
    self_join: bool,
) -> Vec<Vec<Vec<f64>>> {
    let h = m.div_ceil(2);
    (0..=query.n() - m)
        .map(|i| {
            (0..=target.n() - m)
                .map(|j| {
                    (0..query.d())
                        .map(|dim| {
                            if self_join && i.abs_diff(j) < h {
                                f64::INFINITY
                            } else {
                                naive_distance(
                                    &query.dim(dim)[i..i + m],
                                    &target.dim(dim)[j..j + m],
                                )
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Greedy k nearest neighbors: repeatedly take the smallest remaining finite
/// entry (lowest index on ties) and remove everything within `ceil(m/2) - 1`
/// of it. Returns the accepted indices, or `None` when fewer than `k` exist.
pub fn naive_knn(dists: &[f64], k: usize, m: usize) -> Option<Vec<usize>> {
    let h = m.div_ceil(2).max(1);
    let mut alive: Vec<bool> = dists.iter().map(|v| v.is_finite()).collect();
    let mut accepted = Vec::with_capacity(k);
    while accepted.len() < k {
        let mut best: Option<usize> = None;
        for (j, &v) in dists.iter().enumerate() {
            if alive[j] && best.is_none_or(|b| v < dists[b]) {
                best = Some(j);
            }
        }
        let c = best?;
        accepted.push(c);
        for (j, a) in alive.iter_mut().enumerate() {
            if j.abs_diff(c) < h {
                *a = false;
            }
        }
    }
    Some(accepted)
}

pub fn reduce(pair: &[f64], reduction: Reduction) -> Vec<f64> {
    match reduction {
        Reduction::SortDescending => {
            let mut v = pair.to_vec();
            v.sort_by(|a, b| b.partial_cmp(a).unwrap());
            v
        }
        Reduction::MaxOnly => vec![pair.iter().cloned().fold(f64::NEG_INFINITY, f64::max)],
        Reduction::SumAllDims => vec![pair.iter().map(|v| v * v).sum::<f64>().sqrt()],
    }
}

/// Profile rows computed from the materialized distance tensor.
pub struct OracleProfile {
    pub values: Vec<Vec<f64>>,
    pub indices: Vec<Vec<usize>>,
}

/// `None` when some query row has fewer than `k` admissible neighbors.
pub fn oracle_profile(
    query: &MultivariateSeries<f64>,
    target: &MultivariateSeries<f64>,
    m: usize,
    variant: ProfileVariant,
    k: usize,
    self_join: bool,
) -> Option<OracleProfile> {
    let tensor = distance_tensor(query, target, m, self_join);
    let d = query.d();
    let mut values = Vec::new();
    let mut indices = Vec::new();
    for row in &tensor {
        match variant.placement() {
            Placement::PreNeighbor => {
                let reduced: Vec<Vec<f64>> =
                    row.iter().map(|p| reduce(p, variant.reduction())).collect();
                let width = reduced[0].len();
                let mut vals = Vec::with_capacity(width);
                let mut idxs = Vec::with_capacity(width);
                for l in 0..width {
                    let column: Vec<f64> = reduced.iter().map(|r| r[l]).collect();
                    let nn = *naive_knn(&column, k, m)?.last().unwrap();
                    vals.push(column[nn]);
                    idxs.push(nn);
                }
                values.push(vals);
                indices.push(idxs);
            }
            Placement::PostNeighbor => {
                let mut hits: Vec<(f64, usize)> = (0..d)
                    .map(|dim| {
                        let column: Vec<f64> = row.iter().map(|p| p[dim]).collect();
                        naive_knn(&column, k, m).map(|acc| {
                            let nn = *acc.last().unwrap();
                            (column[nn], nn)
                        })
                    })
                    .collect::<Option<_>>()?;
                hits.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
                hits.truncate(variant.width(d));
                values.push(hits.iter().map(|h| h.0).collect());
                indices.push(hits.iter().map(|h| h.1).collect());
            }
        }
    }
    Some(OracleProfile { values, indices })
}

/// AUC-ROC by counting every positive/negative pair.
pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (sp, _) in scores.iter().zip(labels).filter(|(_, &l)| l) {
        for (sn, _) in scores.iter().zip(labels).filter(|(_, &l)| !l) {
            pairs += 1.0;
            if sp > sn {
                wins += 1.0;
            } else if sp == sn {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut t = 0;
    while t < mask.len() {
        if mask[t] {
            let s = t;
            while t < mask.len() && mask[t] {
                t += 1;
            }
            out.push((s, t));
        } else {
            t += 1;
        }
    }
    out
}

fn overlap(a: (usize, usize), b: (usize, usize)) -> usize {
    a.1.min(b.1).saturating_sub(a.0.max(b.0))
}

/// Range precision/recall AUC using every distinct score as a threshold
/// (`score >= threshold`) plus the empty prediction.
pub fn exhaustive_range_pr_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let real = runs(labels);
    let mut thresholds: Vec<f64> = scores.to_vec();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let mut points = vec![(0.0, 1.0)];
    for th in thresholds {
        let pred: Vec<bool> = scores.iter().map(|&s| s >= th).collect();
        let predicted = runs(&pred);
        let recall = real
            .iter()
            .map(|&r| {
                predicted.iter().map(|&p| overlap(r, p)).sum::<usize>() as f64 / (r.1 - r.0) as f64
            })
            .sum::<f64>()
            / real.len() as f64;
        let precision = predicted
            .iter()
            .map(|&p| {
                real.iter().map(|&r| overlap(r, p)).sum::<usize>() as f64 / (p.1 - p.0) as f64
            })
            .sum::<f64>()
            / predicted.len() as f64;
        points.push((recall, precision));
    }
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[0].1 + w[1].1) / 2.0)
        .sum()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| if x == y { 0.0 } else { (x - y).abs() })
        .fold(0.0, f64::max)
}
