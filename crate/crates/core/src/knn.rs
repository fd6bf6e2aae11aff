// SPDX-License-Identifier: MIT OR Apache-2.0

//! k-th nearest neighbor search over a distance vector with trivial-match
//! exclusion zones.
//!
//! Three interchangeable algorithms are provided: repeated minimum search
//! ([`find_knn_brute`]), full argsort followed by a skip-scan
//! ([`find_knn_naive_sort`]), and linear-time selection of the `k * m`
//! smallest entries followed by a sort of only that candidate set
//! ([`find_knn_select`]). All three order entries by `(distance, index)`, so
//! they accept exactly the same neighbors.
//!
//! Each accepted neighbor can suppress at most `2 * ceil(m/2) - 1 <= m`
//! entries, so after `k - 1` acceptances at most `(k - 1) * m` of the `k * m`
//! best candidates are suppressed and the k-th neighbor is among them.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::{cmp_scalar, Scalar};

/// Half-width `ceil(m/2)` of the trivial-match zone for subsequence length `m`.
#[inline]
pub fn exclusion_half_width(m: usize) -> usize {
    m.div_ceil(2).max(1)
}

/// A k-th nearest neighbor request over one distance vector. `+inf` entries
/// are never selectable.
#[derive(Debug, Clone, Copy)]
pub struct KnnQuery<'a, T> {
    pub dists: &'a [T],
    pub k: usize,
    pub m: usize,
}

impl<'a, T: Scalar> KnnQuery<'a, T> {
    pub fn new(dists: &'a [T], k: usize, m: usize) -> Self {
        Self { dists, k, m }
    }

    fn half_width(&self) -> usize {
        exclusion_half_width(self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnResult<T> {
    pub neighbor_index: usize,
    pub neighbor_dist: T,
    /// Indices of the 1st through k-th accepted neighbors, in rank order.
    pub accepted: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KnnAlgorithm {
    Brute,
    NaiveSort,
    Select,
}

impl KnnAlgorithm {
    pub const ALL: [KnnAlgorithm; 3] = [Self::Brute, Self::NaiveSort, Self::Select];

    pub fn name(self) -> &'static str {
        match self {
            Self::Brute => "brute-force",
            Self::NaiveSort => "naive-sort",
            Self::Select => "proposed",
        }
    }
}

pub fn find_knn<T: Scalar>(q: &KnnQuery<'_, T>, algorithm: KnnAlgorithm) -> Result<KnnResult<T>> {
    match algorithm {
        KnnAlgorithm::Brute => find_knn_brute(q),
        KnnAlgorithm::NaiveSort => find_knn_naive_sort(q),
        KnnAlgorithm::Select => find_knn_select(q),
    }
}

/// Sets the trivial-match zone around `center` to `+inf`:
/// indices `[center - ceil(m/2) + 1, center + ceil(m/2) - 1]`, clipped.
pub fn apply_exclusion_zone<T: Scalar>(dists: &mut [T], center: usize, m: usize) {
    let h = exclusion_half_width(m);
    let lo = center.saturating_sub(h - 1);
    let hi = (center + h).min(dists.len());
    if lo < hi {
        dists[lo..hi].fill(T::infinity());
    }
}

fn validate<T>(q: &KnnQuery<'_, T>) -> Result<()> {
    if q.k == 0 {
        return Err(Error::InfeasibleK { k: 0, found: 0 });
    }
    Ok(())
}

fn finish<T: Scalar>(q: &KnnQuery<'_, T>, accepted: Vec<usize>) -> Result<KnnResult<T>> {
    if accepted.len() < q.k {
        return Err(Error::InfeasibleK {
            k: q.k,
            found: accepted.len(),
        });
    }
    let neighbor_index = accepted[q.k - 1];
    Ok(KnnResult {
        neighbor_index,
        neighbor_dist: q.dists[neighbor_index],
        accepted,
    })
}

/// Repeated linear minimum search; `O(k * n)`. Ties go to the lowest index.
/// Works on a private copy, the caller's vector is untouched.
pub fn find_knn_brute<T: Scalar>(q: &KnnQuery<'_, T>) -> Result<KnnResult<T>> {
    validate(q)?;
    let mut work = q.dists.to_vec();
    let mut accepted = Vec::with_capacity(q.k);
    for _ in 0..q.k {
        let mut best: Option<usize> = None;
        for (j, &v) in work.iter().enumerate() {
            if !v.is_finite() {
                continue;
            }
            match best {
                Some(b) if work[b] <= v => {}
                _ => best = Some(j),
            }
        }
        let Some(b) = best else { break };
        accepted.push(b);
        apply_exclusion_zone(&mut work, b, q.m);
    }
    finish(q, accepted)
}

#[inline]
fn by_value_then_index<T: Scalar>(dists: &[T]) -> impl Fn(&usize, &usize) -> Ordering + '_ {
    move |&a, &b| cmp_scalar(dists[a], dists[b]).then(a.cmp(&b))
}

/// Walks `order` and accepts each index that is not within the trivial-match
/// zone of an already accepted one, stopping at the k-th acceptance.
fn skip_scan(order: &[usize], k: usize, half_width: usize, accepted: &mut Vec<usize>) {
    for &j in order {
        if accepted.iter().any(|&a| a.abs_diff(j) < half_width) {
            continue;
        }
        accepted.push(j);
        if accepted.len() == k {
            break;
        }
    }
}

fn finite_indices<T: Scalar>(dists: &[T]) -> Vec<usize> {
    dists
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(j, _)| j)
        .collect()
}

/// Full argsort then skip-scan; `O(n log n)`.
pub fn find_knn_naive_sort<T: Scalar>(q: &KnnQuery<'_, T>) -> Result<KnnResult<T>> {
    validate(q)?;
    let mut order = finite_indices(q.dists);
    order.sort_unstable_by(by_value_then_index(q.dists));
    let mut accepted = Vec::with_capacity(q.k);
    skip_scan(&order, q.k, q.half_width(), &mut accepted);
    finish(q, accepted)
}

/// Reusable buffers for [`find_knn_select`] inside hot loops.
#[derive(Debug, Default)]
pub struct KnnScratch {
    candidates: Vec<usize>,
    accepted: Vec<usize>,
}

/// Partial selection of the `k * m` smallest entries, sort of that set, then
/// skip-scan; `O(n + k m log(k m))`.
///
/// Should the candidate set run out before `k` acceptances while finite
/// entries remain, it is doubled and the scan repeated.
pub fn find_knn_select<T: Scalar>(q: &KnnQuery<'_, T>) -> Result<KnnResult<T>> {
    let mut scratch = KnnScratch::default();
    select_into(q, &mut scratch)?;
    finish(q, std::mem::take(&mut scratch.accepted))
}

/// Like [`find_knn_select`] but only returns `(index, distance)` of the k-th
/// neighbor, reusing `scratch`.
pub(crate) fn select_kth<T: Scalar>(
    q: &KnnQuery<'_, T>,
    scratch: &mut KnnScratch,
) -> Result<(usize, T)> {
    if q.k == 1 {
        return argmin(q.dists)
            .map(|j| (j, q.dists[j]))
            .ok_or(Error::InfeasibleK { k: 1, found: 0 });
    }
    select_into(q, scratch)?;
    if scratch.accepted.len() < q.k {
        return Err(Error::InfeasibleK {
            k: q.k,
            found: scratch.accepted.len(),
        });
    }
    let j = scratch.accepted[q.k - 1];
    Ok((j, q.dists[j]))
}

/// Lowest-index minimum over finite entries.
fn argmin<T: Scalar>(dists: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (j, &v) in dists.iter().enumerate() {
        if v.is_finite() && best.is_none_or(|b| v < dists[b]) {
            best = Some(j);
        }
    }
    best
}

fn select_into<T: Scalar>(q: &KnnQuery<'_, T>, scratch: &mut KnnScratch) -> Result<()> {
    validate(q)?;
    let KnnScratch {
        candidates,
        accepted,
    } = scratch;
    let cmp = by_value_then_index(q.dists);
    let mut want = q.k.saturating_mul(q.m.max(1));
    loop {
        candidates.clear();
        candidates.extend(
            q.dists
                .iter()
                .enumerate()
                .filter(|(_, v)| v.is_finite())
                .map(|(j, _)| j),
        );
        let finite = candidates.len();
        let take = want.min(finite);
        if take < finite && take > 0 {
            candidates.select_nth_unstable_by(take - 1, &cmp);
            candidates.truncate(take);
        }
        candidates.sort_unstable_by(&cmp);
        accepted.clear();
        skip_scan(candidates, q.k, q.half_width(), accepted);
        if accepted.len() == q.k || take == finite {
            return Ok(());
        }
        want = want.saturating_mul(2);
    }
}
