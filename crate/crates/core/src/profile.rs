// SPDX-License-Identifier: MIT OR Apache-2.0

//! Multidimensional Matrix Profile assembly.
//!
//! Every query row of the distance tensor is produced by a [`RowStream`] and
//! summarized immediately, so memory stays `O(max(n1, n2) * d)` per worker.
//!
//! * Pre-neighbor placement reduces each `d`-vector of pairwise distances
//!   (sorted descending, max, or root-sum-of-squares) and then finds the k-th
//!   nearest neighbor separately for each rank column.
//! * Post-neighbor placement finds the k-th nearest neighbor per dimension
//!   and then sorts (or maxes) the `d` resulting distances of each row.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::distance::{PreparedSeries, RowStream};
use crate::error::{Error, Result};
use crate::knn::{exclusion_half_width, select_kth, KnnQuery, KnnScratch};
use crate::matrix::Matrix;
use crate::scalar::{cmp_scalar, Scalar};
use crate::series::MultivariateSeries;

/// Query rows handled by one streaming worker. Block boundaries do not depend
/// on the thread count, so results are identical for any degree of parallelism.
pub const ROW_BLOCK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    PreNeighbor,
    PostNeighbor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Reduction {
    SortDescending,
    MaxOnly,
    SumAllDims,
}

/// How the distance tensor is summarized. Only the five combinations with a
/// defined meaning can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProfileVariant {
    placement: Placement,
    reduction: Reduction,
}

impl ProfileVariant {
    pub const PRE_SORT: Self = Self::from_parts(Placement::PreNeighbor, Reduction::SortDescending);
    pub const PRE_MAX: Self = Self::from_parts(Placement::PreNeighbor, Reduction::MaxOnly);
    pub const POST_SORT: Self =
        Self::from_parts(Placement::PostNeighbor, Reduction::SortDescending);
    pub const POST_MAX: Self = Self::from_parts(Placement::PostNeighbor, Reduction::MaxOnly);
    /// Single z-normalized distance over all dimensions at once.
    pub const NAIVE_SUM: Self = Self::from_parts(Placement::PreNeighbor, Reduction::SumAllDims);

    pub const ALL: [Self; 5] = [
        Self::PRE_SORT,
        Self::PRE_MAX,
        Self::POST_SORT,
        Self::POST_MAX,
        Self::NAIVE_SUM,
    ];

    const fn from_parts(placement: Placement, reduction: Reduction) -> Self {
        Self {
            placement,
            reduction,
        }
    }

    pub fn new(placement: Placement, reduction: Reduction) -> Result<Self> {
        match (placement, reduction) {
            (Placement::PostNeighbor, Reduction::SumAllDims) => Err(Error::InvalidVariant(
                "the all-dimension sum is only defined before neighbor finding".into(),
            )),
            _ => Ok(Self::from_parts(placement, reduction)),
        }
    }

    pub fn placement(self) -> Placement {
        self.placement
    }

    pub fn reduction(self) -> Reduction {
        self.reduction
    }

    /// Number of profile columns for `d`-dimensional input.
    pub fn width(self, d: usize) -> usize {
        match self.reduction {
            Reduction::SortDescending => d,
            Reduction::MaxOnly | Reduction::SumAllDims => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match (self.placement, self.reduction) {
            (Placement::PreNeighbor, Reduction::SortDescending) => "pre-sort",
            (Placement::PreNeighbor, Reduction::MaxOnly) => "pre-max",
            (Placement::PostNeighbor, Reduction::SortDescending) => "post-sort",
            (Placement::PostNeighbor, Reduction::MaxOnly) => "post-max",
            (Placement::PreNeighbor, Reduction::SumAllDims) => "naive-sum",
            (Placement::PostNeighbor, Reduction::SumAllDims) => unreachable!(),
        }
    }
}

impl fmt::Display for ProfileVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProfileVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidVariant(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JoinKind {
    SelfJoin,
    ABJoin,
}

/// The `(n1-m+1) x width` profile, where `width` is `d` for sorting variants
/// and 1 for max / sum variants, plus neighbor offsets for every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MultidimProfile<T> {
    pub values: Matrix<T>,
    /// Start offset (in the target series) of the neighbor realizing each value.
    pub indices: Matrix<usize>,
    /// Post-neighbor variants only: the input dimension each cell came from.
    pub source_dims: Option<Matrix<usize>>,
    pub m: usize,
    pub k: usize,
    pub d: usize,
    pub variant: ProfileVariant,
    pub join: JoinKind,
}

impl<T: Scalar> MultidimProfile<T> {
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    pub fn width(&self) -> usize {
        self.values.cols()
    }

    /// Rank-`l` profile column; column `l` targets anomalies spanning at
    /// least `l + 1` dimensions.
    pub fn column(&self, l: usize) -> Result<Vec<T>> {
        if l >= self.width() {
            return Err(Error::RankOutOfRange {
                rank: l,
                available: self.width(),
            });
        }
        Ok(self.values.column(l))
    }

    /// Neighbor offsets of the rank-`l` column.
    pub fn index_column(&self, l: usize) -> Result<Vec<usize>> {
        if l >= self.width() {
            return Err(Error::RankOutOfRange {
                rank: l,
                available: self.width(),
            });
        }
        Ok(self.indices.column(l))
    }
}

/// Summarizes one pairwise `d`-vector.
pub fn reduce_pair_vector<T: Scalar>(pair: &[T], reduction: Reduction) -> Vec<T> {
    match reduction {
        Reduction::SortDescending => {
            let mut v = pair.to_vec();
            sort_descending(&mut v);
            v
        }
        Reduction::MaxOnly => vec![max_of(pair)],
        Reduction::SumAllDims => vec![root_sum_squares(pair)],
    }
}

#[inline]
fn sort_descending<T: Scalar>(v: &mut [T]) {
    v.sort_unstable_by(|a, b| cmp_scalar(*b, *a));
}

#[inline]
fn max_of<T: Scalar>(v: &[T]) -> T {
    v.iter().copied().fold(T::neg_infinity(), T::max)
}

#[inline]
fn root_sum_squares<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// AB-join: profile of every subsequence of `query` against `target`.
pub fn mp_ab_join<T: Scalar>(
    query: &MultivariateSeries<T>,
    target: &MultivariateSeries<T>,
    m: usize,
    variant: ProfileVariant,
    k: usize,
) -> Result<MultidimProfile<T>> {
    if query.d() != target.d() {
        return Err(Error::DimMismatch {
            left: query.d(),
            right: target.d(),
        });
    }
    check_window(m, query.n().min(target.n()))?;
    for n in [query.n(), target.n()] {
        if n < m {
            return Err(Error::SeriesTooShort { n, required: m });
        }
    }
    if k == 0 {
        return Err(Error::InfeasibleK { k, found: 0 });
    }
    let q = PreparedSeries::from_series(query, m)?;
    let t = PreparedSeries::from_series(target, m)?;
    join(&q, &t, None, m, variant, k, JoinKind::ABJoin)
}

/// Self-join with the diagonal trivial-match zone `|i - j| < ceil(m/2)`.
pub fn mp_self_join<T: Scalar>(
    series: &MultivariateSeries<T>,
    m: usize,
    variant: ProfileVariant,
    k: usize,
) -> Result<MultidimProfile<T>> {
    check_window(m, series.n())?;
    if k == 0 {
        return Err(Error::InfeasibleK { k, found: 0 });
    }
    let required = m + exclusion_half_width(m) + k * m;
    if series.n() < required {
        return Err(Error::SeriesTooShort {
            n: series.n(),
            required,
        });
    }
    let p = PreparedSeries::from_series(series, m)?;
    join(
        &p,
        &p,
        Some(exclusion_half_width(m)),
        m,
        variant,
        k,
        JoinKind::SelfJoin,
    )
}

fn check_window(m: usize, n: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidWindow { m, n });
    }
    Ok(())
}

struct Block<T> {
    values: Vec<T>,
    indices: Vec<usize>,
    dims: Vec<usize>,
}

fn join<T: Scalar>(
    query: &PreparedSeries<T>,
    target: &PreparedSeries<T>,
    exclusion: Option<usize>,
    m: usize,
    variant: ProfileVariant,
    k: usize,
    kind: JoinKind,
) -> Result<MultidimProfile<T>> {
    let rows = query.count();
    let d = query.d();
    let width = variant.width(d);
    let starts: Vec<usize> = (0..rows).step_by(ROW_BLOCK).collect();
    let blocks = starts
        .par_iter()
        .map(|&start| {
            let end = (start + ROW_BLOCK).min(rows);
            join_block(query, target, exclusion, m, variant, k, start, end)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut values = Vec::with_capacity(rows * width);
    let mut indices = Vec::with_capacity(rows * width);
    let mut dims = Vec::new();
    for b in blocks {
        values.extend(b.values);
        indices.extend(b.indices);
        dims.extend(b.dims);
    }
    let source_dims = (variant.placement() == Placement::PostNeighbor)
        .then(|| Matrix::from_vec(rows, width, dims));
    Ok(MultidimProfile {
        values: Matrix::from_vec(rows, width, values),
        indices: Matrix::from_vec(rows, width, indices),
        source_dims,
        m,
        k,
        d,
        variant,
        join: kind,
    })
}

#[allow(clippy::too_many_arguments)]
fn join_block<T: Scalar>(
    query: &PreparedSeries<T>,
    target: &PreparedSeries<T>,
    exclusion: Option<usize>,
    m: usize,
    variant: ProfileVariant,
    k: usize,
    start: usize,
    end: usize,
) -> Result<Block<T>> {
    let d = query.d();
    let width = variant.width(d);
    let n_rows = end - start;
    let mut stream = RowStream::new(query, target, exclusion, start, end)?;
    let cols = stream.width();
    let mut dists = Matrix::filled(d, cols, T::zero());
    // Column-major reduced distances: rank column `l` lives at `l * cols..`.
    let mut reduced = vec![T::zero(); cols * width];
    let mut pair = vec![T::zero(); d];
    let mut hits: Vec<(T, usize, usize)> = Vec::with_capacity(d);
    let mut scratch = KnnScratch::default();

    let mut out = Block {
        values: Vec::with_capacity(n_rows * width),
        indices: Vec::with_capacity(n_rows * width),
        dims: Vec::new(),
    };

    while stream.next_into(&mut dists).is_some() {
        match variant.placement() {
            Placement::PreNeighbor => {
                match variant.reduction() {
                    Reduction::SortDescending => {
                        for j in 0..cols {
                            for (dim, p) in pair.iter_mut().enumerate() {
                                *p = dists[(dim, j)];
                            }
                            sort_descending(&mut pair);
                            for (l, &v) in pair.iter().enumerate() {
                                reduced[l * cols + j] = v;
                            }
                        }
                    }
                    Reduction::MaxOnly => {
                        reduced.copy_from_slice(dists.row(0));
                        for row in dists.iter_rows().skip(1) {
                            for (r, &v) in reduced.iter_mut().zip(row) {
                                *r = r.max(v);
                            }
                        }
                    }
                    Reduction::SumAllDims => {
                        reduced.fill(T::zero());
                        for row in dists.iter_rows() {
                            for (r, &v) in reduced.iter_mut().zip(row) {
                                *r += v * v;
                            }
                        }
                        reduced.iter_mut().for_each(|r| *r = r.sqrt());
                    }
                }
                for l in 0..width {
                    let column = &reduced[l * cols..(l + 1) * cols];
                    let (j, v) = select_kth(&KnnQuery::new(column, k, m), &mut scratch)?;
                    out.values.push(v);
                    out.indices.push(j);
                }
            }
            Placement::PostNeighbor => {
                hits.clear();
                for (dim, column) in dists.iter_rows().enumerate() {
                    let (j, v) = select_kth(&KnnQuery::new(column, k, m), &mut scratch)?;
                    hits.push((v, j, dim));
                }
                // Stable: equal distances keep ascending dimension order.
                hits.sort_by(|a, b| cmp_scalar(b.0, a.0));
                for &(v, j, dim) in hits.iter().take(width) {
                    out.values.push(v);
                    out.indices.push(j);
                    out.dims.push(dim);
                }
            }
        }
    }
    Ok(out)
}
