// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact z-normalized Euclidean distance kernels.
//!
//! A join never materializes the `(n1-m+1) x (n2-m+1) x d` distance tensor.
//! Instead a [`RowStream`] walks query offsets in order and keeps one sliding
//! dot product per (target offset, dimension), so each subsequent row costs
//! `O(n2 * d)`. Dot products are taken on column-mean-centered copies of the
//! data to keep cancellation in `QT - m * mu_q * mu_t` small, and are
//! recomputed from scratch every [`REFRESH_INTERVAL`] rows to bound drift.
//! Near-identical pairs, where the square root would magnify that drift, are
//! recomputed directly from their windows.

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::series::MultivariateSeries;

/// Rows between full dot-product recomputations in a [`RowStream`].
pub const REFRESH_INTERVAL: usize = 4096;

/// Relative tolerance below which a window's standard deviation counts as zero.
/// Narrow types use at least four machine epsilons instead.
pub const FLAT_TOLERANCE: f64 = 1e-8;

/// Pairs with `1 - corr` below `epsilon^(1/3)` (about 6e-6 for `f64`) are
/// recomputed from the z-normalized values, since `sqrt(2m(1 - corr))`
/// magnifies rounding in `corr` near zero.
#[inline]
fn near_match_gap<T: Scalar>() -> T {
    T::epsilon().cbrt()
}

#[inline]
fn is_flat<T: Scalar>(std: T, mean: T) -> bool {
    let tol = T::of(FLAT_TOLERANCE).max(T::epsilon() * T::of(4.0));
    std < tol * mean.abs().max(T::one())
}

/// Sliding means and population standard deviations of every length-`m`
/// window, per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowStats<T> {
    m: usize,
    count: usize,
    means: Vec<Vec<T>>,
    stds: Vec<Vec<T>>,
    flat: Vec<Vec<bool>>,
}

impl<T: Scalar> WindowStats<T> {
    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of windows, `n - m + 1`.
    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.means.len()
    }

    #[inline]
    pub fn mean(&self, i: usize, j: usize) -> T {
        self.means[j][i]
    }

    #[inline]
    pub fn std(&self, i: usize, j: usize) -> T {
        self.stds[j][i]
    }

    #[inline]
    pub fn is_flat(&self, i: usize, j: usize) -> bool {
        self.flat[j][i]
    }

    pub fn means_of(&self, j: usize) -> &[T] {
        &self.means[j]
    }

    pub fn stds_of(&self, j: usize) -> &[T] {
        &self.stds[j]
    }

    pub fn flat_of(&self, j: usize) -> &[bool] {
        &self.flat[j]
    }

    /// `(n-m+1) x d` matrix of window means.
    pub fn means(&self) -> Matrix<T> {
        self.to_matrix(&self.means)
    }

    /// `(n-m+1) x d` matrix of window standard deviations.
    pub fn stds(&self) -> Matrix<T> {
        self.to_matrix(&self.stds)
    }

    fn to_matrix(&self, cols: &[Vec<T>]) -> Matrix<T> {
        let d = cols.len();
        let mut out = Matrix::filled(self.count, d, T::zero());
        for (j, col) in cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

/// Computes window statistics for every offset and dimension.
///
/// Means use a running sum that is re-seeded every [`REFRESH_INTERVAL`]
/// windows and refined by one residual pass; variances are taken two-pass
/// around that mean, so they are never negative and constant windows come out
/// as exactly zero.
pub fn compute_window_stats<T: Scalar>(
    series: &MultivariateSeries<T>,
    m: usize,
) -> Result<WindowStats<T>> {
    let n = series.n();
    if m < 1 || m > n {
        return Err(Error::InvalidWindow { m, n });
    }
    let count = n - m + 1;
    let mf = T::of_usize(m);
    let mut means = Vec::with_capacity(series.d());
    let mut stds = Vec::with_capacity(series.d());
    let mut flat = Vec::with_capacity(series.d());
    for j in 0..series.d() {
        let x = series.dim(j);
        let mut mu = vec![T::zero(); count];
        let mut sd = vec![T::zero(); count];
        let mut fl = vec![false; count];
        let mut sum = T::zero();
        for i in 0..count {
            if i % REFRESH_INTERVAL == 0 {
                sum = x[i..i + m].iter().copied().sum();
            } else {
                sum += x[i + m - 1] - x[i - 1];
            }
            // One correction pass pins the mean of a constant window exactly.
            let rough = sum / mf;
            let mean = rough + x[i..i + m].iter().map(|&v| v - rough).sum::<T>() / mf;
            let var = x[i..i + m]
                .iter()
                .map(|&v| (v - mean) * (v - mean))
                .sum::<T>()
                / mf;
            let std = var.sqrt();
            mu[i] = mean;
            sd[i] = std;
            fl[i] = is_flat(std, mean);
        }
        means.push(mu);
        stds.push(sd);
        flat.push(fl);
    }
    Ok(WindowStats {
        m,
        count,
        means,
        stds,
        flat,
    })
}

/// Z-normalized Euclidean distance between two equal-length subsequences,
/// computed directly from the definition (population standard deviation).
///
/// Flat windows: both flat gives 0, exactly one flat gives `sqrt(m)`.
pub fn znorm_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidWindow { m, n: b.len() });
    }
    if b.len() != m {
        return Err(Error::LengthMismatch {
            expected: m,
            actual: b.len(),
        });
    }
    let mf = T::of_usize(m);
    let moments = |x: &[T]| {
        let mean = x.iter().copied().sum::<T>() / mf;
        let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / mf;
        (mean, var.sqrt())
    };
    let (ma, sa) = moments(a);
    let (mb, sb) = moments(b);
    match (is_flat(sa, ma), is_flat(sb, mb)) {
        (true, true) => Ok(T::zero()),
        (true, false) | (false, true) => Ok(mf.sqrt()),
        (false, false) => Ok(a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                let diff = (x - ma) / sa - (y - mb) / sb;
                diff * diff
            })
            .sum::<T>()
            .sqrt()),
    }
}

/// One query's slice `D[i, :, :]` of the distance tensor: an
/// `(n2-m+1) x d` matrix. Excluded offsets hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfileRow<T> {
    pub query_index: usize,
    pub dists: Matrix<T>,
}

/// A series re-expressed around its column means, paired with the window
/// statistics the distance conversion needs. Shared read-only by every
/// [`RowStream`] of a join.
#[derive(Debug, Clone)]
pub struct PreparedSeries<T> {
    m: usize,
    count: usize,
    centered: Vec<Vec<T>>,
    /// Window means of the centered data.
    means: Vec<Vec<T>>,
    stds: Vec<Vec<T>>,
    /// `1 / std`, zero for flat windows.
    inv_stds: Vec<Vec<T>>,
    flat: Vec<Vec<bool>>,
    flat_offsets: Vec<Vec<usize>>,
}

impl<T: Scalar> PreparedSeries<T> {
    pub fn new(series: &MultivariateSeries<T>, stats: &WindowStats<T>) -> Result<Self> {
        if stats.count() + stats.m() != series.n() + 1 || stats.d() != series.d() {
            return Err(Error::InvalidSeries(
                "window statistics do not belong to this series".into(),
            ));
        }
        let n = T::of_usize(series.n());
        let d = series.d();
        let mut centered = Vec::with_capacity(d);
        let mut means = Vec::with_capacity(d);
        let mut inv_stds = Vec::with_capacity(d);
        let mut flat_offsets = Vec::with_capacity(d);
        for j in 0..d {
            let col = series.dim(j);
            let offset = col.iter().copied().sum::<T>() / n;
            centered.push(col.iter().map(|&v| v - offset).collect());
            means.push(stats.means_of(j).iter().map(|&v| v - offset).collect());
            let flat = stats.flat_of(j);
            inv_stds.push(
                stats
                    .stds_of(j)
                    .iter()
                    .zip(flat)
                    .map(|(&sd, &f)| if f { T::zero() } else { sd.recip() })
                    .collect(),
            );
            flat_offsets.push(
                flat.iter()
                    .enumerate()
                    .filter(|(_, &f)| f)
                    .map(|(i, _)| i)
                    .collect(),
            );
        }
        Ok(Self {
            m: stats.m(),
            count: stats.count(),
            centered,
            means,
            stds: stats.stds.clone(),
            inv_stds,
            flat: stats.flat.clone(),
            flat_offsets,
        })
    }

    /// Computes stats and prepares in one step.
    pub fn from_series(series: &MultivariateSeries<T>, m: usize) -> Result<Self> {
        let stats = compute_window_stats(series, m)?;
        Self::new(series, &stats)
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.centered.len()
    }
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Streams distance rows `D[i, :, :]` for consecutive query offsets.
///
/// Holds `O(n2 * d)` state. The first row (and every [`REFRESH_INTERVAL`]-th
/// row after it) is computed with direct dot products; the rest are derived
/// from the previous row's dot products in `O(1)` per entry.
///
/// Rows are written dimension-major: row `k` of the output matrix is the
/// distance profile of dimension `k` over all target offsets.
pub struct RowStream<'a, T> {
    query: &'a PreparedSeries<T>,
    target: &'a PreparedSeries<T>,
    /// `Some(half_width)` for a self-join.
    exclusion: Option<usize>,
    next: usize,
    end: usize,
    since_refresh: usize,
    primed: bool,
    qt: Vec<Vec<T>>,
    spare: Vec<T>,
}

impl<'a, T: Scalar> RowStream<'a, T> {
    /// Streams rows `start..end`. `exclusion` is the trivial-match half-width
    /// and must be set only when `query` and `target` are the same series.
    pub fn new(
        query: &'a PreparedSeries<T>,
        target: &'a PreparedSeries<T>,
        exclusion: Option<usize>,
        start: usize,
        end: usize,
    ) -> Result<Self> {
        if query.m != target.m {
            return Err(Error::StatsMismatch {
                stats: target.m,
                requested: query.m,
            });
        }
        if query.d() != target.d() {
            return Err(Error::DimMismatch {
                left: query.d(),
                right: target.d(),
            });
        }
        if end > query.count || start > end {
            return Err(Error::OffsetOutOfRange {
                offset: end.max(start),
                count: query.count,
            });
        }
        Ok(Self {
            query,
            target,
            exclusion,
            next: start,
            end,
            since_refresh: 0,
            primed: false,
            qt: vec![vec![T::zero(); target.count]; target.d()],
            spare: vec![T::zero(); target.count],
        })
    }

    /// Number of target offsets, i.e. columns of each produced matrix.
    pub fn width(&self) -> usize {
        self.target.count
    }

    fn refresh(&mut self, i: usize) {
        let m = self.query.m;
        for (k, qt) in self.qt.iter_mut().enumerate() {
            let q = &self.query.centered[k][i..i + m];
            let t = &self.target.centered[k];
            for (j, v) in qt.iter_mut().enumerate() {
                *v = dot(q, &t[j..j + m]);
            }
        }
        self.since_refresh = 0;
    }

    fn advance(&mut self, i: usize) {
        let m = self.query.m;
        for (k, qt) in self.qt.iter_mut().enumerate() {
            let q = &self.query.centered[k];
            let t = &self.target.centered[k];
            let drop_q = q[i - 1];
            let add_q = q[i + m - 1];
            let next = &mut self.spare;
            next[0] = dot(&q[i..i + m], &t[..m]);
            for (((out, &prev), &t_old), &t_new) in next[1..]
                .iter_mut()
                .zip(qt.iter())
                .zip(t.iter())
                .zip(&t[m..])
            {
                *out = prev - drop_q * t_old + add_q * t_new;
            }
            std::mem::swap(qt, next);
        }
        self.since_refresh += 1;
    }

    /// Writes the next row into `out` (`d x width()`) and returns its query
    /// offset, or `None` once the range is exhausted.
    pub fn next_into(&mut self, out: &mut Matrix<T>) -> Option<usize> {
        let i = self.next;
        if i >= self.end {
            return None;
        }
        debug_assert_eq!(out.rows(), self.target.d());
        debug_assert_eq!(out.cols(), self.target.count);
        if !self.primed || self.since_refresh + 1 >= REFRESH_INTERVAL {
            self.refresh(i);
            self.primed = true;
        } else {
            self.advance(i);
        }
        self.next += 1;
        self.fill_distances(i, out);
        Some(i)
    }

    fn direct_distance(&self, k: usize, i: usize, j: usize) -> T {
        let m = self.query.m;
        let (mu_q, sd_q) = (self.query.means[k][i], self.query.stds[k][i]);
        let (mu_t, sd_t) = (self.target.means[k][j], self.target.stds[k][j]);
        let q = &self.query.centered[k][i..i + m];
        let t = &self.target.centered[k][j..j + m];
        q.iter()
            .zip(t)
            .map(|(&x, &y)| {
                let diff = (x - mu_q) / sd_q - (y - mu_t) / sd_t;
                diff * diff
            })
            .sum::<T>()
            .sqrt()
    }

    fn fill_distances(&self, i: usize, out: &mut Matrix<T>) {
        let m = T::of_usize(self.query.m);
        let two_m = m + m;
        let sqrt_m = m.sqrt();
        let near_gap = near_match_gap::<T>();
        let (one, minus_one) = (T::one(), -T::one());
        for k in 0..self.query.d() {
            let row = out.row_mut(k);
            let flat_t = &self.target.flat[k];
            if self.query.flat[k][i] {
                for (v, &f) in row.iter_mut().zip(flat_t) {
                    *v = if f { T::zero() } else { sqrt_m };
                }
                continue;
            }
            let mu_q = self.query.means[k][i];
            let scale = self.query.inv_stds[k][i] / m;
            let m_mu_q = m * mu_q;
            let mu_t = &self.target.means[k];
            let inv_t = &self.target.inv_stds[k];
            let mut near = false;
            for (((v, &qt), &mt), &it) in row.iter_mut().zip(&self.qt[k]).zip(mu_t).zip(inv_t) {
                // Flat targets have a zero inverse and are patched below.
                let corr = (qt - m_mu_q * mt) * scale * it;
                let gap = one - corr.min(one).max(minus_one);
                near |= gap < near_gap;
                *v = (two_m * gap).sqrt();
            }
            if near {
                for j in 0..row.len() {
                    if row[j] * row[j] < two_m * near_gap && !flat_t[j] {
                        row[j] = self.direct_distance(k, i, j);
                    }
                }
            }
            for &j in &self.target.flat_offsets[k] {
                row[j] = sqrt_m;
            }
        }
        if let Some(h) = self.exclusion {
            let lo = i.saturating_sub(h - 1);
            let hi = (i + h).min(self.target.count);
            for k in 0..self.query.d() {
                out.row_mut(k)[lo..hi].fill(T::infinity());
            }
        }
    }
}

/// Exact distance row for a single query offset.
///
/// `exclusion` must be `Some(half_width)` iff `query` and `target` are the
/// same series (self-join); offsets `|j - i| < half_width` become `+inf`.
pub fn distance_profile_row<T: Scalar>(
    query: &MultivariateSeries<T>,
    i: usize,
    target: &MultivariateSeries<T>,
    stats_q: &WindowStats<T>,
    stats_t: &WindowStats<T>,
    m: usize,
    exclusion: Option<usize>,
) -> Result<DistanceProfileRow<T>> {
    for stats in [stats_q, stats_t] {
        if stats.m() != m {
            return Err(Error::StatsMismatch {
                stats: stats.m(),
                requested: m,
            });
        }
    }
    if m < 2 {
        return Err(Error::InvalidWindow { m, n: query.n() });
    }
    if i >= stats_q.count() {
        return Err(Error::OffsetOutOfRange {
            offset: i,
            count: stats_q.count(),
        });
    }
    let q = PreparedSeries::new(query, stats_q)?;
    let t = PreparedSeries::new(target, stats_t)?;
    let mut stream = RowStream::new(&q, &t, exclusion, i, i + 1)?;
    let mut by_dim = Matrix::filled(t.d(), t.count(), T::zero());
    stream.next_into(&mut by_dim);
    let mut dists = Matrix::filled(t.count(), t.d(), T::zero());
    for (k, row) in by_dim.iter_rows().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            dists[(j, k)] = v;
        }
    }
    Ok(DistanceProfileRow {
        query_index: i,
        dists,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_flat() {
        let s = MultivariateSeries::univariate(vec![5.0f64; 10]).unwrap();
        let st = compute_window_stats(&s, 4).unwrap();
        assert_eq!(st.count(), 7);
        for i in 0..7 {
            assert_eq!(st.mean(i, 0), 5.0);
            assert_eq!(st.std(i, 0), 0.0);
            assert!(st.is_flat(i, 0));
        }
    }

    #[test]
    fn hand_computed_stats() {
        let s = MultivariateSeries::univariate(vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        let st = compute_window_stats(&s, 2).unwrap();
        assert_eq!(st.means_of(0), &[1.5, 2.5, 3.5]);
        assert_eq!(st.stds_of(0), &[0.5, 0.5, 0.5]);
    }

    #[test]
    fn invalid_window() {
        let s = MultivariateSeries::univariate(vec![1.0f64, 2.0, 3.0]).unwrap();
        assert!(matches!(
            compute_window_stats(&s, 0),
            Err(Error::InvalidWindow { m: 0, n: 3 })
        ));
        assert!(matches!(
            compute_window_stats(&s, 4),
            Err(Error::InvalidWindow { m: 4, n: 3 })
        ));
    }

    #[test]
    fn znorm_examples() {
        let d = znorm_distance(&[1.0f64, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert!(d.abs() < 1e-12);
        let a = [0.3f64, -1.0, 2.5, 0.7];
        assert!(znorm_distance(&a, &a).unwrap().abs() < 1e-12);
        let d = znorm_distance(&[0.0f64, 1.0, 0.0, 1.0], &[1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!((d - 4.0).abs() < 1e-12);
        assert!(matches!(
            znorm_distance(&[1.0f64], &[1.0]),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn flat_convention() {
        let flat = [2.0f64; 4];
        let other = [2.0f64, 1.0, 0.0, 1.0];
        assert_eq!(znorm_distance(&flat, &flat).unwrap(), 0.0);
        assert_eq!(znorm_distance(&flat, &other).unwrap(), 2.0);
        assert_eq!(znorm_distance(&other, &flat).unwrap(), 2.0);
    }

    #[test]
    fn self_join_diagonal_is_excluded() {
        let vals: Vec<f64> = (0..40).map(|i| ((i * 7919) % 13) as f64).collect();
        let s = MultivariateSeries::from_columns(vec![
            vals.clone(),
            vals.iter().map(|v| v * v).collect(),
        ])
        .unwrap();
        let st = compute_window_stats(&s, 6).unwrap();
        for i in [0, 5, 34] {
            let row = distance_profile_row(&s, i, &s, &st, &st, 6, Some(3)).unwrap();
            for k in 0..2 {
                assert!(row.dists[(i, k)].is_infinite());
            }
        }
    }

    #[test]
    fn stats_mismatch() {
        let s = MultivariateSeries::univariate((0..20).map(|i| i as f64).collect()).unwrap();
        let st = compute_window_stats(&s, 4).unwrap();
        assert!(matches!(
            distance_profile_row(&s, 0, &s, &st, &st, 5, None),
            Err(Error::StatsMismatch {
                stats: 4,
                requested: 5
            })
        ));
    }
}
