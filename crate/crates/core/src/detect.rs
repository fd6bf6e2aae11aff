// SPDX-License-Identifier: MIT OR Apache-2.0

//! From profiles to per-time-step anomaly scores.
//!
//! Every setup shares the same tail: pick one profile column (or the mean of
//! all columns), smooth it with a centered moving average, then map the
//! per-subsequence scores back to time steps by averaging over every window
//! covering a step. What differs is the join:
//!
//! * unsupervised: self-join on the test series;
//! * semi-supervised: AB-join of the test series against the normal-only
//!   training series;
//! * supervised: self-join on `train ++ test`, repeated for each grid
//!   configuration, keeping the one with the best AUC-ROC on the labeled
//!   training region.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::auc_roc;
use crate::profile::{mp_ab_join, mp_self_join, MultidimProfile, ProfileVariant};
use crate::scalar::{cmp_scalar, Scalar};
use crate::series::MultivariateSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Setup {
    Unsupervised,
    Supervised,
    SemiSupervised,
}

impl Setup {
    pub fn name(self) -> &'static str {
        match self {
            Setup::Unsupervised => "unsupervised",
            Setup::Supervised => "supervised",
            Setup::SemiSupervised => "semisupervised",
        }
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which profile column becomes the anomaly score curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimSelect {
    FirstColumn,
    MeanColumns,
    Column(usize),
}

impl fmt::Display for DimSelect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimSelect::FirstColumn => f.write_str("first"),
            DimSelect::MeanColumns => f.write_str("mean"),
            DimSelect::Column(l) => write!(f, "{l}"),
        }
    }
}

impl FromStr for DimSelect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "first" => Ok(DimSelect::FirstColumn),
            "mean" => Ok(DimSelect::MeanColumns),
            _ => s
                .parse()
                .map(DimSelect::Column)
                .map_err(|_| format!("expected `first`, `mean` or a column index, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DetectorConfig {
    pub m: usize,
    pub k: usize,
    pub variant: ProfileVariant,
    pub dim_select: DimSelect,
    /// Moving-average width; `None` means `m`, `Some(0)` disables smoothing.
    pub smooth_window: Option<usize>,
    pub setup: Setup,
}

impl DetectorConfig {
    pub const DEFAULT_M: usize = 64;
    pub const DEFAULT_K_UNSUPERVISED: usize = 15;
    pub const DEFAULT_K_SEMISUPERVISED: usize = 1;

    /// m=64, k=15, pre-max, first column.
    pub fn unsupervised() -> Self {
        Self {
            m: Self::DEFAULT_M,
            k: Self::DEFAULT_K_UNSUPERVISED,
            variant: ProfileVariant::PRE_MAX,
            dim_select: DimSelect::FirstColumn,
            smooth_window: None,
            setup: Setup::Unsupervised,
        }
    }

    /// As [`unsupervised`](Self::unsupervised) but with k=1: clean training
    /// data has no repeated anomalies to defeat.
    pub fn semisupervised() -> Self {
        Self {
            k: Self::DEFAULT_K_SEMISUPERVISED,
            setup: Setup::SemiSupervised,
            ..Self::unsupervised()
        }
    }

    pub fn supervised() -> Self {
        Self {
            setup: Setup::Supervised,
            ..Self::unsupervised()
        }
    }

    pub fn for_setup(setup: Setup) -> Self {
        match setup {
            Setup::Unsupervised => Self::unsupervised(),
            Setup::Supervised => Self::supervised(),
            Setup::SemiSupervised => Self::semisupervised(),
        }
    }

    pub fn smoothing(&self) -> usize {
        self.smooth_window.unwrap_or(self.m)
    }

    pub const GRID_M: [usize; 4] = [16, 32, 64, 128];
    pub const GRID_K: [usize; 3] = [1, 5, 15];
    pub const GRID_VARIANTS: [ProfileVariant; 2] =
        [ProfileVariant::PRE_MAX, ProfileVariant::POST_MAX];

    /// The cross product of [`GRID_M`](Self::GRID_M), [`GRID_K`](Self::GRID_K)
    /// and [`GRID_VARIANTS`](Self::GRID_VARIANTS).
    pub fn default_supervised_grid() -> Vec<Self> {
        Self::supervised_grid(&Self::GRID_M, &Self::GRID_K, &Self::GRID_VARIANTS)
    }

    pub fn supervised_grid(ms: &[usize], ks: &[usize], variants: &[ProfileVariant]) -> Vec<Self> {
        let mut grid = Vec::with_capacity(ms.len() * ks.len() * variants.len());
        for &m in ms {
            for &k in ks {
                for &variant in variants {
                    grid.push(Self {
                        m,
                        k,
                        variant,
                        ..Self::supervised()
                    });
                }
            }
        }
        grid
    }
}

impl fmt::Display for DetectorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "setup={} m={} k={} variant={} dim={} smooth={}",
            self.setup,
            self.m,
            self.k,
            self.variant,
            self.dim_select,
            self.smoothing()
        )
    }
}

/// One anomaly score per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector<T> {
    scores: Vec<T>,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(scores: Vec<T>) -> Self {
        Self { scores }
    }

    pub fn into_inner(self) -> Vec<T> {
        self.scores
    }

    /// Index of the highest score; the first one on ties.
    pub fn argmax(&self) -> Option<usize> {
        argmax(&self.scores)
    }
}

impl<T> Deref for ScoreVector<T> {
    type Target = [T];

    fn deref(&self) -> &[T] {
        &self.scores
    }
}

/// Ground-truth anomaly flags, one per time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector(pub Vec<bool>);

impl LabelVector {
    pub fn positives(&self) -> usize {
        self.0.iter().filter(|&&l| l).count()
    }
}

impl Deref for LabelVector {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

pub(crate) fn argmax<T: Scalar>(v: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if best.is_none_or(|b| cmp_scalar(x, v[b]).is_gt()) {
            best = Some(i);
        }
    }
    best
}

/// Reduces a profile to a single score curve over subsequences.
pub fn select_dimension<T: Scalar>(
    profile: &MultidimProfile<T>,
    strategy: DimSelect,
) -> Result<Vec<T>> {
    match strategy {
        DimSelect::FirstColumn => profile.column(0),
        DimSelect::Column(l) => profile.column(l),
        DimSelect::MeanColumns => {
            if profile.width() < profile.d {
                return Err(Error::RankOutOfRange {
                    rank: profile.d - 1,
                    available: profile.width(),
                });
            }
            let w = T::of_usize(profile.width());
            Ok(profile
                .values
                .iter_rows()
                .map(|row| row.iter().copied().sum::<T>() / w)
                .collect())
        }
    }
}

fn prefix_sums<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(v.len() + 1);
    let mut acc = T::zero();
    out.push(acc);
    for &x in v {
        acc += x;
        out.push(acc);
    }
    out
}

/// Centered moving average of width `w`, averaging only the in-bounds part
/// of the window at the edges. For even `w` the window extends one step
/// further to the right. `w` of 0 or 1 returns the input.
pub fn smooth_scores<T: Scalar>(v: &[T], w: usize) -> Vec<T> {
    if w <= 1 || v.is_empty() {
        return v.to_vec();
    }
    let left = (w - 1) / 2;
    let right = w / 2;
    let prefix = prefix_sums(v);
    (0..v.len())
        .map(|t| {
            let lo = t.saturating_sub(left);
            let hi = (t + right + 1).min(v.len());
            (prefix[hi] - prefix[lo]) / T::of_usize(hi - lo)
        })
        .collect()
}

/// Maps `n - m + 1` subsequence scores to `n` time-step scores: each step
/// gets the mean over all windows that cover it.
pub fn reverse_window<T: Scalar>(
    profile_scores: &[T],
    n: usize,
    m: usize,
) -> Result<ScoreVector<T>> {
    if m == 0 || m > n || profile_scores.len() != n - m + 1 {
        return Err(Error::LengthMismatch {
            expected: n.saturating_sub(m.max(1)) + 1,
            actual: profile_scores.len(),
        });
    }
    let prefix = prefix_sums(profile_scores);
    let last = n - m;
    let scores = (0..n)
        .map(|t| {
            let lo = (t + 1).saturating_sub(m);
            let hi = t.min(last) + 1;
            (prefix[hi] - prefix[lo]) / T::of_usize(hi - lo)
        })
        .collect();
    Ok(ScoreVector::new(scores))
}

/// Column selection plus smoothing, at subsequence resolution.
fn score_profile<T: Scalar>(profile: &MultidimProfile<T>, cfg: &DetectorConfig) -> Result<Vec<T>> {
    let curve = select_dimension(profile, cfg.dim_select)?;
    Ok(smooth_scores(&curve, cfg.smoothing()))
}

/// Self-join on the test series.
pub fn detect_unsupervised<T: Scalar>(
    test: &MultivariateSeries<T>,
    cfg: &DetectorConfig,
) -> Result<ScoreVector<T>> {
    let profile = mp_self_join(test, cfg.m, cfg.variant, cfg.k)?;
    let curve = score_profile(&profile, cfg)?;
    reverse_window(&curve, test.n(), cfg.m)
}

/// AB-join with the test series as query and the training series as target.
pub fn detect_semisupervised<T: Scalar>(
    train: &MultivariateSeries<T>,
    test: &MultivariateSeries<T>,
    cfg: &DetectorConfig,
) -> Result<ScoreVector<T>> {
    let profile = mp_ab_join(test, train, cfg.m, cfg.variant, cfg.k)?;
    let curve = score_profile(&profile, cfg)?;
    reverse_window(&curve, test.n(), cfg.m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedOutcome<T> {
    pub scores: ScoreVector<T>,
    pub chosen: DetectorConfig,
    /// AUC-ROC of the chosen configuration on the training region.
    pub train_metric: f64,
}

struct Candidate<T> {
    train_metric: f64,
    test_scores: ScoreVector<T>,
}

/// Scores one configuration on `train ++ test`. Profile rows are attributed
/// to the region their window starts in, so the `m - 1` windows straddling
/// the boundary count toward the training region.
fn evaluate_candidate<T: Scalar>(
    joined: &MultivariateSeries<T>,
    n_train: usize,
    labels: &[bool],
    cfg: &DetectorConfig,
) -> Result<Candidate<T>> {
    let n_test = joined.n() - n_train;
    if n_test < cfg.m {
        return Err(Error::SeriesTooShort {
            n: n_test,
            required: cfg.m,
        });
    }
    let profile = mp_self_join(joined, cfg.m, cfg.variant, cfg.k)?;
    let curve = select_dimension(&profile, cfg.dim_select)?;
    let (train_rows, test_rows) = curve.split_at(n_train);

    let train_smooth = smooth_scores(train_rows, cfg.smoothing());
    let mut train_scores = reverse_window(&train_smooth, n_train + cfg.m - 1, cfg.m)?.into_inner();
    train_scores.truncate(n_train);
    let train_metric = auc_roc(&train_scores, labels)?;

    let test_smooth = smooth_scores(test_rows, cfg.smoothing());
    let test_scores = reverse_window(&test_smooth, n_test, cfg.m)?;
    Ok(Candidate {
        train_metric,
        test_scores,
    })
}

/// Grid search on the labeled training series, then scoring of the test
/// series with the winning configuration.
///
/// Grid points the data cannot support (window or k too large) are skipped;
/// if none is feasible, the first such error is returned. Ties in training
/// AUC-ROC go to the earlier grid entry.
pub fn detect_supervised<T: Scalar>(
    train: &MultivariateSeries<T>,
    train_labels: &LabelVector,
    test: &MultivariateSeries<T>,
    grid: &[DetectorConfig],
) -> Result<SupervisedOutcome<T>> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if train_labels.len() != train.n() {
        return Err(Error::LengthMismatch {
            expected: train.n(),
            actual: train_labels.len(),
        });
    }
    if train_labels.positives() == 0 {
        return Err(Error::NoAnomalyInTrainLabels);
    }
    let joined = train.concat(test)?;
    let results: Vec<Result<Candidate<T>>> = grid
        .par_iter()
        .map(|cfg| evaluate_candidate(&joined, train.n(), train_labels, cfg))
        .collect();

    let mut best: Option<(usize, Candidate<T>)> = None;
    let mut first_err = None;
    for (idx, res) in results.into_iter().enumerate() {
        match res {
            Ok(c) => {
                if best
                    .as_ref()
                    .is_none_or(|(_, b)| c.train_metric > b.train_metric)
                {
                    best = Some((idx, c));
                }
            }
            Err(e) if e.is_infeasible_config() => {
                first_err.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match best {
        Some((idx, c)) => Ok(SupervisedOutcome {
            scores: c.test_scores,
            chosen: grid[idx],
            train_metric: c.train_metric,
        }),
        None => Err(first_err.unwrap_or(Error::EmptyGrid)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::profile::JoinKind;

    fn profile_with(
        values: Matrix<f64>,
        d: usize,
        variant: ProfileVariant,
    ) -> MultidimProfile<f64> {
        let rows = values.rows();
        let cols = values.cols();
        MultidimProfile {
            values,
            indices: Matrix::filled(rows, cols, 0),
            source_dims: None,
            m: 4,
            k: 1,
            d,
            variant,
            join: JoinKind::SelfJoin,
        }
    }

    #[test]
    fn defaults() {
        let u = DetectorConfig::unsupervised();
        assert_eq!(
            (u.m, u.k, u.variant, u.dim_select),
            (64, 15, ProfileVariant::PRE_MAX, DimSelect::FirstColumn)
        );
        assert_eq!(u.smoothing(), 64);
        let s = DetectorConfig::semisupervised();
        assert_eq!((s.m, s.k, s.variant), (64, 1, ProfileVariant::PRE_MAX));
        assert_eq!(
            u.to_string(),
            "setup=unsupervised m=64 k=15 variant=pre-max dim=first smooth=64"
        );
        assert_eq!(DetectorConfig::default_supervised_grid().len(), 24);
    }

    #[test]
    fn dim_select_parsing() {
        assert_eq!(
            "first".parse::<DimSelect>().unwrap(),
            DimSelect::FirstColumn
        );
        assert_eq!("mean".parse::<DimSelect>().unwrap(), DimSelect::MeanColumns);
        assert_eq!("2".parse::<DimSelect>().unwrap(), DimSelect::Column(2));
        assert!("second".parse::<DimSelect>().is_err());
    }

    #[test]
    fn select_on_constant_rows() {
        let rows = 5;
        let mut data = Vec::new();
        for _ in 0..rows {
            data.extend([4.0, 2.0, 0.0]);
        }
        let p = profile_with(Matrix::from_vec(rows, 3, data), 3, ProfileVariant::PRE_SORT);
        assert_eq!(
            select_dimension(&p, DimSelect::FirstColumn).unwrap(),
            vec![4.0; 5]
        );
        assert_eq!(
            select_dimension(&p, DimSelect::MeanColumns).unwrap(),
            vec![2.0; 5]
        );
        assert_eq!(
            select_dimension(&p, DimSelect::Column(2)).unwrap(),
            vec![0.0; 5]
        );
        assert!(matches!(
            select_dimension(&p, DimSelect::Column(3)),
            Err(Error::RankOutOfRange {
                rank: 3,
                available: 3
            })
        ));
    }

    #[test]
    fn select_single_dimension() {
        let p = profile_with(
            Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]),
            1,
            ProfileVariant::PRE_MAX,
        );
        for s in [
            DimSelect::FirstColumn,
            DimSelect::MeanColumns,
            DimSelect::Column(0),
        ] {
            assert_eq!(select_dimension(&p, s).unwrap(), vec![1.0, 2.0, 3.0]);
        }
        let p = profile_with(
            Matrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]),
            4,
            ProfileVariant::PRE_MAX,
        );
        assert!(matches!(
            select_dimension(&p, DimSelect::MeanColumns),
            Err(Error::RankOutOfRange { .. })
        ));
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(
            smooth_scores(&[0.0, 0.0, 9.0, 0.0, 0.0], 3),
            vec![0.0, 3.0, 3.0, 3.0, 0.0]
        );
        let v = vec![1.0, 5.0, -2.0];
        assert_eq!(smooth_scores(&v, 0), v);
        assert_eq!(smooth_scores(&v, 1), v);
        // Even width: one extra step to the right.
        assert_eq!(
            smooth_scores(&[0.0, 4.0, 0.0, 0.0], 2),
            vec![2.0, 2.0, 0.0, 0.0]
        );
    }

    #[test]
    fn reverse_window_examples() {
        let s = reverse_window(&[3.5; 7], 10, 4).unwrap();
        assert_eq!(s.len(), 10);
        assert!(s.iter().all(|&v| v == 3.5));
        let (a, b, c) = (1.0, 4.0, 10.0);
        let s = reverse_window(&[a, b, c], 4, 2).unwrap();
        assert_eq!(&*s, &[a, (a + b) / 2.0, (b + c) / 2.0, c]);
        assert!(matches!(
            reverse_window(&[1.0, 2.0], 4, 2),
            Err(Error::LengthMismatch {
                expected: 3,
                actual: 2
            })
        ));
    }

    #[test]
    fn supervised_input_checks() {
        let s = MultivariateSeries::univariate((0..100).map(|i| (i as f64 * 0.4).sin()).collect())
            .unwrap();
        let labels = LabelVector(vec![false; 100]);
        let grid = [DetectorConfig {
            m: 8,
            k: 1,
            ..DetectorConfig::supervised()
        }];
        assert!(matches!(
            detect_supervised(&s, &labels, &s, &grid),
            Err(Error::NoAnomalyInTrainLabels)
        ));
        assert!(matches!(
            detect_supervised(&s, &labels, &s, &[]),
            Err(Error::EmptyGrid)
        ));
        assert!(matches!(
            detect_supervised(&s, &LabelVector(vec![true; 3]), &s, &grid),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
