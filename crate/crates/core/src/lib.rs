// SPDX-License-Identifier: MIT OR Apache-2.0

//! Exact multidimensional Matrix Profile for time series anomaly detection.
//!
//! The crate computes z-normalized Euclidean distance rows in streaming
//! fashion, summarizes them into a multidimensional profile under the
//! pre-/post-neighbor placements with sort, max, or all-dimension
//! reductions, finds k-th nearest neighbors while respecting trivial-match
//! exclusion zones, and turns profiles into per-time-step anomaly scores for
//! unsupervised, supervised, and semi-supervised setups.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` / `*32` aliases at the crate root name the common instantiations.

#![forbid(unsafe_code)]

pub mod bench;
pub mod detect;
pub mod distance;
pub mod error;
pub mod io;
pub mod knn;
pub mod matrix;
pub mod metrics;
pub mod profile;
pub mod scalar;
pub mod series;
pub mod synth;

pub use detect::{
    detect_semisupervised, detect_supervised, detect_unsupervised, reverse_window,
    select_dimension, smooth_scores, DetectorConfig, DimSelect, LabelVector, ScoreVector, Setup,
    SupervisedOutcome,
};
pub use distance::{
    compute_window_stats, distance_profile_row, znorm_distance, DistanceProfileRow, RowStream,
    WindowStats,
};
pub use error::{Error, Result};
pub use knn::{
    apply_exclusion_zone, exclusion_half_width, find_knn, find_knn_brute, find_knn_naive_sort,
    find_knn_select, KnnAlgorithm, KnnQuery, KnnResult,
};
pub use matrix::Matrix;
pub use metrics::{auc_roc, evaluate, labels_to_ranges, range_pr_auc, AnomalyRange, EvalResult};
pub use profile::{
    mp_ab_join, mp_self_join, reduce_pair_vector, JoinKind, MultidimProfile, Placement,
    ProfileVariant, Reduction,
};
pub use scalar::Scalar;
pub use series::MultivariateSeries;

pub type Series64 = MultivariateSeries<f64>;
pub type Series32 = MultivariateSeries<f32>;
pub type WindowStats64 = WindowStats<f64>;
pub type WindowStats32 = WindowStats<f32>;
pub type Profile64 = MultidimProfile<f64>;
pub type Profile32 = MultidimProfile<f32>;
pub type Scores64 = ScoreVector<f64>;
pub type Scores32 = ScoreVector<f32>;
pub type Dataset64 = io::DatasetFile<f64>;
pub type Dataset32 = io::DatasetFile<f32>;
