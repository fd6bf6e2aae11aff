// SPDX-License-Identifier: MIT OR Apache-2.0

//! Wall-clock benchmarks for the profile variants and the kNN algorithms.
//!
//! Variant timings run on a single-thread pool so the measured scaling is the
//! algorithm's, not the scheduler's. Inputs are i.i.d. Gaussian series drawn
//! from a seeded ChaCha8 generator.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::knn::{find_knn, KnnAlgorithm, KnnQuery};
use crate::profile::{mp_ab_join, ProfileVariant};
use crate::series::MultivariateSeries;

pub const VARIANT_BENCH_M: usize = 64;
pub const VARIANT_BENCH_K: usize = 1;
pub const KNN_BENCH_M: usize = 16;
pub const KNN_BENCH_QUERIES: usize = 16;
pub const KNN_BENCH_DIMS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantTiming {
    pub variant: ProfileVariant,
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub mean_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnTiming {
    pub algorithm: KnnAlgorithm,
    pub k: usize,
    pub n2: usize,
    pub trials: usize,
    pub mean_secs: f64,
}

/// Grids for one run of the variant experiment: an `n` sweep at fixed `d` and
/// a `d` sweep at fixed `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantPlan {
    pub n_sweep: Vec<usize>,
    pub n_sweep_d: usize,
    pub d_sweep: Vec<usize>,
    pub d_sweep_n: usize,
    pub trials: usize,
}

impl VariantPlan {
    pub fn desk() -> Self {
        Self {
            n_sweep: vec![512, 1024, 2048, 4096],
            n_sweep_d: 8,
            d_sweep: vec![2, 8, 32, 64],
            d_sweep_n: 1024,
            trials: 2,
        }
    }

    pub fn full() -> Self {
        Self {
            n_sweep: vec![512, 1024, 2048, 4096],
            n_sweep_d: 64,
            d_sweep: vec![2, 4, 8, 16, 32, 64],
            d_sweep_n: 4096,
            trials: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnnPlan {
    pub k_grid: Vec<usize>,
    pub n2_grid: Vec<usize>,
    pub trials: usize,
}

impl KnnPlan {
    pub fn desk() -> Self {
        Self {
            k_grid: vec![4, 16, 64],
            n2_grid: vec![1 << 14, 1 << 16, 1 << 18],
            trials: 3,
        }
    }

    pub fn full() -> Self {
        Self {
            k_grid: vec![1, 2, 4, 8, 16, 32, 64],
            n2_grid: (10..=18).step_by(2).map(|e| 1usize << e).collect(),
            trials: 100,
        }
    }
}

fn gaussian_series(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<MultivariateSeries<f64>> {
    let columns = (0..d)
        .map(|_| (0..n).map(|_| rng.sample(StandardNormal)).collect())
        .collect();
    MultivariateSeries::from_columns(columns)
}

fn single_thread<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("a one-thread pool can always be built")
        .install(f)
}

fn mean_secs(total: Duration, trials: usize) -> f64 {
    total.as_secs_f64() / trials as f64
}

/// Mean AB-join time per (variant, n, d) over `trials` fresh random series pairs.
pub fn bench_variants(
    n_grid: &[usize],
    d_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<VariantTiming>> {
    let trials = trials.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &n in n_grid {
        for &d in d_grid {
            let mut totals = [Duration::ZERO; ProfileVariant::ALL.len()];
            for _ in 0..trials {
                let a = gaussian_series(&mut rng, n, d)?;
                let b = gaussian_series(&mut rng, n, d)?;
                for (total, variant) in totals.iter_mut().zip(ProfileVariant::ALL) {
                    let start = Instant::now();
                    single_thread(|| {
                        mp_ab_join(&a, &b, VARIANT_BENCH_M, variant, VARIANT_BENCH_K)
                    })?;
                    *total += start.elapsed();
                }
            }
            out.extend(
                ProfileVariant::ALL
                    .into_iter()
                    .zip(totals)
                    .map(|(variant, total)| VariantTiming {
                        variant,
                        n,
                        d,
                        trials,
                        mean_secs: mean_secs(total, trials),
                    }),
            );
        }
    }
    Ok(out)
}

/// Mean time per (algorithm, k, n2) to answer [`KNN_BENCH_QUERIES`] x
/// [`KNN_BENCH_DIMS`] kNN queries on random distance vectors of length
/// `n2 - m + 1`. All three algorithms see the same vectors.
pub fn bench_knn(
    k_grid: &[usize],
    n2_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<KnnTiming>> {
    let trials = trials.max(1);
    let m = KNN_BENCH_M;
    let upper = 2.0 * (m as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &k in k_grid {
        for &n2 in n2_grid {
            let count = n2
                .checked_sub(m - 1)
                .filter(|&c| c > 0)
                .ok_or(Error::SeriesTooShort { n: n2, required: m })?;
            let mut totals = [Duration::ZERO; KnnAlgorithm::ALL.len()];
            let mut dists = vec![0.0f64; count];
            for _ in 0..trials * KNN_BENCH_QUERIES * KNN_BENCH_DIMS {
                dists
                    .iter_mut()
                    .for_each(|v| *v = rng.random_range(0.0..upper));
                let query = KnnQuery::new(&dists, k, m);
                for (total, alg) in totals.iter_mut().zip(KnnAlgorithm::ALL) {
                    let start = Instant::now();
                    std::hint::black_box(find_knn(&query, alg)?);
                    *total += start.elapsed();
                }
            }
            out.extend(
                KnnAlgorithm::ALL
                    .into_iter()
                    .zip(totals)
                    .map(|(algorithm, total)| KnnTiming {
                        algorithm,
                        k,
                        n2,
                        trials,
                        mean_secs: mean_secs(total, trials),
                    }),
            );
        }
    }
    Ok(out)
}

/// Both sweeps of `plan`, `n` sweep first.
pub fn run_variant_plan(plan: &VariantPlan, seed: u64) -> Result<Vec<VariantTiming>> {
    let mut rows = bench_variants(&plan.n_sweep, &[plan.n_sweep_d], plan.trials, seed)?;
    rows.extend(bench_variants(
        &[plan.d_sweep_n],
        &plan.d_sweep,
        plan.trials,
        seed.wrapping_add(1),
    )?);
    Ok(rows)
}

pub fn run_knn_plan(plan: &KnnPlan, seed: u64) -> Result<Vec<KnnTiming>> {
    bench_knn(&plan.k_grid, &plan.n2_grid, plan.trials, seed)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = logs.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|&(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn write_table(path: &Path, header: &str, lines: impl Iterator<Item = String>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    writeln!(file, "{header}").map_err(io_err)?;
    for line in lines {
        writeln!(file, "{line}").map_err(io_err)?;
    }
    file.flush().map_err(io_err)
}

pub fn write_variant_timings(path: &Path, rows: &[VariantTiming]) -> Result<()> {
    write_table(
        path,
        "variant,n,d,trials,mean_seconds",
        rows.iter()
            .map(|r| format!("{},{},{},{},{}", r.variant, r.n, r.d, r.trials, r.mean_secs)),
    )
}

pub fn write_knn_timings(path: &Path, rows: &[KnnTiming]) -> Result<()> {
    write_table(
        path,
        "algorithm,k,n2,trials,mean_seconds",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.algorithm.name(),
                r.k,
                r.n2,
                r.trials,
                r.mean_secs
            )
        }),
    )
}
