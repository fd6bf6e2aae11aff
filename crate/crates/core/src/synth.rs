// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded synthetic datasets with labeled, injected anomalies.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` and values are
//! generated in `f64` before conversion, so a given spec produces the same
//! values on every platform.
//!
//! | kind          | construction |
//! |---------------|--------------|
//! | `kofn`        | `d` periodic channels; one channel's window replaced by a faster oscillation |
//! | `span`        | four anomalies touching 1, 2, 3 and 4 channels at disjoint windows |
//! | `correlation` | near-identical channels built from two smooth motifs; one channel's window is copied from a distant offset of itself |
//! | `twin`        | one anomalous segment pasted verbatim at two windows in phase with the base signal |
//! | `walk`        | random walks with an oscillating burst added to some channels |

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::detect::LabelVector;
use crate::error::{Error, Result};
use crate::io::DatasetFile;
use crate::scalar::Scalar;
use crate::series::MultivariateSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    KofN,
    SpanLadder,
    CorrelationBreak,
    TwinFreak,
    RandomWalk,
}

impl SynthKind {
    pub const ALL: [SynthKind; 5] = [
        Self::KofN,
        Self::SpanLadder,
        Self::CorrelationBreak,
        Self::TwinFreak,
        Self::RandomWalk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::KofN => "kofn",
            Self::SpanLadder => "span",
            Self::CorrelationBreak => "correlation",
            Self::TwinFreak => "twin",
            Self::RandomWalk => "walk",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::SpecInvalid(format!("unknown fixture kind `{s}`")))
    }
}

/// One injected anomaly: the affected dimensions and the window `[start, start + length)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnomalySpec {
    pub dims: Vec<usize>,
    pub start: usize,
    pub length: usize,
}

impl AnomalySpec {
    pub fn end(&self) -> usize {
        self.start + self.length
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub n: usize,
    pub d: usize,
    /// Base period of the generated signals; pick the detector's `m` to match.
    pub m_hint: usize,
    pub seed: u64,
    /// Leave empty for the kind's default layout (derived from the seed).
    pub anomalies: Vec<AnomalySpec>,
}

pub const NOISE_STD: f64 = 0.05;

impl SynthSpec {
    pub fn new(kind: SynthKind, n: usize, d: usize, m_hint: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            d,
            m_hint,
            seed,
            anomalies: Vec::new(),
        }
    }

    fn min_len(&self) -> usize {
        let p = self.m_hint;
        match self.kind {
            SynthKind::SpanLadder => 24 * p,
            SynthKind::CorrelationBreak => 16 * p,
            SynthKind::TwinFreak => 12 * p,
            _ => 8 * p,
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.m_hint < 4 {
            return Err(Error::SpecInvalid(format!(
                "m_hint={} must be at least 4",
                self.m_hint
            )));
        }
        if self.d == 0 {
            return Err(Error::SpecInvalid("d must be at least 1".into()));
        }
        let min_d = match self.kind {
            SynthKind::SpanLadder => 4,
            SynthKind::CorrelationBreak => 2,
            _ => 1,
        };
        if self.d < min_d {
            return Err(Error::SpecInvalid(format!(
                "{} fixtures need d >= {min_d}, got {}",
                self.kind, self.d
            )));
        }
        if self.n < self.min_len() {
            return Err(Error::SpecInvalid(format!(
                "{} fixtures with m_hint={} need n >= {}, got {}",
                self.kind,
                self.m_hint,
                self.min_len(),
                self.n
            )));
        }
        Ok(())
    }

    fn validate_anomalies(&self, anomalies: &[AnomalySpec]) -> Result<()> {
        if anomalies.is_empty() {
            return Err(Error::SpecInvalid(
                "at least one anomaly is required".into(),
            ));
        }
        for a in anomalies {
            if a.length == 0 || a.end() > self.n {
                return Err(Error::SpecInvalid(format!(
                    "anomaly window {}..{} outside [0, {})",
                    a.start,
                    a.end(),
                    self.n
                )));
            }
            if a.dims.is_empty() || a.dims.iter().any(|&j| j >= self.d) {
                return Err(Error::SpecInvalid(format!(
                    "anomaly dims {:?} not a non-empty subset of [0, {})",
                    a.dims, self.d
                )));
            }
        }
        match self.kind {
            SynthKind::SpanLadder if anomalies.len() != 4 => Err(Error::SpecInvalid(
                "span fixtures need exactly four anomalies".into(),
            )),
            SynthKind::TwinFreak
                if anomalies.len() != 2 || anomalies[0].length != anomalies[1].length =>
            {
                Err(Error::SpecInvalid(
                    "twin fixtures need exactly two equal-length anomalies".into(),
                ))
            }
            SynthKind::CorrelationBreak if anomalies.len() != 1 || anomalies[0].dims.len() != 1 => {
                Err(Error::SpecInvalid(
                    "correlation fixtures need exactly one single-dimension anomaly".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Start offset that keeps a `length`-window at least `margin` from both ends,
/// aligned to `align`.
fn random_start(rng: &mut ChaCha8Rng, n: usize, length: usize, margin: usize) -> usize {
    rng.random_range(margin..=n - length - margin)
}

fn default_layout(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<AnomalySpec> {
    let (n, d, p) = (spec.n, spec.d, spec.m_hint);
    match spec.kind {
        SynthKind::KofN => vec![AnomalySpec {
            dims: vec![rng.random_range(0..d)],
            start: random_start(rng, n, p, 2 * p),
            length: p,
        }],
        SynthKind::SpanLadder => {
            let mut dims: Vec<usize> = (0..d).collect();
            (1..=4)
                .map(|span| {
                    // Partial shuffle so each anomaly touches its own subset.
                    for i in 0..span {
                        let j = rng.random_range(i..d);
                        dims.swap(i, j);
                    }
                    let mut chosen = dims[..span].to_vec();
                    chosen.sort_unstable();
                    AnomalySpec {
                        dims: chosen,
                        start: (n * span / 5 / p) * p,
                        length: p,
                    }
                })
                .collect()
        }
        SynthKind::CorrelationBreak => {
            let slots = n / p;
            let slot = rng.random_range(slots / 8..slots / 2 - 2);
            vec![AnomalySpec {
                dims: vec![d - 1],
                start: slot * p,
                length: 2 * p,
            }]
        }
        SynthKind::TwinFreak => {
            let quarter = n / 4 / p;
            let a = rng.random_range(2..quarter.max(3)) * p;
            let b = a + (n / 2 / p) * p;
            let dims = vec![rng.random_range(0..d)];
            vec![
                AnomalySpec {
                    dims: dims.clone(),
                    start: a,
                    length: p,
                },
                AnomalySpec {
                    dims,
                    start: b,
                    length: p,
                },
            ]
        }
        SynthKind::RandomWalk => {
            let count = rng.random_range(1..=d);
            let mut dims: Vec<usize> = (0..d).collect();
            for i in 0..count {
                let j = rng.random_range(i..d);
                dims.swap(i, j);
            }
            let mut chosen = dims[..count].to_vec();
            chosen.sort_unstable();
            vec![AnomalySpec {
                dims: chosen,
                start: random_start(rng, n, p, 2 * p),
                length: p,
            }]
        }
    }
}

struct Noise {
    normal: Normal<f64>,
}

impl Noise {
    fn new(std: f64) -> Self {
        Self {
            normal: Normal::new(0.0, std).expect("finite positive std"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.normal.sample(rng)
    }
}

/// Periodic channel: a fundamental plus a randomly weighted second harmonic.
fn periodic_channel(rng: &mut ChaCha8Rng, n: usize, period: usize, noise: &Noise) -> Vec<f64> {
    let phase = rng.random_range(0.0..TAU);
    let phase2 = rng.random_range(0.0..TAU);
    let h2 = rng.random_range(0.1..0.5);
    (0..n)
        .map(|t| {
            let x = TAU * t as f64 / period as f64;
            (x + phase).sin() + h2 * (2.0 * x + phase2).sin() + noise.sample(rng)
        })
        .collect()
}

/// Oscillation at a non-harmonic multiple of the base frequency; its shape
/// does not occur anywhere in a periodic channel.
fn foreign_segment(
    rng: &mut ChaCha8Rng,
    length: usize,
    period: usize,
    speedup: f64,
    noise: &Noise,
) -> Vec<f64> {
    let phase = rng.random_range(0.0..TAU);
    (0..length)
        .map(|t| (speedup * TAU * t as f64 / period as f64 + phase).sin() + noise.sample(rng))
        .collect()
}

/// Two motifs that start and end at zero with zero slope, so any sequence of
/// them is smooth.
fn motif(kind: bool, u: f64) -> f64 {
    let s = (std::f64::consts::PI * u).sin();
    if kind {
        s * s
    } else {
        (TAU * u).sin() * s
    }
}

pub fn generate_fixture<T: Scalar>(spec: &SynthSpec) -> Result<DatasetFile<T>> {
    spec.validate_shape()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let anomalies = if spec.anomalies.is_empty() {
        default_layout(spec, &mut rng)
    } else {
        spec.anomalies.clone()
    };
    spec.validate_anomalies(&anomalies)?;

    let (n, d, p) = (spec.n, spec.d, spec.m_hint);
    let noise = Noise::new(NOISE_STD);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(d);

    match spec.kind {
        SynthKind::KofN | SynthKind::SpanLadder => {
            for _ in 0..d {
                columns.push(periodic_channel(&mut rng, n, p, &noise));
            }
            for (idx, a) in anomalies.iter().enumerate() {
                for &j in &a.dims {
                    // Distinct speed-ups keep anomalies from matching each other.
                    let speedup = 2.5 + idx as f64 + rng.random_range(0.0..0.5);
                    let seg = foreign_segment(&mut rng, a.length, p, speedup, &noise);
                    columns[j][a.start..a.end()].copy_from_slice(&seg);
                }
            }
        }
        SynthKind::CorrelationBreak => {
            let a = &anomalies[0];
            let slots = n.div_ceil(p);
            let mut pattern: Vec<bool> = (0..slots).map(|_| rng.random_bool(0.5)).collect();
            // Source window sits half a series away, with the opposite motifs.
            let source = if a.start + a.length <= n / 2 {
                ((a.start + n / 2) / p) * p
            } else {
                (a.start.saturating_sub(n / 2) / p) * p
            };
            if source + a.length > n || source.abs_diff(a.start) < a.length + p {
                return Err(Error::SpecInvalid(
                    "correlation anomaly leaves no room for a distant source window".into(),
                ));
            }
            pattern[a.start / p..a.end().div_ceil(p)].fill(true);
            pattern[source / p..(source + a.length).div_ceil(p)].fill(false);
            let base: Vec<f64> = (0..n)
                .map(|t| motif(pattern[t / p], (t % p) as f64 / p as f64))
                .collect();
            for _ in 0..d {
                columns.push(base.iter().map(|&b| b + noise.sample(&mut rng)).collect());
            }
            let j = a.dims[0];
            let copied = columns[j][source..source + a.length].to_vec();
            columns[j][a.start..a.end()].copy_from_slice(&copied);
        }
        SynthKind::TwinFreak => {
            for _ in 0..d {
                columns.push(periodic_channel(&mut rng, n, p, &noise));
            }
            let len = anomalies[0].length;
            let speedup = 2.5 + rng.random_range(0.0..1.0);
            let seg = foreign_segment(&mut rng, len, p, speedup, &noise);
            for a in &anomalies {
                for &j in &a.dims {
                    columns[j][a.start..a.end()].copy_from_slice(&seg);
                }
            }
        }
        SynthKind::RandomWalk => {
            let step = Noise::new(0.1);
            for _ in 0..d {
                let mut level = 0.0;
                columns.push(
                    (0..n)
                        .map(|_| {
                            level += step.sample(&mut rng);
                            level
                        })
                        .collect(),
                );
            }
            for a in &anomalies {
                for &j in &a.dims {
                    let burst = foreign_segment(&mut rng, a.length, p, 4.0, &noise);
                    for (v, b) in columns[j][a.start..a.end()].iter_mut().zip(burst) {
                        *v += 2.0 * b;
                    }
                }
            }
        }
    }

    let mut labels = vec![false; n];
    for a in &anomalies {
        labels[a.start..a.end()].fill(true);
    }
    let series = MultivariateSeries::from_columns(
        columns
            .into_iter()
            .map(|c| c.into_iter().map(T::of).collect())
            .collect(),
    )?;
    Ok(DatasetFile {
        path: None,
        series,
        labels: Some(LabelVector(labels)),
    })
}

/// The anomaly layout [`generate_fixture`] uses for `spec`.
pub fn fixture_anomalies(spec: &SynthSpec) -> Result<Vec<AnomalySpec>> {
    spec.validate_shape()?;
    if !spec.anomalies.is_empty() {
        spec.validate_anomalies(&spec.anomalies)?;
        return Ok(spec.anomalies.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let layout = default_layout(spec, &mut rng);
    spec.validate_anomalies(&layout)?;
    Ok(layout)
}
