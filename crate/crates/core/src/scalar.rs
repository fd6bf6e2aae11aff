// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar the distance, profile and scoring code is generic over.
///
/// Implemented for `f32` and `f64`. `Display` must print the shortest
/// representation that parses back to the same value, which both primitive
/// floats guarantee.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64`; used for constants and generated data.
    fn of(v: f64) -> Self;

    /// Lossy conversion from a count.
    fn of_usize(v: usize) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f64 {
    #[inline]
    fn of(v: f64) -> Self {
        v
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        v as f64
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    #[inline]
    fn of(v: f64) -> Self {
        v as f32
    }

    #[inline]
    fn of_usize(v: usize) -> Self {
        v as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

/// Total order on scalars used for sorting distance values; NaN never reaches
/// the kernels (series ingestion rejects non-finite values), so it sorts last.
#[inline]
pub(crate) fn cmp_scalar<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    a.partial_cmp(&b)
        .unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}
