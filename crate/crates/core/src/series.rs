// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An `n x d` multidimensional time series: rows are time steps, columns are
/// dimensions. Stored column-major so each dimension is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries<T> {
    n: usize,
    columns: Vec<Vec<T>>,
    dim_names: Option<Vec<String>>,
}

impl<T: Scalar> MultivariateSeries<T> {
    /// Builds a series from one vector per dimension.
    pub fn from_columns(columns: Vec<Vec<T>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidSeries(
                "series needs at least one dimension".into(),
            ));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::InvalidSeries(
                "series needs at least one time step".into(),
            ));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: col.len(),
                });
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue { row: i, column: j });
            }
        }
        Ok(Self {
            n,
            columns,
            dim_names: None,
        })
    }

    /// Builds a series from time-step rows, each of length `d`.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).unwrap_or(0);
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for row in rows {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    actual: row.len(),
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::from_columns(columns)
    }

    /// Single-dimension convenience constructor.
    pub fn univariate(values: Vec<T>) -> Result<Self> {
        Self::from_columns(vec![values])
    }

    pub fn with_dim_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.d() {
            return Err(Error::LengthMismatch {
                expected: self.d(),
                actual: names.len(),
            });
        }
        self.dim_names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.columns.len()
    }

    #[inline]
    pub fn dim(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn dim_names(&self) -> Option<&[String]> {
        self.dim_names.as_deref()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.columns[j][i]
    }

    /// The subsequence `T[i..i+m, j]`.
    #[inline]
    pub fn subsequence(&self, i: usize, m: usize, j: usize) -> &[T] {
        &self.columns[j][i..i + m]
    }

    /// Time-wise concatenation `[self; other]`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::DimMismatch {
                left: self.d(),
                right: other.d(),
            });
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| a.iter().chain(b).copied().collect())
            .collect();
        Ok(Self {
            n: self.n + other.n,
            columns,
            dim_names: self.dim_names.clone(),
        })
    }

    /// Rows `[start, end)` as a new series.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.n {
            return Err(Error::InvalidSeries(format!(
                "slice {start}..{end} out of range for length {}",
                self.n
            )));
        }
        Ok(Self {
            n: end - start,
            columns: self
                .columns
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect(),
            dim_names: self.dim_names.clone(),
        })
    }
}
