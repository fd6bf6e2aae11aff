// SPDX-License-Identifier: MIT OR Apache-2.0

//! CSV ingestion and score emission.
//!
//! Dataset files are comma-separated with a mandatory header. The first
//! column is a timestamp (numeric or text; must increase strictly), the last
//! column is a label iff its header is `is_anomaly`, and everything in
//! between is one dimension per column. Score files have the header
//! `index,score`.
//!
//! Error positions are 0-based data rows (header excluded) and 0-based file
//! columns.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::detect::LabelVector;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::MultivariateSeries;

pub const LABEL_COLUMN: &str = "is_anomaly";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile<T> {
    pub path: Option<PathBuf>,
    pub series: MultivariateSeries<T>,
    pub labels: Option<LabelVector>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Forward-fill missing or non-finite cells instead of failing. Leading
    /// gaps take the first finite value of the column.
    pub impute: bool,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

enum Stamp {
    Number(f64),
    Text(String),
}

fn increases(prev: &Stamp, next: &Stamp) -> bool {
    match (prev, next) {
        (Stamp::Number(a), Stamp::Number(b)) => b > a,
        (Stamp::Text(a), Stamp::Text(b)) => b > a,
        // Mixed kinds cannot be ordered.
        _ => false,
    }
}

fn parse_label(cell: &str, row: usize, column: usize) -> Result<bool> {
    match cell.trim() {
        "1" | "1.0" | "true" | "True" | "TRUE" => Ok(true),
        "0" | "0.0" | "false" | "False" | "FALSE" => Ok(false),
        other => Err(Error::Parse {
            row,
            column,
            message: format!("invalid label `{other}`"),
        }),
    }
}

/// Parses a value cell; `None` marks a missing or non-finite entry.
fn parse_value<T: Scalar>(cell: &str, row: usize, column: usize) -> Result<Option<T>> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    let v: T = cell.parse().map_err(|_| Error::Parse {
        row,
        column,
        message: format!("invalid number `{cell}`"),
    })?;
    Ok(v.is_finite().then_some(v))
}

fn forward_fill<T: Scalar>(col: &[Option<T>], column: usize) -> Result<Vec<T>> {
    let first = col
        .iter()
        .flatten()
        .copied()
        .next()
        .ok_or(Error::NonFiniteValue { row: 0, column })?;
    let mut last = first;
    Ok(col
        .iter()
        .map(|v| {
            if let Some(v) = v {
                last = *v;
            }
            last
        })
        .collect())
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, opts: LoadOptions) -> Result<DatasetFile<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(std::io::BufReader::new(file));
    let header = reader.headers().map_err(csv_err(path))?.clone();
    let has_labels = header.iter().next_back().map(str::trim) == Some(LABEL_COLUMN);
    let min_cols = if has_labels { 3 } else { 2 };
    if header.len() < min_cols {
        return Err(Error::Parse {
            row: 0,
            column: header.len(),
            message: format!(
                "expected at least {min_cols} columns, found {}",
                header.len()
            ),
        });
    }
    let d = header.len() - if has_labels { 2 } else { 1 };
    let dim_names: Vec<String> = header
        .iter()
        .skip(1)
        .take(d)
        .map(|s| s.trim().to_string())
        .collect();

    let mut raw: Vec<Vec<Option<T>>> = vec![Vec::new(); d];
    let mut labels = Vec::new();
    let mut prev_stamp: Option<Stamp> = None;
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                column: record.len().min(header.len()),
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let ts = record[0].trim();
        let stamp = ts
            .parse::<f64>()
            .map(Stamp::Number)
            .unwrap_or_else(|_| Stamp::Text(ts.to_string()));
        if let Some(prev) = &prev_stamp {
            if !increases(prev, &stamp) {
                return Err(Error::NonMonotonicTimestamp { row });
            }
        }
        prev_stamp = Some(stamp);
        for (j, col) in raw.iter_mut().enumerate() {
            let column = j + 1;
            let v = parse_value::<T>(&record[column], row, column)?;
            if v.is_none() && !opts.impute {
                return Err(Error::NonFiniteValue { row, column });
            }
            col.push(v);
        }
        if has_labels {
            labels.push(parse_label(&record[d + 1], row, d + 1)?);
        }
    }
    if raw[0].is_empty() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "no data rows".into(),
        });
    }
    let columns = raw
        .iter()
        .enumerate()
        .map(|(j, col)| forward_fill(col, j + 1))
        .collect::<Result<Vec<_>>>()?;
    let series = MultivariateSeries::from_columns(columns)?.with_dim_names(dim_names)?;
    Ok(DatasetFile {
        path: Some(path.to_path_buf()),
        series,
        labels: has_labels.then_some(LabelVector(labels)),
    })
}

/// Writes a dataset in the format [`load_csv`] reads, with integer
/// timestamps `0..n`.
pub fn write_dataset_csv<T: Scalar>(path: impl AsRef<Path>, data: &DatasetFile<T>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_dataset(&mut w, data).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

/// Serializes a dataset to CSV text.
pub fn dataset_to_csv_string<T: Scalar>(data: &DatasetFile<T>) -> String {
    let mut buf = Vec::new();
    write_dataset(&mut buf, data).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

fn write_dataset<T: Scalar, W: Write>(w: &mut W, data: &DatasetFile<T>) -> std::io::Result<()> {
    let s = &data.series;
    write!(w, "timestamp")?;
    for j in 0..s.d() {
        match s.dim_names() {
            Some(names) => write!(w, ",{}", names[j])?,
            None => write!(w, ",value-{j}")?,
        }
    }
    if data.labels.is_some() {
        write!(w, ",{LABEL_COLUMN}")?;
    }
    writeln!(w)?;
    for i in 0..s.n() {
        write!(w, "{i}")?;
        for j in 0..s.d() {
            write!(w, ",{}", s.get(i, j))?;
        }
        if let Some(labels) = &data.labels {
            write!(w, ",{}", u8::from(labels[i]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Writes `index,score` rows. `Display` on floats is the shortest
/// representation that parses back exactly.
pub fn write_scores_csv<T: Scalar>(path: impl AsRef<Path>, scores: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    let write_all = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "index,score")?;
        for (i, s) in scores.iter().enumerate() {
            writeln!(w, "{i},{s}")?;
        }
        w.flush()
    };
    write_all(&mut w).map_err(io_err(path))
}

pub fn load_scores_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::Reader::from_reader(std::io::BufReader::new(file));
    let header = reader.headers().map_err(csv_err(path))?.clone();
    let column = header
        .iter()
        .position(|h| h.trim() == "score")
        .ok_or_else(|| Error::Parse {
            row: 0,
            column: 0,
            message: "missing `score` column".into(),
        })?;
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err(path))?;
        let cell = record.get(column).unwrap_or("");
        match parse_value::<T>(cell, row, column)? {
            Some(v) => out.push(v),
            None => return Err(Error::NonFiniteValue { row, column }),
        }
    }
    Ok(out)
}
