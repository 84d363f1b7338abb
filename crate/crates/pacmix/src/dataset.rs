//! Labeled samples and their CSV representation.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds::ContentHasher;

/// Response block of a dataset: one scalar per row (regression) or one
/// one-hot vector of length `classes` per row (classification).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Responses {
    Scalar(Vec<f64>),
    OneHot { classes: usize, rows: Vec<Vec<f64>> },
}

impl Responses {
    pub fn len(&self) -> usize {
        match self {
            Responses::Scalar(v) => v.len(),
            Responses::OneHot { rows, .. } => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Output arity: 1 for regression, `classes` for one-hot responses.
    pub fn arity(&self) -> usize {
        match self {
            Responses::Scalar(_) => 1,
            Responses::OneHot { classes, .. } => *classes,
        }
    }

    /// Row `i` as a slice of length `arity()`.
    pub fn row(&self, i: usize) -> &[f64] {
        match self {
            Responses::Scalar(v) => std::slice::from_ref(&v[i]),
            Responses::OneHot { rows, .. } => &rows[i],
        }
    }
}

/// A sample set: `n` feature rows of dimension `d` with responses.
///
/// Invariants are enforced at construction: at least one row, rows of
/// equal dimension, one-hot rows containing exactly one 1 and zeros
/// elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    responses: Responses,
}

impl LabeledDataset {
    pub fn new(features: Vec<Vec<f64>>, responses: Responses) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::InvalidArgument("dataset must be nonempty".into()));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::InvalidArgument(
                "feature rows must have at least one column".into(),
            ));
        }
        if features.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeMismatch(
                "feature rows have inconsistent dimensions".into(),
            ));
        }
        if responses.len() != features.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} feature rows but {} responses",
                features.len(),
                responses.len()
            )));
        }
        if let Responses::OneHot { classes, rows } = &responses {
            if *classes < 2 {
                return Err(Error::InvalidArgument(
                    "one-hot responses need at least 2 classes".into(),
                ));
            }
            for (i, row) in rows.iter().enumerate() {
                let ones = row.iter().filter(|&&v| v == 1.0).count();
                let zeros = row.iter().filter(|&&v| v == 0.0).count();
                if row.len() != *classes || ones != 1 || zeros != classes - 1 {
                    return Err(Error::InvalidArgument(format!(
                        "response row {i} is not one-hot"
                    )));
                }
            }
        }
        Ok(Self {
            features,
            responses,
        })
    }

    /// Convenience constructor for scalar responses.
    pub fn regression(features: Vec<Vec<f64>>, ys: Vec<f64>) -> Result<Self> {
        Self::new(features, Responses::Scalar(ys))
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    /// Response arity: 1 for regression, number of classes otherwise.
    pub fn arity(&self) -> usize {
        self.responses.arity()
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.responses, Responses::OneHot { .. })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i]
    }

    pub fn responses(&self) -> &Responses {
        &self.responses
    }

    pub fn response_row(&self, i: usize) -> &[f64] {
        self.responses.row(i)
    }

    /// Scalar responses, or an error for one-hot data.
    pub fn scalar_responses(&self) -> Result<&[f64]> {
        match &self.responses {
            Responses::Scalar(v) => Ok(v),
            Responses::OneHot { .. } => Err(Error::InvalidArgument(
                "operation requires scalar responses".into(),
            )),
        }
    }

    /// Dataset restricted to the given row indices (in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let features = indices
            .iter()
            .map(|&i| self.features[i].clone())
            .collect::<Vec<_>>();
        let responses = match &self.responses {
            Responses::Scalar(v) => Responses::Scalar(indices.iter().map(|&i| v[i]).collect()),
            Responses::OneHot { classes, rows } => Responses::OneHot {
                classes: *classes,
                rows: indices.iter().map(|&i| rows[i].clone()).collect(),
            },
        };
        Self::new(features, responses)
    }

    /// Concatenates datasets of identical shape, preserving order.
    pub fn concat(parts: &[&LabeledDataset]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("nothing to concatenate".into()))?;
        let mut features = Vec::new();
        let mut responses = first.responses.clone();
        match &mut responses {
            Responses::Scalar(v) => v.clear(),
            Responses::OneHot { rows, .. } => rows.clear(),
        }
        for part in parts {
            if part.dim() != first.dim() || part.arity() != first.arity() {
                return Err(Error::ShapeMismatch(
                    "datasets to concatenate have different shapes".into(),
                ));
            }
            features.extend(part.features.iter().cloned());
            match (&mut responses, &part.responses) {
                (Responses::Scalar(acc), Responses::Scalar(v)) => acc.extend_from_slice(v),
                (Responses::OneHot { rows: acc, .. }, Responses::OneHot { rows, .. }) => {
                    acc.extend(rows.iter().cloned())
                }
                _ => {
                    return Err(Error::ShapeMismatch(
                        "cannot mix scalar and one-hot responses".into(),
                    ))
                }
            }
        }
        Self::new(features, responses)
    }

    /// Stable hash of the dataset content (dimensions plus the exact bit
    /// patterns of every value). Used to key per-task random streams.
    pub fn content_hash(&self) -> u64 {
        let mut h = ContentHasher::new();
        h.write_u64(self.len() as u64);
        h.write_u64(self.dim() as u64);
        h.write_u64(self.arity() as u64);
        for row in &self.features {
            for &v in row {
                h.write_f64(v);
            }
        }
        for i in 0..self.len() {
            for &v in self.response_row(i) {
                h.write_f64(v);
            }
        }
        h.finish()
    }

    /// Serializes to CSV: header `x1,…,xd,y` for regression or
    /// `x1,…,xd,y1,…,yc` for one-hot responses; LF line endings; floats in
    /// shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for j in 1..=d {
            if j > 1 {
                out.push(',');
            }
            let _ = write!(out, "x{j}");
        }
        match &self.responses {
            Responses::Scalar(_) => out.push_str(",y"),
            Responses::OneHot { classes, .. } => {
                for c in 1..=*classes {
                    let _ = write!(out, ",y{c}");
                }
            }
        }
        out.push('\n');
        for i in 0..self.len() {
            for (j, v) in self.features[i].iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            for v in self.response_row(i) {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the CSV format produced by [`LabeledDataset::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::CsvParse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        let d = cols.iter().take_while(|c| c.starts_with('x')).count();
        let y_cols = cols.len() - d;
        if d == 0 || y_cols == 0 {
            return Err(Error::CsvParse {
                line: 1,
                msg: format!("expected header x1,…,xd,y or x1,…,xd,y1,…,yc, got '{header}'"),
            });
        }

        let mut features = Vec::new();
        let mut scalar = Vec::new();
        let mut onehot = Vec::new();
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != cols.len() {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    msg: format!("expected {} fields, got {}", cols.len(), parts.len()),
                });
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim().parse::<f64>().map_err(|e| Error::CsvParse {
                    line: idx + 1,
                    msg: format!("bad number '{s}': {e}"),
                })
            };
            let row: Vec<f64> = parts[..d]
                .iter()
                .map(|s| parse(s))
                .collect::<Result<_>>()?;
            features.push(row);
            if y_cols == 1 {
                scalar.push(parse(parts[d])?);
            } else {
                onehot.push(
                    parts[d..]
                        .iter()
                        .map(|s| parse(s))
                        .collect::<Result<Vec<f64>>>()?,
                );
            }
        }
        let responses = if y_cols == 1 {
            Responses::Scalar(scalar)
        } else {
            Responses::OneHot {
                classes: y_cols,
                rows: onehot,
            }
        };
        Self::new(features, responses)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv(&text)
    }
}
