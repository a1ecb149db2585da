//! CSV ingestion and export, standardization, and train/test splitting.
//!
//! Files hold one sample per row; the transpose into the column-per-sample
//! layout happens here and nowhere else.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Formats a double with 17 significant digits, enough for an exact
/// round trip.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Header name, or a zero-based index for headerless files.
    pub label_column: Option<String>,
    pub id_column: Option<String>,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            has_header: true,
            label_column: None,
            id_column: None,
            delimiter: b',',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DataMatrix,
    /// Raw label cells, one per sample.
    pub labels: Option<Vec<String>>,
    pub feature_names: Option<Vec<String>>,
    pub sample_ids: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: DataMatrix) -> Self {
        Dataset {
            features,
            labels: None,
            feature_names: None,
            sample_ids: None,
        }
    }

    pub fn samples(&self) -> usize {
        self.features.samples()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let m = self.features.as_matrix();
        let features = DataMatrix::new(DMatrix::from_fn(m.nrows(), indices.len(), |i, j| {
            m[(i, indices[j])]
        }))?;
        let pick = |v: &Vec<String>| indices.iter().map(|&i| v[i].clone()).collect();
        Ok(Dataset {
            features,
            labels: self.labels.as_ref().map(pick),
            feature_names: self.feature_names.clone(),
            sample_ids: self.sample_ids.as_ref().map(pick),
        })
    }

    pub fn require_labels(&self) -> Result<&[String]> {
        self.labels
            .as_deref()
            .ok_or_else(|| Error::Usage("this operation needs a label column (--labels)".into()))
    }
}

/// Labels as reals when every cell parses as a finite number.
pub fn numeric_labels(labels: &[String]) -> Option<Vec<f64>> {
    labels
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect()
}

fn resolve_column(name: &str, header: Option<&[String]>, width: usize) -> Result<usize> {
    let found = match header {
        Some(h) => h.iter().position(|c| c == name),
        None => name.parse::<usize>().ok().filter(|&i| i < width),
    };
    found.ok_or_else(|| Error::Usage(format!("no column {name:?} in the input")))
}

pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    read_csv(file, opts).map_err(|e| e.context(path.display().to_string()))
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .delimiter(opts.delimiter)
        .from_reader(reader);

    let mut header: Option<Vec<String>> = None;
    let mut layout: Option<(usize, Option<usize>, Option<usize>)> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels = Vec::new();
    let mut ids = Vec::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if opts.has_header && header.is_none() {
            header = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        let (width, label_at, id_at) = match layout {
            Some(l) => l,
            None => {
                let width = header.as_ref().map_or(record.len(), Vec::len);
                let h = header.as_deref();
                let label_at = opts
                    .label_column
                    .as_deref()
                    .map(|c| resolve_column(c, h, width))
                    .transpose()?;
                let id_at = opts
                    .id_column
                    .as_deref()
                    .map(|c| resolve_column(c, h, width))
                    .transpose()?;
                *layout.insert((width, label_at, id_at))
            }
        };
        if record.len() != width {
            return Err(Error::Parse {
                line,
                column: None,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(width);
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_at {
                labels.push(cell.to_string());
            } else if Some(c) == id_at {
                ids.push(cell.to_string());
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => row.push(v),
                    _ => {
                        return Err(Error::Parse {
                            line,
                            column: Some(c + 1),
                            message: format!("not a finite number: {cell:?}"),
                        })
                    }
                }
            }
        }
        rows.push(row);
    }

    let Some((_, label_at, id_at)) = layout else {
        return Err(Error::EmptyInput("no data rows".into()));
    };
    if rows[0].is_empty() {
        return Err(Error::EmptyInput("no feature columns".into()));
    }
    let feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|(c, _)| Some(*c) != label_at && Some(*c) != id_at)
            .map(|(_, name)| name)
            .collect()
    });
    Ok(Dataset {
        features: DataMatrix::from_samples(&rows)?,
        labels: label_at.map(|_| labels),
        feature_names,
        sample_ids: id_at.map(|_| ids),
    })
}

/// Writes one row per sample: optional id column, values, optional label.
pub fn write_table<W: Write>(
    out: W,
    header: &[String],
    ids: Option<(&str, &[String])>,
    rows: &[Vec<f64>],
    labels: Option<(&str, &[String])>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut head: Vec<&str> = Vec::new();
    if let Some((name, _)) = ids {
        head.push(name);
    }
    head.extend(header.iter().map(String::as_str));
    if let Some((name, _)) = labels {
        head.push(name);
    }
    w.write_record(&head)?;
    for (i, row) in rows.iter().enumerate() {
        let mut rec: Vec<String> = Vec::with_capacity(row.len() + 2);
        if let Some((_, ids)) = ids {
            rec.push(ids[i].clone());
        }
        rec.extend(row.iter().map(|&v| format_f64(v)));
        if let Some((_, l)) = labels {
            rec.push(l[i].clone());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a dataset back in the layout `read_csv` accepts.
pub fn write_dataset<W: Write>(out: W, ds: &Dataset, id_name: &str, label_name: &str) -> Result<()> {
    let d = ds.features.features();
    let names = ds
        .feature_names
        .clone()
        .unwrap_or_else(|| (1..=d).map(|j| format!("x{j}")).collect());
    write_table(
        out,
        &names,
        ds.sample_ids.as_deref().map(|ids| (id_name, ids)),
        &ds.features.to_sample_rows(),
        ds.labels.as_deref().map(|l| (label_name, l)),
    )
}

/// Per-feature shift and scale fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    /// Population standard deviation, or 1 for a constant feature.
    pub scale: Vec<f64>,
}

impl Standardization {
    pub fn fit(x: &DataMatrix) -> Self {
        let m = x.as_matrix();
        let n = m.ncols() as f64;
        let mut mean = Vec::with_capacity(m.nrows());
        let mut scale = Vec::with_capacity(m.nrows());
        for row in m.row_iter() {
            let mu = row.sum() / n;
            let constant = row.iter().all(|&v| v == row[0]);
            let var = row.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            mean.push(mu);
            scale.push(if constant || var == 0.0 { 1.0 } else { var.sqrt() });
        }
        Standardization { mean, scale }
    }

    pub fn apply(&self, x: &DataMatrix) -> Result<DataMatrix> {
        if x.features() != self.mean.len() {
            return Err(Error::dim(format!(
                "standardization has {} features, data has {}",
                self.mean.len(),
                x.features()
            )));
        }
        let mean = DVector::from_column_slice(&self.mean);
        let m = x.as_matrix();
        DataMatrix::new(DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
            (m[(i, j)] - mean[i]) / self.scale[i]
        }))
    }
}

/// Standardizes the features and returns the parameters for held-out data.
pub fn standardize(ds: &Dataset) -> Result<(Dataset, Standardization)> {
    let params = Standardization::fit(&ds.features);
    let features = params.apply(&ds.features)?;
    Ok((Dataset { features, ..ds.clone() }, params))
}

/// Seeded shuffle into (train, test); the test side gets
/// `ceil(fraction * n)` samples.
pub fn split(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Usage(format!(
            "test fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let n = ds.samples();
    let n_test = (test_fraction * n as f64 - 1e-9).ceil().max(0.0) as usize;
    if n_test == 0 || n_test >= n {
        return Err(Error::DegenerateInput(format!(
            "a {test_fraction} split of {n} samples leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, train) = order.split_at(n_test);
    Ok((ds.subset(train)?, ds.subset(test)?))
}
