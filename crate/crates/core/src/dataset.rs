//! Labelled numeric tables: CSV ingestion, a seeded synthetic generator and
//! stratified train/test splitting.
//!
//! A [`Dataset`] is immutable once built. Every constructor validates that
//! labels are 0/1, that every value is finite and that the table is
//! rectangular, so downstream code never re-checks.

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Label column name used when none is given.
pub const DEFAULT_LABEL_COLUMN: &str = "class";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRepr", into = "DatasetRepr")]
pub struct Dataset {
    feature_names: Vec<String>,
    /// Row-major, `labels.len() * feature_names.len()` values.
    values: Vec<f64>,
    labels: Vec<u8>,
}

#[derive(Serialize, Deserialize)]
struct DatasetRepr {
    feature_names: Vec<String>,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
}

impl TryFrom<DatasetRepr> for Dataset {
    type Error = Error;

    fn try_from(repr: DatasetRepr) -> Result<Self> {
        Dataset::from_rows(repr.feature_names, repr.rows, repr.labels)
    }
}

impl From<Dataset> for DatasetRepr {
    fn from(ds: Dataset) -> Self {
        DatasetRepr {
            rows: ds.rows().map(<[f64]>::to_vec).collect(),
            feature_names: ds.feature_names,
            labels: ds.labels,
        }
    }
}

impl Dataset {
    /// Builds a dataset from a row-major value buffer.
    pub fn new(feature_names: Vec<String>, values: Vec<f64>, labels: Vec<u8>) -> Result<Self> {
        let d = feature_names.len();
        if d == 0 {
            return Err(Error::Data(
                "dataset needs at least one feature column".into(),
            ));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Data(format!("duplicate feature name '{name}'")));
            }
        }
        if values.len() != labels.len() * d {
            return Err(Error::Data(format!(
                "{} values cannot form {} rows of {} features",
                values.len(),
                labels.len(),
                d
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y > 1) {
            return Err(Error::Data(format!(
                "label {} at row {} is not 0 or 1",
                labels[i],
                i + 1
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value at row {}, column '{}'",
                i / d + 1,
                feature_names[i % d]
            )));
        }
        Ok(Dataset {
            feature_names,
            values,
            labels,
        })
    }

    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        let d = feature_names.len();
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Data(format!(
                "row {} has {} values, expected {}",
                i + 1,
                rows[i].len(),
                d
            )));
        }
        Dataset::new(feature_names, rows.concat(), labels)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|n| n == name)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.n_features();
        &self.values[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n_features())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `(negatives, positives)`.
    pub fn class_counts(&self) -> (usize, usize) {
        class_counts(&self.labels)
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.class_counts().1 as f64 / self.n_rows() as f64
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let d = self.n_features();
        let mut values = Vec::with_capacity(indices.len() * d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            feature_names: self.feature_names.clone(),
            values,
            labels,
        }
    }

    /// Same rows and labels with every feature value replaced. `f` receives
    /// `(column, value)`. Fails if `f` produces a non-finite value.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Dataset> {
        let d = self.n_features();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(i % d, v))
            .collect();
        Dataset::new(self.feature_names.clone(), values, self.labels.clone())
    }

    /// Same features with labels flipped 0 <-> 1.
    pub fn with_flipped_labels(&self) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            values: self.values.clone(),
            labels: self.labels.iter().map(|&y| 1 - y).collect(),
        }
    }

    /// Indices of rows carrying `label`, ascending.
    pub fn indices_of(&self, label: u8) -> Vec<usize> {
        (0..self.n_rows())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }
}

/// `(negatives, positives)` for a 0/1 label slice.
pub fn class_counts(labels: &[u8]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&y| y == 1).count();
    (labels.len() - pos, pos)
}

pub fn load_csv(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column, path)
}

/// Parses comma-separated data with a header row. `origin` only labels errors.
pub fn read_csv(reader: impl Read, label_column: &str, origin: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Err(Error::Data(format!(
            "{}: missing header row",
            origin.display()
        )));
    }
    let names: Vec<String> = headers.iter().map(|h| h.trim().to_string()).collect();
    let mut seen = HashSet::new();
    for name in &names {
        if !seen.insert(name.as_str()) {
            return Err(Error::Data(format!(
                "{}: duplicate header '{name}'",
                origin.display()
            )));
        }
    }
    let label_idx = names
        .iter()
        .position(|n| n == label_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "{}: label column '{label_column}' not found in header",
                origin.display()
            ))
        })?;
    let feature_names: Vec<String> = names
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != label_idx)
        .map(|(_, n)| n.clone())
        .collect();

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0;
    while rdr.read_record(&mut record)? {
        row += 1;
        let cell_err = |j: usize, reason: String| Error::Cell {
            path: origin.to_path_buf(),
            row,
            column: names[j].clone(),
            reason,
        };
        for (j, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| cell_err(j, format!("'{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(cell_err(j, format!("'{cell}' is not a finite number")));
            }
            if j == label_idx {
                if v == 0.0 {
                    labels.push(0);
                } else if v == 1.0 {
                    labels.push(1);
                } else {
                    return Err(cell_err(j, format!("label '{cell}' is not 0 or 1")));
                }
            } else {
                values.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", origin.display())));
    }
    Dataset::new(feature_names, values, labels)
}

pub fn write_csv(data: &Dataset, path: impl AsRef<Path>, label_column: &str) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    to_csv_writer(data, &mut out, label_column).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// Writes the fixed dialect: comma separator, header row, shortest
/// round-trip decimal text for every value, label last.
pub fn to_csv_writer(
    data: &Dataset,
    out: &mut impl Write,
    label_column: &str,
) -> std::io::Result<()> {
    let header: Vec<&str> = data
        .feature_names()
        .iter()
        .map(String::as_str)
        .chain(std::iter::once(label_column))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for (row, label) in data.rows().zip(data.labels()) {
        line.clear();
        for v in row {
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(if *label == 1 { "1" } else { "0" });
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Parameters for the two-Gaussian synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_total: usize,
    pub positive_fraction: f64,
    pub d: usize,
    /// Euclidean distance between the two class means.
    pub class_mean_separation: f64,
    pub noise_stddev: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_total: 20_000,
            positive_fraction: 0.01,
            d: 8,
            class_mean_separation: 2.5,
            noise_stddev: 1.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("synthetic spec: {msg}")));
        if self.n_total < 10 {
            return bad(format!("n_total must be >= 10, got {}", self.n_total));
        }
        if !(self.positive_fraction > 0.0 && self.positive_fraction < 1.0) {
            return bad(format!(
                "positive_fraction must be in (0, 1), got {}",
                self.positive_fraction
            ));
        }
        if self.d == 0 {
            return bad("d must be >= 1".into());
        }
        if !(self.class_mean_separation >= 0.0 && self.class_mean_separation.is_finite()) {
            return bad(format!(
                "class_mean_separation must be finite and >= 0, got {}",
                self.class_mean_separation
            ));
        }
        if !(self.noise_stddev > 0.0 && self.noise_stddev.is_finite()) {
            return bad(format!(
                "noise_stddev must be > 0, got {}",
                self.noise_stddev
            ));
        }
        if (self.n_total as f64) * self.positive_fraction < 1.0 {
            return bad("n_total * positive_fraction must be >= 1".into());
        }
        let pos = self.n_positives();
        if pos >= self.n_total {
            return bad("positive_fraction leaves no negative rows".into());
        }
        Ok(())
    }

    /// Exact positive count produced by the generator.
    pub fn n_positives(&self) -> usize {
        (self.n_total as f64 * self.positive_fraction).round() as usize
    }

    /// Per-coordinate offset of each class mean from the origin. The means sit
    /// at `+offset * 1` (positives) and `-offset * 1` (negatives).
    fn mean_offset(&self) -> f64 {
        self.class_mean_separation / (2.0 * (self.d as f64).sqrt())
    }
}

/// Draws an isotropic two-Gaussian dataset. Features are named `V1..Vd`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = rng::seeded(seed);
    let n_pos = spec.n_positives();
    let mut labels: Vec<u8> = (0..spec.n_total).map(|i| u8::from(i < n_pos)).collect();
    labels.shuffle(&mut rng);

    let offset = spec.mean_offset();
    let mut values = Vec::with_capacity(spec.n_total * spec.d);
    for &y in &labels {
        let mean = if y == 1 { offset } else { -offset };
        for _ in 0..spec.d {
            let z: f64 = StandardNormal.sample(&mut rng);
            values.push(mean + spec.noise_stddev * z);
        }
    }
    let names = (1..=spec.d).map(|j| format!("V{j}")).collect();
    Dataset::new(names, values, labels)
}

/// Splits each class independently so both sides keep the class mix.
/// Rows keep their original relative order within each side.
pub fn stratified_split(
    data: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test_fraction must be in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut test = Vec::new();
    for label in [0u8, 1] {
        let mut idx = data.indices_of(label);
        if idx.len() < 2 {
            return Err(Error::Data(format!(
                "class {label} has {} rows; stratified split needs at least 2",
                idx.len()
            )));
        }
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        if n_test == 0 || n_test == idx.len() {
            return Err(Error::Data(format!(
                "test_fraction {test_fraction} gives class {label} {n_test} of {} rows in the test set",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        test.extend_from_slice(&idx[..n_test]);
    }
    test.sort_unstable();
    let mut in_test = vec![false; data.n_rows()];
    for &i in &test {
        in_test[i] = true;
    }
    let train: Vec<usize> = (0..data.n_rows()).filter(|&i| !in_test[i]).collect();
    Ok((data.select(&train), data.select(&test)))
}
