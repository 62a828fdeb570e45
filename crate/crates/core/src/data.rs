//! Labeled datasets, seeded Gaussian generation, CSV I/O and outcome matrices.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the generator used by [`generate_gaussian`]; recorded in reports.
pub const GENERATOR_NAME: &str = "rand_chacha::ChaCha8Rng::seed_from_u64 + rand_distr::StandardNormal";

/// Anything that maps a point of `R^d` to a label in `{-1, +1}`.
pub trait Classifier {
    /// Smallest input dimension the classifier can be applied to.
    fn min_dim(&self) -> usize;

    /// Prediction without dimension checks; callers validate with `min_dim`.
    fn predict_unchecked(&self, x: &[f64]) -> i8;

    fn predict(&self, x: &[f64]) -> Result<i8> {
        if x.len() < self.min_dim() {
            return Err(Error::validation(format!(
                "classifier needs dimension >= {}, got {}",
                self.min_dim(),
                x.len()
            )));
        }
        Ok(self.predict_unchecked(x))
    }
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn min_dim(&self) -> usize {
        (**self).min_dim()
    }
    fn predict_unchecked(&self, x: &[f64]) -> i8 {
        (**self).predict_unchecked(x)
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn min_dim(&self) -> usize {
        (**self).min_dim()
    }
    fn predict_unchecked(&self, x: &[f64]) -> i8 {
        (**self).predict_unchecked(x)
    }
}

/// `n` points of `R^d` with labels in `{-1, +1}`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<f64>,
    labels: Vec<i8>,
    dim: usize,
}

impl LabeledDataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<i8>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::validation("rows have inconsistent lengths"));
        }
        Self::from_flat(rows.into_iter().flatten().collect(), labels, dim)
    }

    pub fn from_flat(features: Vec<f64>, labels: Vec<i8>, dim: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::validation("dataset needs at least one example"));
        }
        if dim == 0 {
            return Err(Error::validation("dataset needs at least one feature"));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::validation(format!(
                "expected {} feature values for {} rows of dimension {}, got {}",
                labels.len() * dim,
                labels.len(),
                dim,
                features.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&y| y != 1 && y != -1) {
            return Err(Error::validation(format!(
                "label of example {i} is {}, expected -1 or 1",
                labels[i]
            )));
        }
        if let Some(i) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite feature value in example {}",
                i / dim
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            dim,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn feature(&self, i: usize, f: usize) -> f64 {
        self.features[i * self.dim + f]
    }

    /// Serializes with header `x1,...,xd,y`; floats keep 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        header.push("y".into());
        w.write_record(&header).map_err(csv_io)?;
        let mut record = Vec::with_capacity(self.dim + 1);
        for (row, &y) in self.rows().zip(&self.labels) {
            record.clear();
            record.extend(row.iter().map(|v| format!("{v:.16e}")));
            record.push(y.to_string());
            w.write_record(&record).map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = reader.headers().map_err(|e| csv_parse(1, e))?.clone();
        if header.is_empty() || (header.len() == 1 && header[0].trim().is_empty()) {
            return Err(Error::Parse {
                line: 1,
                message: "no data rows".into(),
            });
        }
        let dim = header.len() - 1;
        let expected: Vec<String> = (1..=dim)
            .map(|k| format!("x{k}"))
            .chain(std::iter::once("y".to_string()))
            .collect();
        if dim == 0 || header.iter().map(str::trim).ne(expected.iter().map(String::as_str)) {
            return Err(Error::Parse {
                line: 1,
                message: format!("header must be `{}`", expected.join(",")),
            });
        }

        let mut features = Vec::new();
        let mut labels = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                csv_parse(line, e)
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != dim + 1 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", dim + 1, record.len()),
                });
            }
            for field in record.iter().take(dim) {
                let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("invalid number `{field}`"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value `{field}`"),
                    });
                }
                features.push(v);
            }
            labels.push(parse_sign(&record[dim], line, "label")?);
        }
        if labels.is_empty() {
            return Err(Error::Parse {
                line: 2,
                message: "no data rows".into(),
            });
        }
        Self::from_flat(features, labels, dim)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

fn parse_sign(field: &str, line: usize, what: &str) -> Result<i8> {
    match field.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        other => Err(Error::Parse {
            line,
            message: format!("{what} `{other}` is not -1 or 1"),
        }),
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn csv_parse(line: usize, e: csv::Error) -> Error {
    Error::Parse {
        line,
        message: e.to_string(),
    }
}

/// Two isotropic Gaussian classes with equal priors.
///
/// `covariance_scale` is the variance of every coordinate (covariance
/// `covariance_scale * I`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub n: usize,
    pub d: usize,
    pub mean_pos: Vec<f64>,
    pub mean_neg: Vec<f64>,
    pub covariance_scale: f64,
    pub seed: u64,
}

impl GaussianSpec {
    /// Means at `(+1, ..., +1)` and `(-1, ..., -1)`, unit covariance.
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        let mean_pos = vec![1.0; d];
        let mean_neg = vec![-1.0; d];
        GaussianSpec {
            n,
            d,
            mean_pos,
            mean_neg,
            covariance_scale: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::validation(format!("n must be >= 2, got {}", self.n)));
        }
        if self.d < 1 {
            return Err(Error::validation("d must be >= 1"));
        }
        if self.mean_pos.len() != self.d || self.mean_neg.len() != self.d {
            return Err(Error::validation("class means must have dimension d"));
        }
        if self.mean_pos.iter().chain(&self.mean_neg).any(|v| !v.is_finite()) {
            return Err(Error::validation("class means must be finite"));
        }
        if !(self.covariance_scale > 0.0 && self.covariance_scale.is_finite()) {
            return Err(Error::validation(format!(
                "covariance_scale must be positive, got {}",
                self.covariance_scale
            )));
        }
        Ok(())
    }
}

/// Draws the dataset described by `spec`. The output is a pure function of
/// the spec, seed included.
pub fn generate_gaussian(spec: &GaussianSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let std_dev = spec.covariance_scale.sqrt();
    let mut features = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let label: i8 = if rng.random_bool(0.5) { 1 } else { -1 };
        let mean = if label == 1 {
            &spec.mean_pos
        } else {
            &spec.mean_neg
        };
        for &m in mean {
            let z: f64 = rng.sample(StandardNormal);
            features.push(m + std_dev * z);
        }
        labels.push(label);
    }
    LabeledDataset::from_flat(features, labels, spec.d)
}

/// `n x p` matrix of `y_i * G_k(x_i)`, entries in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeMatrix {
    entries: Vec<i8>,
    n: usize,
    p: usize,
}

impl OutcomeMatrix {
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        let p = rows.first().map(Vec::len).unwrap_or(0);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::validation("outcome rows have inconsistent lengths"));
        }
        let n = rows.len();
        Self::from_flat(rows.into_iter().flatten().collect(), n, p)
    }

    pub fn from_flat(entries: Vec<i8>, n: usize, p: usize) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::validation("outcome matrix must be non-empty"));
        }
        if entries.len() != n * p {
            return Err(Error::validation("outcome matrix shape mismatch"));
        }
        if entries.iter().any(|&e| e != 1 && e != -1) {
            return Err(Error::validation("outcome entries must be -1 or 1"));
        }
        Ok(OutcomeMatrix { entries, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn get(&self, i: usize, k: usize) -> i8 {
        self.entries[i * self.p + k]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.p..(i + 1) * self.p]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[i8]> + '_ {
        self.entries.chunks_exact(self.p)
    }

    /// Keeps the columns `range` (used to split an ensemble into packets).
    pub fn columns(&self, range: std::ops::Range<usize>) -> Result<Self> {
        if range.start >= range.end || range.end > self.p {
            return Err(Error::validation("column range out of bounds"));
        }
        let entries = self
            .rows()
            .flat_map(|r| r[range.clone()].iter().copied())
            .collect();
        Self::from_flat(entries, self.n, range.len())
    }

    /// Header `g1,...,gp`, one row of `-1`/`1` per example.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<String> = (1..=self.p).map(|k| format!("g{k}")).collect();
        w.write_record(&header).map_err(csv_io)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.to_string()))
                .map_err(csv_io)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(input);
        let header = reader.headers().map_err(|e| csv_parse(1, e))?.clone();
        let p = header.len();
        let expected: Vec<String> = (1..=p).map(|k| format!("g{k}")).collect();
        if p == 0 || header.iter().map(str::trim).ne(expected.iter().map(String::as_str)) {
            return Err(Error::Parse {
                line: 1,
                message: "header must be `g1,...,gp`".into(),
            });
        }
        let mut entries = Vec::new();
        let mut n = 0;
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                csv_parse(line, e)
            })?;
            let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
            if record.len() != p {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {p} columns, found {}", record.len()),
                });
            }
            for field in record.iter() {
                entries.push(parse_sign(field, line, "outcome")?);
            }
            n += 1;
        }
        if n == 0 {
            return Err(Error::Parse {
                line: 2,
                message: "no data rows".into(),
            });
        }
        Self::from_flat(entries, n, p)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Entry `(i, k)` is `+1` when classifier `k` predicts `y_i` on `x_i`.
pub fn outcome_matrix<C: Classifier>(
    dataset: &LabeledDataset,
    classifiers: &[C],
) -> Result<OutcomeMatrix> {
    if classifiers.is_empty() {
        return Err(Error::validation("need at least one classifier"));
    }
    if let Some(k) = classifiers.iter().position(|c| c.min_dim() > dataset.dim()) {
        return Err(Error::validation(format!(
            "classifier {} needs dimension >= {}, dataset has {}",
            k + 1,
            classifiers[k].min_dim(),
            dataset.dim()
        )));
    }
    let p = classifiers.len();
    let mut entries = Vec::with_capacity(dataset.len() * p);
    for (x, &y) in dataset.rows().zip(dataset.labels()) {
        entries.extend(classifiers.iter().map(|c| c.predict_unchecked(x) * y));
    }
    OutcomeMatrix::from_flat(entries, dataset.len(), p)
}
