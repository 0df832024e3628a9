//! Labeled datasets with features confined to the unit box.

use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::{unit_clip, Label};

/// Per-dimension affine map `v -> (v - min) / (max - min)` applied at ingestion.
/// A degenerate range (`max == min`) sends every value to 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub min: f64,
    pub max: f64,
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler { min: 0.0, max: 1.0 };

    pub fn fit(column: impl Iterator<Item = f64>) -> Self {
        let (min, max) = column.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        Scaler { min, max }
    }

    pub fn apply(&self, v: f64) -> f64 {
        if self.max > self.min {
            unit_clip((v - self.min) / (self.max - self.min))
        } else {
            0.5
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<Label>,
    dim: usize,
    p_hat: f64,
    scaler: Vec<Scaler>,
}

impl Dataset {
    /// Builds a dataset from features that are already in `[0, 1]`.
    pub fn new(features: Vec<f64>, labels: Vec<Label>, dim: usize, scaler: Vec<Scaler>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dataset("feature dimension must be at least 1".into()));
        }
        if features.len() != labels.len() * dim {
            return Err(Error::Dataset(format!(
                "{} feature values for {} labels of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if scaler.len() != dim {
            return Err(Error::Dataset(format!("scaler has {} entries, expected {dim}", scaler.len())));
        }
        if let Some(bad) = features.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Dataset(format!("feature value {bad} outside [0, 1]")));
        }
        let p_hat = positive_fraction(&labels);
        Ok(Self {
            features,
            labels,
            dim,
            p_hat,
            scaler,
        })
    }

    /// Min-max normalizes every column unconditionally.
    pub fn from_raw_min_max(raw: Vec<f64>, labels: Vec<Label>, dim: usize) -> Result<Self> {
        Self::from_raw_with(raw, labels, dim, |_| true)
    }

    /// Ingestion rule for external data: columns already inside `[0, 1]` are
    /// kept verbatim, every other column is min-max normalized.
    pub fn ingest(raw: Vec<f64>, labels: Vec<Label>, dim: usize) -> Result<Self> {
        Self::from_raw_with(raw, labels, dim, |col| col.iter().any(|v| !(0.0..=1.0).contains(v)))
    }

    fn from_raw_with(
        mut raw: Vec<f64>,
        labels: Vec<Label>,
        dim: usize,
        needs_scaling: impl Fn(&[f64]) -> bool,
    ) -> Result<Self> {
        if dim == 0 || raw.len() != labels.len() * dim {
            return Err(Error::Dataset("feature matrix shape does not match labels".into()));
        }
        if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::Dataset(format!("non-finite feature value {bad}")));
        }
        let n = labels.len();
        let mut scaler = Vec::with_capacity(dim);
        for k in 0..dim {
            let column: Vec<f64> = (0..n).map(|i| raw[i * dim + k]).collect();
            let s = if needs_scaling(&column) {
                Scaler::fit(column.iter().copied())
            } else {
                Scaler::IDENTITY
            };
            if s != Scaler::IDENTITY {
                for i in 0..n {
                    raw[i * dim + k] = s.apply(raw[i * dim + k]);
                }
            }
            scaler.push(s);
        }
        Self::new(raw, labels, dim, scaler)
    }

    /// Maps raw features through an existing scaler (e.g. the training one).
    pub fn with_scaler(mut raw: Vec<f64>, labels: Vec<Label>, scaler: Vec<Scaler>) -> Result<Self> {
        let dim = scaler.len();
        if dim == 0 || raw.len() != labels.len() * dim {
            return Err(Error::Dataset("feature matrix shape does not match labels".into()));
        }
        for (i, v) in raw.iter_mut().enumerate() {
            *v = scaler[i % dim].apply(*v);
        }
        Self::new(raw, labels, dim, scaler)
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

    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn scaler(&self) -> &[Scaler] {
        &self.scaler
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn n_pos(&self) -> usize {
        self.labels.iter().filter(|l| l.is_positive()).count()
    }

    pub fn n_neg(&self) -> usize {
        self.len() - self.n_pos()
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i].is_positive()).collect()
    }

    pub fn has_both_classes(&self) -> bool {
        let pos = self.n_pos();
        pos > 0 && pos < self.len()
    }

    /// Sub-dataset of the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        let mut labels = Vec::with_capacity(rows.len());
        for &i in rows {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let p_hat = positive_fraction(&labels);
        Self {
            features,
            labels,
            dim: self.dim,
            p_hat,
            scaler: self.scaler.clone(),
        }
    }
}

fn positive_fraction(labels: &[Label]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    labels.iter().filter(|l| l.is_positive()).count() as f64 / labels.len() as f64
}

/// Gaussian blob parameters for [`gen_synthetic`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlobSpec {
    pub mu_pos: f64,
    pub mu_neg: f64,
    pub sigma: f64,
}

impl Default for BlobSpec {
    fn default() -> Self {
        Self {
            mu_pos: 0.65,
            mu_neg: 0.35,
            sigma: 0.15,
        }
    }
}

/// `n / 2` positives around `mu_pos * 1`, the rest around `mu_neg * 1`, then
/// min-max normalized per dimension.
pub fn gen_synthetic(n: usize, d: usize, blobs: BlobSpec, seed: u64) -> Result<Dataset> {
    if n < 4 {
        return Err(Error::Config(format!("need at least 4 examples, got {n}")));
    }
    if d == 0 {
        return Err(Error::Config("dimension must be at least 1".into()));
    }
    if !(blobs.sigma > 0.0 && blobs.sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be positive, got {}", blobs.sigma)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, blobs.sigma).map_err(|e| Error::Config(format!("{e}")))?;
    let n_pos = n / 2;
    let mut raw = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (mu, y) = if i < n_pos {
            (blobs.mu_pos, Label::Positive)
        } else {
            (blobs.mu_neg, Label::Negative)
        };
        for _ in 0..d {
            raw.push(mu + noise.sample(&mut rng));
        }
        labels.push(y);
    }
    Dataset::from_raw_min_max(raw, labels, d)
}

/// Subsamples positives so that the positive fraction becomes `ratio`.
/// Negatives are untouched and relative order is preserved.
pub fn make_long_tailed(ds: &Dataset, ratio: f64, seed: u64) -> Result<Dataset> {
    if !(ratio > 0.0) {
        return Err(Error::Config(format!("ratio must be positive, got {ratio}")));
    }
    if ratio > ds.p_hat() + 1e-12 {
        return Err(Error::Config(format!(
            "ratio {ratio} exceeds the current positive fraction {}",
            ds.p_hat()
        )));
    }
    let n_neg = ds.n_neg();
    // the slack absorbs representation error when ratio equals the current fraction
    let target = libm::floor(ratio * n_neg as f64 / (1.0 - ratio) + 1e-9) as usize;
    let positives = ds.positive_indices();
    let keep_pos = target.min(positives.len());
    if keep_pos < 1 {
        return Err(Error::Config(format!("ratio {ratio} would leave zero positives")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = alloc::vec![false; ds.len()];
    for j in index::sample(&mut rng, positives.len(), keep_pos) {
        keep[positives[j]] = true;
    }
    let rows: Vec<usize> = (0..ds.len())
        .filter(|&i| !ds.label(i).is_positive() || keep[i])
        .collect();
    Ok(ds.select(&rows))
}

/// Adds i.i.d. Gaussian noise and clips back into the unit box.
pub fn corrupt(ds: &Dataset, sigma: f64, seed: u64) -> Result<Dataset> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!("sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(ds.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("{e}")))?;
    let mut out = ds.clone();
    for v in out.features.iter_mut() {
        *v = unit_clip(*v + noise.sample(&mut rng));
    }
    Ok(out)
}
