use crate::{Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::Path;

/// Labeled feature matrix; labels are 0-based class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, dim: usize, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("feature dimension must be positive".into()));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::DimensionMismatch { expected: dim * labels.len(), got: features.len() });
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::Domain(format!("label {y} outside 0..{num_classes}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite feature".into()));
        }
        Ok(Self { features, dim, labels, num_classes })
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

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Per-class feature means; `None` for classes with no samples.
    pub fn class_means(&self) -> Vec<Option<Vec<f64>>> {
        let mut sums = vec![vec![0.0; self.dim]; self.num_classes];
        let mut counts = vec![0usize; self.num_classes];
        for i in 0..self.len() {
            counts[self.y(i)] += 1;
            for (s, v) in sums[self.y(i)].iter_mut().zip(self.x(i)) {
                *s += v;
            }
        }
        sums.into_iter()
            .zip(counts)
            .map(|(s, c)| (c > 0).then(|| s.into_iter().map(|v| v / c as f64).collect()))
            .collect()
    }

    /// Writes `x0,…,x{d-1},label` rows with a header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        let mut header: Vec<String> = (0..self.dim).map(|j| format!("x{j}")).collect();
        header.push("label".into());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..self.len() {
            let mut rec: Vec<String> = self.x(i).iter().map(|v| format!("{v:?}")).collect();
            rec.push(self.y(i).to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`Dataset::write_csv`]; the last column is the label.
    pub fn read_csv(path: &Path, num_classes: usize) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let dim = r.headers().map_err(csv_err)?.len().checked_sub(1).filter(|&d| d > 0);
        let dim = dim.ok_or_else(|| Error::Schema("dataset CSV needs features and a label column".into()))?;
        let (mut features, mut labels) = (Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            for field in rec.iter().take(dim) {
                features.push(field.trim().parse::<f64>().map_err(|e| Error::Schema(e.to_string()))?);
            }
            labels.push(rec[dim].trim().parse::<usize>().map_err(|e| Error::Schema(e.to_string()))?);
        }
        Self::new(features, dim, labels, num_classes)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Schema(e.to_string())
}

/// Class-conditional generator; classes are drawn uniformly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    /// Isotropic Gaussian per class.
    Blobs { means: Vec<Vec<f64>>, std: f64 },
    /// 2-D rings: radius per class, uniform angle, Gaussian radial noise.
    Rings { radii: Vec<f64>, noise: f64 },
}

impl GeneratorSpec {
    /// Two classes at `±(separation/2, 0)` with unit variance.
    pub fn two_blobs(separation: f64) -> Self {
        let h = separation / 2.0;
        GeneratorSpec::Blobs { means: vec![vec![-h, 0.0], vec![h, 0.0]], std: 1.0 }
    }

    /// Four classes at `(±s, ±s)` with unit variance. The Bayes rule picks the
    /// quadrant, so its accuracy is `Φ(s)²`.
    pub fn quadrants(s: f64) -> Self {
        GeneratorSpec::Blobs { means: vec![vec![s, s], vec![-s, s], vec![-s, -s], vec![s, -s]], std: 1.0 }
    }

    pub fn num_classes(&self) -> usize {
        match self {
            GeneratorSpec::Blobs { means, .. } => means.len(),
            GeneratorSpec::Rings { radii, .. } => radii.len(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            GeneratorSpec::Blobs { means, .. } => means.first().map_or(0, Vec::len),
            GeneratorSpec::Rings { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes() < 2 {
            return Err(Error::Config("generator needs at least two classes".into()));
        }
        match self {
            GeneratorSpec::Blobs { means, std } => {
                let d = self.dim();
                if d == 0 || means.iter().any(|m| m.len() != d) {
                    return Err(Error::Config("blob means must share a positive dimension".into()));
                }
                if !(*std > 0.0) {
                    return Err(Error::Config("blob std must be positive".into()));
                }
            }
            GeneratorSpec::Rings { radii, noise } => {
                if radii.iter().any(|r| !(*r >= 0.0)) || !(*noise >= 0.0) {
                    return Err(Error::Config("ring radii and noise must be non-negative".into()));
                }
            }
        }
        Ok(())
    }

    /// Draws `n` i.i.d. labeled samples.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Dataset> {
        self.validate()?;
        let k = self.num_classes();
        let mut features = Vec::with_capacity(n * self.dim());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let y = rng.random_range(0..k);
            match self {
                GeneratorSpec::Blobs { means, std } => {
                    for &mu in &means[y] {
                        let z: f64 = rng.sample(StandardNormal);
                        features.push(mu + std * z);
                    }
                }
                GeneratorSpec::Rings { radii, noise } => {
                    let angle = rng.random::<f64>() * TAU;
                    let z: f64 = rng.sample(StandardNormal);
                    let r = radii[y] + noise * z;
                    features.push(r * angle.cos());
                    features.push(r * angle.sin());
                }
            }
            labels.push(y);
        }
        Dataset::new(features, self.dim(), labels, k)
    }
}

/// Generator plus split sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DataSpec {
    pub generator: GeneratorSpec,
    pub n_train: usize,
    pub n_test: usize,
}

/// Training set and ghost (test) set drawn from the same generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Dataset,
    pub ghost: Dataset,
}

/// Draws the training and ghost sets from independent ChaCha streams of
/// the same seed, so neither depends on the other's size.
pub fn synth_dataset(spec: &DataSpec, seed: u64) -> Result<DataSplit> {
    let mut train_rng = ChaCha8Rng::seed_from_u64(seed);
    train_rng.set_stream(1);
    let mut ghost_rng = ChaCha8Rng::seed_from_u64(seed);
    ghost_rng.set_stream(2);
    Ok(DataSplit {
        train: spec.generator.sample(spec.n_train, &mut train_rng)?,
        ghost: spec.generator.sample(spec.n_test, &mut ghost_rng)?,
    })
}
