use crate::oracle::{copy_label_setup, CoverMode};
use crate::priors::{DiscreteConditional, RearrangementJoint};
use crate::train::{DataSpec, GeneratorSpec, Objective, TrainConfig};
use crate::{Error, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Parses TOML, or JSON when the file ends in `.json`.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::Config(format!("{} is not UTF-8", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let value = if is_json {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    } else {
        toml::from_str(text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
    };
    Ok((value, bytes))
}

/// Input of `mdlb train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSpec,
    #[serde(default)]
    pub train: TrainConfig,
    /// Trains each objective in turn instead of `train.objective`.
    #[serde(default)]
    pub objectives: Option<Vec<Objective>>,
    /// Independent training seeds per objective; bands are drawn from 3 on.
    #[serde(default = "one")]
    pub repeats: usize,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.data.generator.validate()?;
        if self.data.n_train == 0 {
            return Err(Error::Config("data.n-train must be positive".into()));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be positive".into()));
        }
        if self.objectives.as_ref().is_some_and(Vec::is_empty) {
            return Err(Error::Config("objectives must not be empty".into()));
        }
        self.train.validate()
    }

    /// Objectives to run, in order, and whether this is a sweep.
    pub fn objective_list(&self) -> (Vec<Objective>, bool) {
        match &self.objectives {
            Some(list) => (list.clone(), true),
            None => (vec![self.train.objective], false),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataSpec { generator: GeneratorSpec::two_blobs(4.0), n_train: 500, n_test: 500 },
            train: TrainConfig::default(),
            objectives: None,
            repeats: 1,
        }
    }
}

/// Input of `mdlb covering-sim`. Without explicit tables the copy-label
/// experiment is used: fair binary labels, a predictor that copies them and
/// a prior that keeps each label with probability `agree`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct CoveringConfig {
    pub n: usize,
    pub agree: f64,
    pub blocks: usize,
    pub rates: Vec<f64>,
    pub trials: usize,
    pub mode: CoverMode,
    pub label_dist: Option<Vec<f64>>,
    pub predictor: Option<DiscreteConditional>,
    pub prior: Option<DiscreteConditional>,
}

impl Default for CoveringConfig {
    fn default() -> Self {
        Self {
            n: 1,
            agree: 0.8,
            blocks: 8,
            rates: (0..6).map(|i| 0.2 * i as f64).collect(),
            trials: 400,
            mode: CoverMode::Lossless,
            label_dist: None,
            predictor: None,
            prior: None,
        }
    }
}

impl CoveringConfig {
    /// Predictor joint and prior; the KL is only known for the copy-label case.
    pub fn tables(&self) -> Result<(RearrangementJoint, DiscreteConditional, Option<f64>)> {
        match (&self.predictor, &self.prior) {
            (None, None) => {
                if !(self.agree > 0.0 && self.agree <= 1.0) {
                    return Err(Error::Config("agree must lie in (0, 1]".into()));
                }
                let (joint, prior, kl) = copy_label_setup(self.n, self.agree)?;
                Ok((joint, prior, Some(kl)))
            }
            (Some(p), Some(q)) => {
                let k = p.label_alphabet();
                let dist = self.label_dist.clone().unwrap_or_else(|| vec![1.0 / k as f64; k]);
                Ok((RearrangementJoint::new(dist, p.clone())?, q.clone(), None))
            }
            _ => Err(Error::Config("predictor and prior must be given together".into())),
        }
    }
}
