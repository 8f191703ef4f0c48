use super::bank::PriorBank;
use super::data::DataSpec;
use super::model::Model;
use super::trainer::TrainConfig;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CHECKPOINT_FORMAT: &str = "mdlb-checkpoint/1";

/// Trained parameters, bank state and enough provenance to regenerate the
/// data they were fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub config: TrainConfig,
    pub data: Option<DataSpec>,
    pub data_seed: u64,
    pub model: Model,
    pub bank: PriorBank,
}

impl Checkpoint {
    pub fn new(config: TrainConfig, data: Option<DataSpec>, data_seed: u64, model: Model, bank: PriorBank) -> Self {
        Self { format: CHECKPOINT_FORMAT.into(), config, data, data_seed, model, bank }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses and checks format tag, tensor shapes and bank dimensions.
    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT {
            return Err(Error::Schema(format!("unsupported checkpoint format '{}'", c.format)));
        }
        c.model.validate()?;
        if c.bank.latent_dim != c.model.latent_dim() || c.bank.num_classes != c.model.num_classes() {
            return Err(Error::Schema("bank and model dimensions disagree".into()));
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::bank::BankMode;
    use crate::train::data::GeneratorSpec;

    fn sample() -> Checkpoint {
        let data = DataSpec { generator: GeneratorSpec::two_blobs(3.0), n_train: 10, n_test: 10 };
        Checkpoint::new(
            TrainConfig::default(),
            Some(data),
            4,
            Model::zeros(2, 3, 8, 2),
            PriorBank::new(2, 1, 8, 0.0, BankMode::Lossless).unwrap(),
        )
    }

    #[test]
    fn round_trip() {
        let c = sample();
        assert_eq!(Checkpoint::from_json(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn rejects_mismatched_bank() {
        let mut c = sample();
        c.bank = PriorBank::new(2, 1, 3, 0.0, BankMode::Lossless).unwrap();
        assert!(matches!(Checkpoint::from_json(&c.to_json().unwrap()), Err(Error::Schema(_))));
        assert!(Checkpoint::from_json("{\"format\": 1}").is_err());
    }
}
