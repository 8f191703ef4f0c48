//! Encoder/decoder training with VIB and category-dependent VIB objectives.
//!
//! The encoder maps `x` through one LeakyReLU(0.1) hidden layer to a mean
//! head and a log-variance head; the decoder is linear followed by softmax.
//! Gradients are derived by hand and checked against finite differences.
//!
//! The CDVIB variants replace VIB's fixed `N(0, I)` prior with a
//! [`PriorBank`] of `M` Gaussian centers per class. Centers are never
//! differentiated; after each SGD step they move by a moving average of
//! the encoder outputs assigned to them.

mod bank;
mod checkpoint;
mod data;
mod model;
mod objective;
mod trainer;

pub use bank::{BankMode, PriorBank};
pub use checkpoint::{Checkpoint, CHECKPOINT_FORMAT};
pub use data::{synth_dataset, DataSpec, DataSplit, Dataset, GeneratorSpec};
pub use model::{sample_latent, Model, Tensor, TENSOR_NAMES};
pub use objective::{objective, regularizer, Batch, Objective, ObjectiveValue};
pub(crate) use trainer::noise_block;
pub use trainer::{
    evaluate, train, write_history_csv, EvalStats, HistoryRow, Split, TrainConfig, TrainOutcome, TEST_SAMPLES,
};
