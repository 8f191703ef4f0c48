use super::bank::{BankMode, PriorBank};
use super::data::Dataset;
use super::model::{log_softmax_at, Model};
use super::objective::{objective, regularizer, Batch, Objective};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Default number of latent draws at evaluation time.
pub const TEST_SAMPLES: usize = 12;

/// Hyper-parameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct TrainConfig {
    pub objective: Objective,
    pub beta: f64,
    pub alpha: f64,
    pub centers_per_class: usize,
    pub latent_dim: usize,
    pub hidden: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub test_samples: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            objective: Objective::Vib,
            beta: 1e-3,
            alpha: 0.01,
            centers_per_class: 1,
            latent_dim: 8,
            hidden: 32,
            batch_size: 32,
            epochs: 20,
            learning_rate: 0.05,
            lr_decay: 0.97,
            test_samples: TEST_SAMPLES,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return bad("beta must be a finite non-negative number");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1]");
        }
        if self.alpha * self.batch_size as f64 > 1.0 {
            return Err(Error::Config(format!(
                "alpha * batch-size = {} exceeds 1; the moving average would take negative weight",
                self.alpha * self.batch_size as f64
            )));
        }
        if self.centers_per_class == 0 || self.latent_dim == 0 || self.hidden == 0 || self.batch_size == 0 {
            return bad("centers-per-class, latent-dim, hidden and batch-size must be positive");
        }
        if !(self.learning_rate > 0.0) || !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("learning-rate must be positive and lr-decay in (0, 1]");
        }
        if self.test_samples == 0 {
            return bad("test-samples must be positive");
        }
        Ok(())
    }

    /// Bank matching the objective; VIB gets a frozen single-center bank,
    /// which is exactly its `N(0, I)` prior.
    pub fn initial_bank(&self, num_classes: usize) -> Result<PriorBank> {
        match self.objective {
            Objective::Vib => PriorBank::new(num_classes, 1, self.latent_dim, 0.0, BankMode::Lossless),
            Objective::CdvibLossless => {
                PriorBank::new(num_classes, self.centers_per_class, self.latent_dim, self.alpha, BankMode::Lossless)
            }
            Objective::CdvibLossy => {
                PriorBank::new(num_classes, self.centers_per_class, self.latent_dim, self.alpha, BankMode::Lossy)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One line of the history CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub epoch: usize,
    pub split: Split,
    pub accuracy: f64,
    pub loss: f64,
    pub mean_kl: f64,
}

/// Accuracy, objective value and mean regularizer on a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalStats {
    pub accuracy: f64,
    pub loss: f64,
    pub mean_kl: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    pub bank: PriorBank,
    pub history: Vec<HistoryRow>,
    /// Set when training stopped on a non-finite loss; `model` and `bank`
    /// then hold the last good state.
    pub divergence: Option<String>,
}

pub(crate) fn noise_block<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..rows).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Evaluates with `samples` latent draws per input. Accuracy uses the
/// argmax of the averaged softmax; the loss averages `β·KL − ln P(y|u)`
/// over draws.
pub fn evaluate<R: Rng + ?Sized>(
    model: &Model,
    bank: &PriorBank,
    kind: Objective,
    beta: f64,
    data: &Dataset,
    samples: usize,
    rng: &mut R,
) -> Result<EvalStats> {
    if data.is_empty() {
        return Err(Error::Domain("cannot evaluate on an empty dataset".into()));
    }
    let (mut correct, mut loss, mut kl) = (0usize, 0.0, 0.0);
    for i in 0..data.len() {
        let (x, y) = (data.x(i), data.y(i));
        let g = model.encode(x)?;
        let r = if kind == Objective::Vib { 0 } else { bank.assign(&g, y)? };
        let reg = regularizer(kind, &g, y, r, bank);
        let mut avg = vec![0.0; model.num_classes()];
        let mut nll = 0.0;
        for eps in noise_block(samples, model.latent_dim(), rng) {
            let u = super::model::sample_latent(&g, &eps)?;
            let logits = model.logits(&u);
            nll -= log_softmax_at(&logits, y);
            for (a, p) in avg.iter_mut().zip(super::model::softmax(&logits)) {
                *a += p;
            }
        }
        let pred = argmax(&avg);
        correct += usize::from(pred == y);
        loss += beta * reg + nll / samples as f64;
        kl += reg;
    }
    let n = data.len() as f64;
    Ok(EvalStats { accuracy: correct as f64 / n, loss: loss / n, mean_kl: kl / n })
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn eval_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + epoch as u64);
    rng
}

/// SGD with per-epoch learning-rate decay. Each step applies the gradient
/// first and then updates the bank with that batch's encoder outputs.
pub fn train(config: &TrainConfig, data: &Dataset, test: Option<&Dataset>) -> Result<TrainOutcome> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::Domain("training set is empty".into()));
    }
    if let Some(t) = test {
        if t.dim() != data.dim() || t.num_classes() != data.num_classes() {
            return Err(Error::Schema("test set shape differs from the training set".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Model::init(data.dim(), config.hidden, config.latent_dim, data.num_classes(), &mut rng);
    let mut bank = config.initial_bank(data.num_classes())?;
    let mut history = Vec::new();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut lr = config.learning_rate;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch = Batch {
                x: chunk.iter().map(|&i| data.x(i)).collect(),
                y: chunk.iter().map(|&i| data.y(i)).collect(),
                noise: noise_block(chunk.len(), config.latent_dim, &mut rng),
            };
            let (value, grad) = match objective(&model, &batch, &bank, config.objective, config.beta) {
                Ok(v) => v,
                Err(Error::Divergence(msg)) => return Ok(diverged(model, bank, history, epoch, msg)),
                Err(e) => return Err(e),
            };
            if grad.tensors().iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
                return Ok(diverged(model, bank, history, epoch, "non-finite gradient".into()));
            }
            let mut next = model.clone();
            for (p, g) in next.tensors_mut().into_iter().zip(grad.tensors()) {
                for (w, d) in p.data.iter_mut().zip(&g.data) {
                    *w -= lr * d;
                }
            }
            if next.tensors().iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
                return Ok(diverged(model, bank, history, epoch, "parameters left the finite range".into()));
            }
            model = next;
            if config.objective != Objective::Vib {
                let update: Vec<_> = batch
                    .y
                    .iter()
                    .zip(&value.assignments)
                    .zip(&value.encodings)
                    .map(|((&k, &r), g)| (k, r, g))
                    .collect();
                bank.update(&update)?;
            }
        }
        lr *= config.lr_decay;

        let mut erng = eval_rng(config.seed, epoch);
        let splits = [(Split::Train, Some(data)), (Split::Test, test)];
        for (split, set) in splits {
            let Some(set) = set.filter(|s| !s.is_empty()) else { continue };
            match evaluate(&model, &bank, config.objective, config.beta, set, config.test_samples, &mut erng) {
                Ok(s) if s.loss.is_finite() => {
                    history.push(HistoryRow { epoch, split, accuracy: s.accuracy, loss: s.loss, mean_kl: s.mean_kl })
                }
                Ok(s) => return Ok(diverged(model, bank, history, epoch, format!("evaluation loss is {}", s.loss))),
                Err(Error::Divergence(msg)) => return Ok(diverged(model, bank, history, epoch, msg)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(TrainOutcome { model, bank, history, divergence: None })
}

fn diverged(model: Model, bank: PriorBank, history: Vec<HistoryRow>, epoch: usize, msg: String) -> TrainOutcome {
    TrainOutcome { model, bank, history, divergence: Some(format!("epoch {epoch}: {msg}")) }
}

/// Writes `epoch,split,accuracy,loss,mean_kl`.
pub fn write_history_csv<W: std::io::Write>(rows: &[HistoryRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["epoch", "split", "accuracy", "loss", "mean_kl"]).map_err(|e| Error::Schema(e.to_string()))?;
    for r in rows {
        w.write_record([
            r.epoch.to_string(),
            r.split.name().to_string(),
            format!("{:.10}", r.accuracy),
            format!("{:.10}", r.loss),
            format!("{:.10}", r.mean_kl),
        ])
        .map_err(|e| Error::Schema(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}
