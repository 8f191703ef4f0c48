use crate::train::{Dataset, Model, PriorBank};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Closed-form latent KL summed over the training and ghost samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentKl {
    pub total: f64,
    pub mean: f64,
    /// Standard error of `mean` across samples.
    pub std_error: f64,
    pub count: usize,
}

fn check_compatible(model: &Model, data: &Dataset) -> Result<()> {
    if data.dim() != model.input_dim() {
        return Err(Error::DimensionMismatch { expected: model.input_dim(), got: data.dim() });
    }
    if let Some(&y) = data.labels().iter().find(|&&y| y >= model.num_classes()) {
        return Err(Error::Domain(format!("label {y} outside 0..{}", model.num_classes())));
    }
    Ok(())
}

/// `Σ_i KL(encoder(x_i) ‖ assigned center)` over all `2n` samples, using
/// the bank's own assignment rule and regularizer. Because the prior
/// factorizes over samples, the block KL is this per-sample sum.
pub fn estimate_latent_kl(train: &Dataset, ghost: &Dataset, model: &Model, bank: &PriorBank) -> Result<LatentKl> {
    if train.is_empty() || ghost.is_empty() {
        return Err(Error::Domain("latent KL needs nonempty training and ghost sets".into()));
    }
    if bank.latent_dim != model.latent_dim() {
        return Err(Error::DimensionMismatch { expected: model.latent_dim(), got: bank.latent_dim });
    }
    let mut values = Vec::with_capacity(train.len() + ghost.len());
    for data in [train, ghost] {
        check_compatible(model, data)?;
        for i in 0..data.len() {
            let g = model.encode(data.x(i))?;
            let r = bank.assign(&g, data.y(i))?;
            values.push(bank.regularizer(&g, data.y(i), r));
        }
    }
    let count = values.len();
    let total: f64 = values.iter().sum();
    let mean = total / count as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count.max(2) - 1) as f64;
    Ok(LatentKl { total, mean, std_error: (var / count as f64).sqrt(), count })
}

const SHARD: usize = 256;

/// Per-sample `1 − P(ŷ = y | x)` with the predictive averaged over
/// `samples` reparameterized draws. Shards of 256 samples each use their
/// own ChaCha stream, so the result does not depend on the worker count.
pub fn expected_zero_one_losses(model: &Model, data: &Dataset, samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_compatible(model, data)?;
    if samples == 0 {
        return Err(Error::Domain("need at least one latent sample".into()));
    }
    let shards: Vec<usize> = (0..data.len().div_ceil(SHARD)).collect();
    let parts: Vec<Result<Vec<f64>>> = crate::with_pool(|| {
        shards
            .par_iter()
            .map(|&s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                (s * SHARD..((s + 1) * SHARD).min(data.len()))
                    .map(|i| {
                        let noise = crate::train::noise_block(samples, model.latent_dim(), &mut rng);
                        Ok(1.0 - model.predictive(data.x(i), &noise)?[data.y(i)])
                    })
                    .collect()
            })
            .collect()
    });
    let mut out = Vec::with_capacity(data.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub train_risk: f64,
    pub test_risk: f64,
    pub gap: f64,
}

/// Mean expected 0-1 loss on `test` minus the same on `train`. The two
/// sets draw latent noise from different seeds derived from `seed`.
pub fn empirical_gap(model: &Model, train: &Dataset, test: &Dataset, samples: usize, seed: u64) -> Result<GapEstimate> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::Domain("empirical gap needs nonempty sets".into()));
    }
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let train_risk = mean(expected_zero_one_losses(model, train, samples, seed)?);
    let test_risk = mean(expected_zero_one_losses(model, test, samples, seed.wrapping_add(0x9E37_79B9_7F4A_7C15))?);
    Ok(GapEstimate { train_risk, test_risk, gap: test_risk - train_risk })
}
