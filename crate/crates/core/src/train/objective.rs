use super::bank::{lossy_regularizer, PriorBank};
use super::model::{log_softmax_at, softmax, Model, LEAKY_SLOPE};
use crate::math::{kl_diag_unchecked, DiagGaussian};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    /// KL to a fixed `N(0, I)` prior.
    #[serde(rename = "vib")]
    Vib,
    /// KL to the closest same-class bank center.
    #[serde(rename = "cdvib-lossless", alias = "cdvib_lossless")]
    CdvibLossless,
    /// Mean and variance KLs split against the closest center.
    #[serde(rename = "cdvib-lossy", alias = "cdvib_lossy")]
    CdvibLossy,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Vib, Objective::CdvibLossless, Objective::CdvibLossy];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Vib => "vib",
            Objective::CdvibLossless => "cdvib-lossless",
            Objective::CdvibLossy => "cdvib-lossy",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('_', "-").as_str() {
            "vib" => Ok(Objective::Vib),
            "cdvib-lossless" => Ok(Objective::CdvibLossless),
            "cdvib-lossy" => Ok(Objective::CdvibLossy),
            other => Err(Error::Config(format!("unknown objective '{other}'"))),
        }
    }
}

/// A mini-batch with one standard-normal noise vector per sample.
pub struct Batch<'a> {
    pub x: Vec<&'a [f64]>,
    pub y: Vec<usize>,
    pub noise: Vec<Vec<f64>>,
}

/// Loss, its parts, and what the bank update needs.
#[derive(Debug, Clone)]
pub struct ObjectiveValue {
    pub loss: f64,
    pub mean_kl: f64,
    pub mean_nll: f64,
    pub encodings: Vec<DiagGaussian>,
    pub assignments: Vec<usize>,
}

/// Per-sample regularizer of an encoder output under `objective`.
pub fn regularizer(objective: Objective, g: &DiagGaussian, class: usize, r: usize, bank: &PriorBank) -> f64 {
    match objective {
        Objective::Vib => {
            let (zero, one) = (vec![0.0; g.dim()], vec![1.0; g.dim()]);
            kl_diag_unchecked(&g.mean, &g.var, &zero, &one)
        }
        Objective::CdvibLossless => {
            let (cm, cv) = bank.center_ref(class, r);
            kl_diag_unchecked(&g.mean, &g.var, cm, cv)
        }
        Objective::CdvibLossy => {
            let (cm, cv) = bank.center_ref(class, r);
            lossy_regularizer(&g.mean, &g.var, cm, cv)
        }
    }
}

/// `(1/b) Σ_i [β·KL_i − ln P(y_i | u_i)]` and its gradient with respect to
/// every model tensor.
///
/// Centers are constants here; they move only through
/// [`PriorBank::update`]. The VIB objective ignores `bank`.
pub fn objective(
    model: &Model,
    batch: &Batch<'_>,
    bank: &PriorBank,
    kind: Objective,
    beta: f64,
) -> Result<(ObjectiveValue, Model)> {
    let b = batch.x.len();
    if b == 0 || batch.y.len() != b || batch.noise.len() != b {
        return Err(Error::Domain("batch must be nonempty with matching labels and noise".into()));
    }
    let inv_b = 1.0 / b as f64;
    let mut grad = model.zeros_like();
    let (mut kl_sum, mut nll_sum) = (0.0, 0.0);
    let mut encodings = Vec::with_capacity(b);
    let mut assignments = Vec::with_capacity(b);

    for i in 0..b {
        let (x, y, eps) = (batch.x[i], batch.y[i], &batch.noise[i]);
        if x.len() != model.input_dim() || eps.len() != model.latent_dim() {
            return Err(Error::DimensionMismatch { expected: model.input_dim(), got: x.len() });
        }
        if y >= model.num_classes() {
            return Err(Error::Domain(format!("label {y} outside 0..{}", model.num_classes())));
        }
        let t = model.trace(x);
        let sd: Vec<f64> = t.logvar.iter().map(|lv| (0.5 * lv).exp()).collect();
        let var: Vec<f64> = sd.iter().map(|s| s * s).collect();
        let u: Vec<f64> = (0..sd.len()).map(|j| t.mean[j] + sd[j] * eps[j]).collect();
        let logits = model.logits(&u);
        let g = DiagGaussian { mean: t.mean.clone(), var: var.clone() };

        let r = match kind {
            Objective::Vib => 0,
            _ => bank.assign(&g, y)?,
        };
        kl_sum += regularizer(kind, &g, y, r, bank);
        nll_sum -= log_softmax_at(&logits, y);

        // cross-entropy through the decoder and the reparameterization
        let mut dlogits = softmax(&logits);
        dlogits[y] -= 1.0;
        dlogits.iter_mut().for_each(|v| *v *= inv_b);
        grad.w_dec.add_outer(&dlogits, &u);
        grad.b_dec.add(&dlogits);
        let du = model.w_dec.transpose_mul(&dlogits);
        let mut dmean = du.clone();
        let mut dlogvar: Vec<f64> = (0..du.len()).map(|j| du[j] * eps[j] * sd[j] * 0.5).collect();

        // regularizer, scaled by β/b
        let s = beta * inv_b;
        for j in 0..dmean.len() {
            let (dm, dv) = match kind {
                Objective::Vib => (t.mean[j], 0.5 * (var[j] - 1.0)),
                Objective::CdvibLossless => {
                    let (cm, cv) = bank.center_ref(y, r);
                    ((t.mean[j] - cm[j]) / cv[j], 0.5 * (var[j] / cv[j] - 1.0))
                }
                Objective::CdvibLossy => {
                    let (cm, cv) = bank.center_ref(y, r);
                    (t.mean[j] - cm[j], 0.5 * (var[j] / cv[j] - 1.0))
                }
            };
            dmean[j] += s * dm;
            dlogvar[j] += s * dv;
        }

        grad.w_mean.add_outer(&dmean, &t.hidden);
        grad.b_mean.add(&dmean);
        grad.w_logvar.add_outer(&dlogvar, &t.hidden);
        grad.b_logvar.add(&dlogvar);
        let dh_mean = model.w_mean.transpose_mul(&dmean);
        let dh_var = model.w_logvar.transpose_mul(&dlogvar);
        let dpre: Vec<f64> = (0..t.pre.len())
            .map(|k| (dh_mean[k] + dh_var[k]) * if t.pre[k] > 0.0 { 1.0 } else { LEAKY_SLOPE })
            .collect();
        grad.w_hidden.add_outer(&dpre, x);
        grad.b_hidden.add(&dpre);

        encodings.push(g);
        assignments.push(r);
    }

    let mean_kl = kl_sum * inv_b;
    let mean_nll = nll_sum * inv_b;
    let loss = beta * mean_kl + mean_nll;
    if !loss.is_finite() {
        return Err(Error::Divergence(format!("loss is {loss}")));
    }
    Ok((ObjectiveValue { loss, mean_kl, mean_nll, encodings, assignments }, grad))
}
