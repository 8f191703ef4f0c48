use crate::math::DiagGaussian;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub(crate) const LEAKY_SLOPE: f64 = 0.1;

/// Row-major dense matrix (a bias is a `rows × 1` tensor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols).map(|_| rng.random_range(-scale..scale)).collect();
        Self { rows, cols, data }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// `self · v + bias`.
    fn affine(&self, bias: &Tensor, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                let row = &self.data[r * self.cols..(r + 1) * self.cols];
                bias.data[r] + row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }

    /// `selfᵀ · g`.
    pub(crate) fn transpose_mul(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &gr) in g.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(&self.data[r * self.cols..(r + 1) * self.cols]) {
                *o += w * gr;
            }
        }
        out
    }

    /// `self += g ⊗ v`.
    pub(crate) fn add_outer(&mut self, g: &[f64], v: &[f64]) {
        for (r, &gr) in g.iter().enumerate() {
            for (w, x) in self.data[r * self.cols..(r + 1) * self.cols].iter_mut().zip(v) {
                *w += gr * x;
            }
        }
    }

    pub(crate) fn add(&mut self, g: &[f64]) {
        for (w, x) in self.data.iter_mut().zip(g) {
            *w += x;
        }
    }

    fn check_shape(&self, name: &str, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols || self.data.len() != rows * cols {
            return Err(Error::Schema(format!(
                "{name}: expected {rows}x{cols}, found {}x{} with {} values",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(())
    }
}

/// Stochastic encoder `x ↦ N(μ_x, diag σ_x²)` followed by a linear-softmax
/// decoder. The same struct also stores gradients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub w_hidden: Tensor,
    pub b_hidden: Tensor,
    pub w_mean: Tensor,
    pub b_mean: Tensor,
    pub w_logvar: Tensor,
    pub b_logvar: Tensor,
    pub w_dec: Tensor,
    pub b_dec: Tensor,
}

pub const TENSOR_NAMES: [&str; 8] =
    ["w_hidden", "b_hidden", "w_mean", "b_mean", "w_logvar", "b_logvar", "w_dec", "b_dec"];

/// Intermediate values of one encoder pass, kept for backprop.
pub(crate) struct EncoderTrace {
    pub pre: Vec<f64>,
    pub hidden: Vec<f64>,
    pub mean: Vec<f64>,
    pub logvar: Vec<f64>,
}

impl Model {
    pub fn zeros(input_dim: usize, hidden: usize, latent: usize, classes: usize) -> Self {
        Self {
            w_hidden: Tensor::zeros(hidden, input_dim),
            b_hidden: Tensor::zeros(hidden, 1),
            w_mean: Tensor::zeros(latent, hidden),
            b_mean: Tensor::zeros(latent, 1),
            w_logvar: Tensor::zeros(latent, hidden),
            b_logvar: Tensor::zeros(latent, 1),
            w_dec: Tensor::zeros(classes, latent),
            b_dec: Tensor::zeros(classes, 1),
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(input_dim: usize, hidden: usize, latent: usize, classes: usize, rng: &mut R) -> Self {
        let glorot = |fan_in: usize, fan_out: usize| (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut m = Self::zeros(input_dim, hidden, latent, classes);
        m.w_hidden = Tensor::uniform(hidden, input_dim, glorot(input_dim, hidden), rng);
        m.w_mean = Tensor::uniform(latent, hidden, glorot(hidden, latent), rng);
        m.w_logvar = Tensor::uniform(latent, hidden, glorot(hidden, latent), rng);
        m.w_dec = Tensor::uniform(classes, latent, glorot(latent, classes), rng);
        m
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), self.hidden_dim(), self.latent_dim(), self.num_classes())
    }

    pub fn input_dim(&self) -> usize {
        self.w_hidden.cols
    }

    pub fn hidden_dim(&self) -> usize {
        self.w_hidden.rows
    }

    pub fn latent_dim(&self) -> usize {
        self.w_mean.rows
    }

    pub fn num_classes(&self) -> usize {
        self.w_dec.rows
    }

    pub fn tensors(&self) -> [&Tensor; 8] {
        [
            &self.w_hidden,
            &self.b_hidden,
            &self.w_mean,
            &self.b_mean,
            &self.w_logvar,
            &self.b_logvar,
            &self.w_dec,
            &self.b_dec,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 8] {
        [
            &mut self.w_hidden,
            &mut self.b_hidden,
            &mut self.w_mean,
            &mut self.b_mean,
            &mut self.w_logvar,
            &mut self.b_logvar,
            &mut self.w_dec,
            &mut self.b_dec,
        ]
    }

    /// Shape consistency across all eight tensors (used on loaded checkpoints).
    pub fn validate(&self) -> Result<()> {
        let (d, h, m, k) = (self.input_dim(), self.hidden_dim(), self.latent_dim(), self.num_classes());
        let shapes = [(h, d), (h, 1), (m, h), (m, 1), (m, h), (m, 1), (k, m), (k, 1)];
        for ((t, name), (r, c)) in self.tensors().into_iter().zip(TENSOR_NAMES).zip(shapes) {
            t.check_shape(name, r, c)?;
        }
        if self.tensors().iter().any(|t| t.data.iter().any(|v| !v.is_finite())) {
            return Err(Error::Schema("non-finite parameter".into()));
        }
        Ok(())
    }

    pub(crate) fn trace(&self, x: &[f64]) -> EncoderTrace {
        let pre = self.w_hidden.affine(&self.b_hidden, x);
        let hidden: Vec<f64> = pre.iter().map(|&v| if v > 0.0 { v } else { LEAKY_SLOPE * v }).collect();
        let mean = self.w_mean.affine(&self.b_mean, &hidden);
        let logvar = self.w_logvar.affine(&self.b_logvar, &hidden);
        EncoderTrace { pre, hidden, mean, logvar }
    }

    /// Encoder output `N(μ_x, diag exp(logvar))`.
    pub fn encode(&self, x: &[f64]) -> Result<DiagGaussian> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: x.len() });
        }
        let t = self.trace(x);
        let var: Vec<f64> = t.logvar.iter().map(|v| v.exp()).collect();
        if t.mean.iter().chain(&var).any(|v| !v.is_finite()) || var.iter().any(|&v| v <= 0.0) {
            return Err(Error::Divergence("encoder produced a non-finite output".into()));
        }
        Ok(DiagGaussian { mean: t.mean, var })
    }

    /// Decoder logits for a latent vector.
    pub(crate) fn logits(&self, u: &[f64]) -> Vec<f64> {
        self.w_dec.affine(&self.b_dec, u)
    }

    /// Decoder class probabilities for a latent vector.
    pub fn decode(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.latent_dim() {
            return Err(Error::DimensionMismatch { expected: self.latent_dim(), got: u.len() });
        }
        Ok(softmax(&self.logits(u)))
    }

    /// Predictive distribution averaged over `noise.len()` latent draws.
    pub fn predictive(&self, x: &[f64], noise: &[Vec<f64>]) -> Result<Vec<f64>> {
        let g = self.encode(x)?;
        let mut avg = vec![0.0; self.num_classes()];
        for eps in noise {
            let p = self.decode(&sample_latent(&g, eps)?)?;
            for (a, v) in avg.iter_mut().zip(p) {
                *a += v;
            }
        }
        let s = noise.len().max(1) as f64;
        avg.iter_mut().for_each(|a| *a /= s);
        Ok(avg)
    }
}

/// Reparameterized draw `u = μ + σ ⊙ ε`.
pub fn sample_latent(g: &DiagGaussian, noise: &[f64]) -> Result<Vec<f64>> {
    if noise.len() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), got: noise.len() });
    }
    Ok(g.mean.iter().zip(&g.var).zip(noise).map(|((m, v), e)| m + v.sqrt() * e).collect())
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `ln softmax(logits)[class]`, computed without forming the probabilities.
pub(crate) fn log_softmax_at(logits: &[f64], class: usize) -> f64 {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    logits[class] - lse
}
