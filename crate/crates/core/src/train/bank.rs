use crate::math::{kl_diag_unchecked, DiagGaussian};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which regularizer the bank centers are compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BankMode {
    /// `KL(N(μ, σ²) ‖ N(μ̄, σ̄²))`.
    Lossless,
    /// `KL(N(μ, I) ‖ N(μ̄, I)) + KL(N(0, σ²) ‖ N(0, σ̄²))`.
    Lossy,
}

/// `K × M` category-dependent Gaussian centers with moving-average updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct PriorBank {
    pub num_classes: usize,
    pub centers_per_class: usize,
    pub latent_dim: usize,
    pub alpha: f64,
    pub mode: BankMode,
    means: Vec<Vec<f64>>,
    vars: Vec<Vec<f64>>,
}

impl PriorBank {
    /// All centers start at `N(0, I)`.
    pub fn new(
        num_classes: usize,
        centers_per_class: usize,
        latent_dim: usize,
        alpha: f64,
        mode: BankMode,
    ) -> Result<Self> {
        if num_classes == 0 || centers_per_class == 0 || latent_dim == 0 {
            return Err(Error::Config("bank sizes must be positive".into()));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha = {alpha} outside [0, 1]")));
        }
        let cells = num_classes * centers_per_class;
        Ok(Self {
            num_classes,
            centers_per_class,
            latent_dim,
            alpha,
            mode,
            means: vec![vec![0.0; latent_dim]; cells],
            vars: vec![vec![1.0; latent_dim]; cells],
        })
    }

    fn cell(&self, class: usize, r: usize) -> usize {
        class * self.centers_per_class + r
    }

    pub fn center(&self, class: usize, r: usize) -> DiagGaussian {
        let c = self.cell(class, r);
        DiagGaussian { mean: self.means[c].clone(), var: self.vars[c].clone() }
    }

    pub(crate) fn center_ref(&self, class: usize, r: usize) -> (&[f64], &[f64]) {
        let c = self.cell(class, r);
        (&self.means[c], &self.vars[c])
    }

    pub fn set_center(&mut self, class: usize, r: usize, g: DiagGaussian) -> Result<()> {
        let g = DiagGaussian::new(g.mean, g.var)?;
        if g.dim() != self.latent_dim {
            return Err(Error::DimensionMismatch { expected: self.latent_dim, got: g.dim() });
        }
        let c = self.cell(class, r);
        self.means[c] = g.mean;
        self.vars[c] = g.var;
        Ok(())
    }

    /// The regularizer of `g` against center `(class, r)` in this bank's mode.
    pub fn regularizer(&self, g: &DiagGaussian, class: usize, r: usize) -> f64 {
        let (cm, cv) = self.center_ref(class, r);
        match self.mode {
            BankMode::Lossless => kl_diag_unchecked(&g.mean, &g.var, cm, cv),
            BankMode::Lossy => lossy_regularizer(&g.mean, &g.var, cm, cv),
        }
    }

    /// Closest same-class center under [`PriorBank::regularizer`]; ties go
    /// to the lowest index.
    pub fn assign(&self, g: &DiagGaussian, class: usize) -> Result<usize> {
        if class >= self.num_classes {
            return Err(Error::Domain(format!("label {class} outside 0..{}", self.num_classes)));
        }
        if g.dim() != self.latent_dim {
            return Err(Error::DimensionMismatch { expected: self.latent_dim, got: g.dim() });
        }
        let mut best = (0, f64::INFINITY);
        for r in 0..self.centers_per_class {
            let v = self.regularizer(g, class, r);
            if v < best.1 {
                best = (r, v);
            }
        }
        Ok(best.0)
    }

    /// Moving-average update from one batch of `(class, center, encoder output)`:
    /// `μ̄ ← (1 − α b) μ̄ + α Σ μ` and `σ̄² ← (1 − α b) σ̄² + α Σ σ²`, where `b`
    /// counts the batch samples assigned to the center. Untouched centers
    /// are left alone.
    pub fn update(&mut self, batch: &[(usize, usize, &DiagGaussian)]) -> Result<()> {
        let cells = self.num_classes * self.centers_per_class;
        let mut counts = vec![0usize; cells];
        let mut sum_mean = vec![vec![0.0; self.latent_dim]; cells];
        let mut sum_var = vec![vec![0.0; self.latent_dim]; cells];
        for &(class, r, g) in batch {
            if class >= self.num_classes || r >= self.centers_per_class {
                return Err(Error::Domain(format!("center ({class}, {r}) outside the bank")));
            }
            let c = self.cell(class, r);
            counts[c] += 1;
            for j in 0..self.latent_dim {
                sum_mean[c][j] += g.mean[j];
                sum_var[c][j] += g.var[j];
            }
        }
        for c in 0..cells {
            if counts[c] == 0 {
                continue;
            }
            let keep = 1.0 - self.alpha * counts[c] as f64;
            if keep < -1e-12 {
                return Err(Error::Config(format!("alpha * count = {} exceeds 1", self.alpha * counts[c] as f64)));
            }
            let keep = keep.max(0.0);
            for j in 0..self.latent_dim {
                self.means[c][j] = keep * self.means[c][j] + self.alpha * sum_mean[c][j];
                self.vars[c][j] = keep * self.vars[c][j] + self.alpha * sum_var[c][j];
            }
        }
        Ok(())
    }
}

/// `½‖μ − μ̄‖² + Σ_j [σ_j²/(2σ̄_j²) − ½ + ½ ln σ̄_j² − ½ ln σ_j²]`.
pub(crate) fn lossy_regularizer(mean: &[f64], var: &[f64], cm: &[f64], cv: &[f64]) -> f64 {
    let mut v = 0.0;
    for j in 0..mean.len() {
        let d = mean[j] - cm[j];
        v += 0.5 * d * d + var[j] / (2.0 * cv[j]) - 0.5 + 0.5 * (cv[j] / var[j]).ln();
    }
    v.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn g1(mean: f64, var: f64) -> DiagGaussian {
        DiagGaussian::new(vec![mean], vec![var]).unwrap()
    }

    #[test]
    fn initial_state() {
        let b = PriorBank::new(3, 2, 4, 0.1, BankMode::Lossless).unwrap();
        assert_eq!(b.center(2, 1), DiagGaussian::standard(4));
    }

    #[test]
    fn assignment_examples() {
        let mut b = PriorBank::new(1, 2, 1, 0.1, BankMode::Lossless).unwrap();
        b.set_center(0, 1, g1(2.0, 1.0)).unwrap();
        let x = g1(0.5, 1.0);
        assert_abs_diff_eq!(b.regularizer(&x, 0, 0), 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(b.regularizer(&x, 0, 1), 1.125, epsilon = 1e-15);
        assert_eq!(b.assign(&x, 0).unwrap(), 0);
        assert_eq!(b.assign(&g1(2.0, 1.0), 0).unwrap(), 1);
        // equidistant: lowest index wins
        assert_eq!(b.assign(&g1(1.0, 1.0), 0).unwrap(), 0);
        let single = PriorBank::new(2, 1, 1, 0.1, BankMode::Lossy).unwrap();
        assert_eq!(single.assign(&g1(5.0, 0.2), 1).unwrap(), 0);
    }

    #[test]
    fn update_examples() {
        let mut b = PriorBank::new(1, 1, 1, 0.1, BankMode::Lossless).unwrap();
        b.update(&[(0, 0, &g1(1.0, 1.0))]).unwrap();
        assert_abs_diff_eq!(b.center(0, 0).mean[0], 0.1, epsilon = 1e-15);

        let mut frozen = PriorBank::new(1, 1, 1, 0.0, BankMode::Lossless).unwrap();
        frozen.update(&[(0, 0, &g1(3.0, 2.0))]).unwrap();
        assert_eq!(frozen.center(0, 0), DiagGaussian::standard(1));

        let mut full = PriorBank::new(2, 1, 1, 1.0, BankMode::Lossy).unwrap();
        full.update(&[(1, 0, &g1(-2.0, 0.3))]).unwrap();
        assert_eq!(full.center(1, 0), g1(-2.0, 0.3));
        assert_eq!(full.center(0, 0), DiagGaussian::standard(1));
    }

    #[test]
    fn overfull_update_is_rejected() {
        let mut b = PriorBank::new(1, 1, 1, 0.6, BankMode::Lossless).unwrap();
        let g = g1(1.0, 1.0);
        assert!(matches!(b.update(&[(0, 0, &g), (0, 0, &g)]), Err(Error::Config(_))));
    }

    #[test]
    fn lossy_regularizer_properties() {
        let b = PriorBank::new(1, 1, 2, 0.1, BankMode::Lossy).unwrap();
        let at_center = DiagGaussian::standard(2);
        assert_eq!(b.regularizer(&at_center, 0, 0), 0.0);
        let off = DiagGaussian::new(vec![1.0, 0.0], vec![0.5, 2.0]).unwrap();
        let expected = 0.5 + (0.25 - 0.5 + 0.5 * 2f64.ln()) + (1.0 - 0.5 - 0.5 * 2f64.ln());
        assert_abs_diff_eq!(b.regularizer(&off, 0, 0), expected, epsilon = 1e-15);
    }
}
