use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Gaussian with diagonal covariance, stored as mean and variance vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagGaussian {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl DiagGaussian {
    pub fn new(mean: Vec<f64>, var: Vec<f64>) -> Result<Self> {
        if mean.len() != var.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), got: var.len() });
        }
        if let Some(&bad) = var.iter().find(|v| !(**v > 0.0)) {
            return Err(Error::NonPositiveVariance(bad));
        }
        Ok(Self { mean, var })
    }

    /// `N(0, I_dim)`.
    pub fn standard(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], var: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn validate(&self) -> Result<()> {
        if self.mean.len() != self.var.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: self.var.len() });
        }
        match self.var.iter().find(|v| !(**v > 0.0)) {
            Some(&bad) => Err(Error::NonPositiveVariance(bad)),
            None => Ok(()),
        }
    }
}

/// `KL(p ‖ q)` between diagonal Gaussians, in nats.
pub fn kl_diag_gaussian(p: &DiagGaussian, q: &DiagGaussian) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: q.dim() });
    }
    Ok(kl_diag_unchecked(&p.mean, &p.var, &q.mean, &q.var))
}

#[inline]
pub(crate) fn kl_diag_unchecked(pm: &[f64], pv: &[f64], qm: &[f64], qv: &[f64]) -> f64 {
    let mut kl = 0.0;
    for j in 0..pm.len() {
        let d = pm[j] - qm[j];
        kl += (pv[j] + d * d) / (2.0 * qv[j]) - 0.5 + 0.5 * (qv[j] / pv[j]).ln();
    }
    kl.max(0.0)
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// `KL(p ‖ q)` for categorical distributions; `+∞` when `p` is not
/// absolutely continuous with respect to `q`.
pub fn kl_categorical(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    for dist in [p, q] {
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL || dist.iter().any(|v| *v < 0.0) {
            return Err(Error::NotNormalized(sum));
        }
    }
    Ok(kl_categorical_unchecked(p, q))
}

pub(crate) fn kl_categorical_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let mut kl = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            kl += pi * (pi / qi).ln();
        }
    }
    kl.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn g(mean: &[f64], var: &[f64]) -> DiagGaussian {
        DiagGaussian::new(mean.to_vec(), var.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_kl_examples() {
        let p = g(&[0.3, -1.0], &[0.5, 2.0]);
        assert_eq!(kl_diag_gaussian(&p, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_diag_gaussian(&g(&[1.0], &[1.0]), &g(&[0.0], &[1.0])).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            kl_diag_gaussian(&g(&[0.0], &[4.0]), &g(&[0.0], &[1.0])).unwrap(),
            (3.0 - 4f64.ln()) / 2.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            kl_diag_gaussian(&g(&[0.0], &[4.0]), &g(&[0.0], &[1.0])).unwrap(),
            0.806_853,
            epsilon = 1e-6
        );
    }

    #[test]
    fn gaussian_kl_errors() {
        assert!(DiagGaussian::new(vec![0.0], vec![0.0]).is_err());
        assert!(DiagGaussian::new(vec![0.0, 1.0], vec![1.0]).is_err());
        let bad = DiagGaussian { mean: vec![0.0], var: vec![-1.0] };
        assert!(matches!(kl_diag_gaussian(&bad, &DiagGaussian::standard(1)), Err(Error::NonPositiveVariance(_))));
        assert!(matches!(
            kl_diag_gaussian(&DiagGaussian::standard(2), &DiagGaussian::standard(1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn categorical_kl_examples() {
        assert_eq!(kl_categorical(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(kl_categorical(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(kl_categorical(&[0.5, 0.5], &[0.25, 0.75]).unwrap(), 0.143_841, epsilon = 1e-6);
        assert_eq!(kl_categorical(&[0.5, 0.5], &[1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(matches!(kl_categorical(&[0.5, 0.6], &[0.5, 0.5]), Err(Error::NotNormalized(_))));
        assert!(kl_categorical(&[1.0], &[0.5, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn gaussian_kl_nonnegative(
            m1 in -3.0f64..3.0, m2 in -3.0f64..3.0,
            v1 in 0.01f64..5.0, v2 in 0.01f64..5.0,
        ) {
            let kl = kl_diag_gaussian(&g(&[m1], &[v1]), &g(&[m2], &[v2])).unwrap();
            prop_assert!(kl >= 0.0);
        }

        #[test]
        fn categorical_kl_nonnegative(a in 0.001f64..1.0, b in 0.001f64..1.0, c in 0.001f64..1.0, d in 0.001f64..1.0) {
            let p = [a / (a + b), b / (a + b)];
            let q = [c / (c + d), d / (c + d)];
            let kl = kl_categorical_unchecked(&p, &q);
            prop_assert!(kl >= 0.0);
            prop_assert!(kl_categorical_unchecked(&p, &p) == 0.0);
        }
    }
}
