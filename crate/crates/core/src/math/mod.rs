//! Deterministic special functions.
//!
//! Everything is computed in nats; [`LogBase`] only rescales results at the
//! boundary. `0 · ln 0` is taken as `0` throughout.

mod comb;
mod gaussian;

pub use comb::{b_max, bucket, gallager_sandwich, log_choose, log_sum_exp, GallagerSandwich};
pub use gaussian::{kl_categorical, kl_diag_gaussian, DiagGaussian};
pub(crate) use gaussian::{kl_categorical_unchecked, kl_diag_unchecked};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Logarithm base used to report an information quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    #[default]
    Natural,
    Base2,
}

impl LogBase {
    /// Converts a value in nats into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Natural => nats,
            LogBase::Base2 => nats / LN_2,
        }
    }

    /// Converts a value expressed in this base into nats.
    pub fn to_nats(self, value: f64) -> f64 {
        match self {
            LogBase::Natural => value,
            LogBase::Base2 => value * LN_2,
        }
    }
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {x} is outside [0, 1]")))
    }
}

#[inline]
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

#[inline]
pub(crate) fn binary_entropy_nats(x: f64) -> f64 {
    -xlnx(x) - xlnx(1.0 - x)
}

#[inline]
pub(crate) fn h_d_nats(x: f64, x_prime: f64) -> f64 {
    let v = 2.0 * binary_entropy_nats(0.5 * (x + x_prime)) - binary_entropy_nats(x) - binary_entropy_nats(x_prime);
    // Rounding can leave a -1e-17 residue on the diagonal.
    v.max(0.0)
}

/// Binary entropy `h_b(x)`.
pub fn binary_entropy(x: f64, base: LogBase) -> Result<f64> {
    check_probability("x", x)?;
    Ok(base.from_nats(binary_entropy_nats(x)))
}

/// `h_D(x, x') = 2 h_b((x + x')/2) − h_b(x) − h_b(x')`, twice the
/// Jensen–Shannon divergence between Bernoulli(x) and Bernoulli(x').
pub fn h_d(x: f64, x_prime: f64, base: LogBase) -> Result<f64> {
    check_probability("x", x)?;
    check_probability("x'", x_prime)?;
    Ok(base.from_nats(h_d_nats(x, x_prime)))
}

const INVERSE_TOL: f64 = 1e-12;
const INVERSE_MAX_ITER: usize = 200;

/// The unique `x ∈ [x', 1]` with `h_D(x, x') = target`.
///
/// `h_D(·, x')` is increasing on `[x', 1]`, so bisection converges; the
/// bracket is shrunk to `1e-12` or 200 halvings, whichever comes first.
pub fn h_d_inverse(x_prime: f64, target: f64, base: LogBase) -> Result<f64> {
    check_probability("x'", x_prime)?;
    if !(target >= 0.0) {
        return Err(Error::Domain(format!("target = {target} must be >= 0")));
    }
    let target = base.to_nats(target);
    let ceiling = h_d_nats(1.0, x_prime);
    if target > ceiling + 1e-15 {
        return Err(Error::Range(format!("target {target} exceeds h_D(1, {x_prime}) = {ceiling}")));
    }
    if target == 0.0 {
        return Ok(x_prime);
    }
    let (mut lo, mut hi) = (x_prime, 1.0);
    for _ in 0..INVERSE_MAX_ITER {
        if hi - lo <= INVERSE_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if h_d_nats(mid, x_prime) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
