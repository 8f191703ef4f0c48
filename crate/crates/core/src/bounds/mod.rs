//! Generalization bounds and the empirical quantities they are compared with.
//!
//! Every bound takes its information term in nats. Values above 1 are
//! returned as computed (a `[0, 1]` loss makes them vacuous) and flagged by
//! [`BoundReport`], never clipped.

mod estimate;
mod report;

pub use estimate::{empirical_gap, estimate_latent_kl, expected_zero_one_losses, GapEstimate, LatentKl};
pub use report::{BoundInputs, BoundReport, ReportMetadata, CSV_HEADER};

use crate::math::{h_d, h_d_inverse, LogBase};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, LN_2};

/// Default tail level.
pub const DEFAULT_DELTA: f64 = 0.05;

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be non-negative")))
    }
}

fn check_n(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    Ok(n as f64)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("delta = {delta} must lie in (0, 1)")))
    }
}

/// In-expectation bound `√(2·KL/n) + ε`; `ε > 0` gives the lossy form.
pub fn expectation_bound_t1(kl_term: f64, n: u64, epsilon: f64) -> Result<f64> {
    check_nonneg("kl_term", kl_term)?;
    check_nonneg("epsilon", epsilon)?;
    let n = check_n(n)?;
    Ok((2.0 * kl_term / n).sqrt() + epsilon)
}

/// The two tail bounds that share a KL term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    /// `√(4/(2n−1) · (KL + ln(√(2n)/δ)))`, over the joint draw of the two
    /// samples and the model.
    pub joint: f64,
    /// `√(ln(2/δ)/(2n)) + √(4/(2n−1) · (KL + ln(√(8n)/δ)) + ε)`, over the
    /// draw of the samples only.
    pub over_samples: f64,
}

pub fn tail_bound_t1(kl_value: f64, n: u64, delta: f64, epsilon: f64) -> Result<TailBounds> {
    check_nonneg("kl_value", kl_value)?;
    check_nonneg("epsilon", epsilon)?;
    check_delta(delta)?;
    let nf = check_n(n)?;
    let scale = 4.0 / (2.0 * nf - 1.0);
    let joint = (scale * (kl_value + ((2.0 * nf).sqrt() / delta).ln())).sqrt();
    let hoeffding = ((2.0 / delta).ln() / (2.0 * nf)).sqrt();
    let over_samples = hoeffding + (scale * (kl_value + ((8.0 * nf).sqrt() / delta).ln()) + epsilon).sqrt();
    Ok(TailBounds { joint, over_samples })
}

/// Output of the `h_D`-based risk bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskBound {
    /// Largest risk `x ≥ L̂` with `n·h_D(x, L̂) ≤ budget`; 1 when even
    /// `x = 1` fits.
    pub value: f64,
    /// `(KL + ln(n/δ))/n`, reported only when `L̂ = 0`.
    pub linear_form: Option<f64>,
    /// The linear form divided by `ln 2`. In nats `h_D(x, 0) ≥ x·ln 2`,
    /// so this is the form the inverse is guaranteed to stay below.
    pub linear_form_nats: Option<f64>,
    /// `n < 10`, outside the range the inequality is stated for.
    pub below_precondition: bool,
    pub vacuous: bool,
}

/// Population-risk bound from `n·h_D(L, L̂) ≤ KL + ln n` (`delta = None`)
/// or the tail form `n·h_D(L̂′, L̂) ≤ KL + ln(n/δ)`.
pub fn population_risk_bound_t3(kl_value: f64, n: u64, empirical_risk: f64, delta: Option<f64>) -> Result<RiskBound> {
    check_nonneg("kl_value", kl_value)?;
    if !(0.0..=1.0).contains(&empirical_risk) {
        return Err(Error::Domain(format!("empirical risk {empirical_risk} outside [0, 1]")));
    }
    if let Some(d) = delta {
        if !(d > 0.0 && d <= 1.0) {
            return Err(Error::Domain(format!("delta = {d} must lie in (0, 1]")));
        }
    }
    let nf = check_n(n)?;
    let log_term = (nf / delta.unwrap_or(1.0)).ln();
    let target = (kl_value + log_term) / nf;
    let ceiling = h_d(1.0, empirical_risk, LogBase::Natural)?;
    let value = if target >= ceiling { 1.0 } else { h_d_inverse(empirical_risk, target, LogBase::Natural)? };
    let linear = (empirical_risk == 0.0).then_some(target);
    Ok(RiskBound {
        value,
        linear_form: linear,
        linear_form_nats: linear.map(|l| l / LN_2),
        below_precondition: n < 10,
        vacuous: value >= 1.0,
    })
}

/// `2·√((2·KL + K + 2)/n) + ε`.
pub fn representation_bound_t4(latent_kl: f64, n: u64, num_classes: u64, epsilon: f64) -> Result<f64> {
    check_nonneg("latent_kl", latent_kl)?;
    check_nonneg("epsilon", epsilon)?;
    if num_classes < 2 {
        return Err(Error::Domain("K must be at least 2".into()));
    }
    let n = check_n(n)?;
    Ok(2.0 * ((2.0 * latent_kl + num_classes as f64 + 2.0) / n).sqrt() + epsilon)
}

/// `A/λ + 2λ/n + √(ln(2/δ)/n)` with `A = KL + (K+2)/2 + ln(2/δ)`. Without
/// `λ` the minimizer `λ* = √(nA/2)` is used, giving `2√(2A/n) + √(ln(2/δ)/n)`.
pub fn representation_tail_t7(
    latent_kl: f64,
    n: u64,
    num_classes: u64,
    delta: f64,
    lambda: Option<f64>,
) -> Result<f64> {
    check_nonneg("latent_kl", latent_kl)?;
    check_delta(delta)?;
    let nf = check_n(n)?;
    let a = latent_kl + (num_classes as f64 + 2.0) / 2.0 + (2.0 / delta).ln();
    let lambda = match lambda {
        Some(l) if l > 0.0 => l,
        Some(l) => return Err(Error::Domain(format!("lambda = {l} must be positive"))),
        None => (nf * a / 2.0).sqrt(),
    };
    Ok(a / lambda + 2.0 * lambda / nf + ((2.0 / delta).ln() / nf).sqrt())
}

/// Sauer–Shelah bound `d·ln(2en/d)` on the KL term of a class of VC
/// dimension `d`.
pub fn vc_prior_bound(n: u64, d: u64) -> Result<f64> {
    if d == 0 || d > 2 * n {
        return Err(Error::Domain(format!("need 1 <= d <= 2n, got d = {d}, n = {n}")));
    }
    let (n, d) = (n as f64, d as f64);
    Ok(d * (2.0 * E * n / d).ln())
}
