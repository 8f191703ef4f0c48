use super::report::{Check, VerificationReport};
use crate::math::{log_choose, log_sum_exp};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest admissible `λ/n`.
pub const MAX_LAMBDA_OVER_N: f64 = 0.68;
const CONFIDENCE_DELTA: f64 = 0.01;
const SHARDS: usize = 64;

/// Monte Carlo summary of `ln E[e^{λ‖p̂ − p̂′‖₁}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogMgfEstimate {
    pub point: f64,
    /// One-sided 99% upper confidence bound.
    pub upper: f64,
    pub bound: f64,
}

/// Multinomial counts by sequential conditional binomials.
fn multinomial<R: Rng + ?Sized>(n: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = n;
    let mut mass = 1.0;
    let mut counts = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if i + 1 == probs.len() {
            counts.push(left);
            break;
        }
        let c = if left == 0 || mass <= 0.0 {
            0
        } else {
            let q = (p / mass).clamp(0.0, 1.0);
            Binomial::new(left, q).map(|d| d.sample(rng)).unwrap_or(0)
        };
        counts.push(c);
        left -= c;
        mass -= p;
    }
    counts
}

/// Draws `trials` values of `λ‖p̂ − p̂′‖₁` for two independent size-`n`
/// samples from `probs`. Shards use their own ChaCha streams.
fn draw_exponents(probs: &[f64], n: u64, lambda: f64, trials: usize, seed: u64) -> Vec<f64> {
    let per = trials.div_ceil(SHARDS);
    let parts: Vec<Vec<f64>> = crate::with_pool(|| {
        (0..SHARDS)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(s as u64);
                let count = per.min(trials.saturating_sub(s * per));
                (0..count)
                    .map(|_| {
                        let a = multinomial(n, probs, &mut rng);
                        let b = multinomial(n, probs, &mut rng);
                        let l1: u64 = a.iter().zip(&b).map(|(x, y)| x.abs_diff(*y)).sum();
                        lambda * l1 as f64 / n as f64
                    })
                    .collect()
            })
            .collect()
    });
    parts.concat()
}

/// Point estimate and empirical-Bernstein upper bound on `ln E[e^X]` from
/// samples `X`. Values are shifted by their maximum `c` so `Y = e^{X−c}`
/// lies in `(0, 1]`; the bound is
/// `ln(Ȳ + √(2V̂ ln(2/δ)/N) + 7 ln(2/δ)/(3(N−1))) + c`.
pub fn log_mean_exp_ucb(xs: &[f64], delta: f64) -> (f64, f64) {
    let n = xs.len() as f64;
    let c = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ys: Vec<f64> = xs.iter().map(|x| (x - c).exp()).collect();
    let mean = ys.iter().sum::<f64>() / n;
    let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let l = (2.0 / delta).ln();
    let upper = mean + (2.0 * var * l / n).sqrt() + 7.0 * l / (3.0 * (n - 1.0));
    (mean.ln() + c, upper.ln() + c)
}

/// Checks `ln E[e^{λ‖p̂ − p̂′‖₁}] ≤ (K+2)/2 + 6λ²/n` with a 99% upper
/// confidence bound. `label_dist` defaults to uniform over `K` classes.
pub fn verify_l1_empiric(
    k: usize,
    n: u64,
    lambda: f64,
    trials: usize,
    seed: u64,
    label_dist: Option<&[f64]>,
) -> Result<(VerificationReport, LogMgfEstimate)> {
    if k < 2 || n == 0 || trials < 2 {
        return Err(Error::Domain("need K >= 2, n >= 1 and at least two trials".into()));
    }
    if !(lambda >= 0.0) || lambda / n as f64 >= MAX_LAMBDA_OVER_N {
        return Err(Error::Domain(format!("lambda/n = {} must be in [0, {MAX_LAMBDA_OVER_N})", lambda / n as f64)));
    }
    let probs: Vec<f64> = match label_dist {
        Some(p) if p.len() == k => p.to_vec(),
        Some(p) => return Err(Error::DimensionMismatch { expected: k, got: p.len() }),
        None => vec![1.0 / k as f64; k],
    };
    let start = std::time::Instant::now();
    let xs = draw_exponents(&probs, n, lambda, trials, seed);
    let (point, upper) = log_mean_exp_ucb(&xs, CONFIDENCE_DELTA);
    let bound = (k as f64 + 2.0) / 2.0 + 6.0 * lambda * lambda / n as f64;
    let mut report = VerificationReport::new(format!("l1_empiric_K{k}_n{n}_lambda{lambda}"))
        .param("K", k)
        .param("n", n)
        .param("lambda", lambda)
        .param("trials", trials)
        .param("seed", seed)
        .param("label_dist", &probs);
    report.push(
        Check::new("ucb_below_bound", bound - upper, 0.0)
            .with_note(format!("estimate {point:.4}, 99% UCB {upper:.4}, bound {bound:.4}")),
    );
    report.runtime = start.elapsed();
    Ok((report, LogMgfEstimate { point, upper, bound }))
}

/// Exact `ln E[e^{λ‖p̂ − p̂′‖₁}]` for `K = 2`, where `‖p̂ − p̂′‖₁ = 2|B − B′|/n`
/// with `B, B′` independent `Binomial(n, p)`.
pub fn exact_log_mgf_binary(n: u64, p: f64, lambda: f64) -> Result<f64> {
    let log_pmf: Vec<f64> = (0..=n)
        .map(|b| Ok(log_choose(n, b)? + b as f64 * p.ln() + (n - b) as f64 * (1.0 - p).ln()))
        .collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for b in 0..=n {
        for bp in 0..=n {
            let l1 = 2.0 * b.abs_diff(bp) as f64 / n as f64;
            terms.push(log_pmf[b as usize] + log_pmf[bp as usize] + lambda * l1);
        }
    }
    Ok(log_sum_exp(&terms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lambda_is_zero() {
        let (r, est) = verify_l1_empiric(3, 20, 0.0, 1000, 1, None).unwrap();
        assert!(r.passed);
        assert_eq!(est.point, 0.0);
    }

    #[test]
    fn rejects_large_lambda() {
        assert!(verify_l1_empiric(2, 100, 68.0, 100, 1, None).is_err());
        assert!(verify_l1_empiric(2, 100, 67.9, 100, 1, None).is_ok());
    }

    #[test]
    fn monte_carlo_agrees_with_exact_binary_mgf() {
        // (50, 20) is too heavy-tailed for a tight comparison: the relative
        // standard error of the mean of e^X at 1e5 trials is about 1.9
        for (n, lambda, tol) in [(100u64, 10.0, 0.02), (200, 10.0, 0.02), (50, 20.0, 0.3)] {
            let exact = exact_log_mgf_binary(n, 0.5, lambda).unwrap();
            let (_, est) = verify_l1_empiric(2, n, lambda, 100_000, 42, None).unwrap();
            assert!(est.upper >= exact, "UCB {} below exact {exact}", est.upper);
            assert!((est.point - exact).abs() < tol, "point {} vs exact {exact}", est.point);
        }
    }

    #[test]
    fn multinomial_counts_sum_to_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let c = multinomial(37, &[0.6, 0.1, 0.1, 0.1, 0.1], &mut rng);
            assert_eq!(c.iter().sum::<u64>(), 37);
        }
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let a = draw_exponents(&[0.5, 0.5], 30, 5.0, 1000, 9);
        let b = draw_exponents(&[0.5, 0.5], 30, 5.0, 1000, 9);
        assert_eq!(a, b);
        assert_eq!(a.len(), 1000);
    }
}
