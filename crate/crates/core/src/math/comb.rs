use super::binary_entropy_nats;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

/// Below this many factors the binomial is summed directly; above it the
/// result is large enough that the log-gamma difference keeps 1e-10 relative.
const DIRECT_SUM_LIMIT: u64 = 64;

/// `ln C(n, k)`.
pub fn log_choose(n: u64, k: u64) -> Result<f64> {
    if k > n {
        return Err(Error::Domain(format!("k = {k} exceeds n = {n}")));
    }
    let k = k.min(n - k);
    if k == 0 {
        return Ok(0.0);
    }
    if k < DIRECT_SUM_LIMIT {
        let n = n as f64;
        Ok((0..k)
            .map(|i| {
                let i = i as f64;
                ((n - i) / (i + 1.0)).ln()
            })
            .sum())
    } else {
        Ok(ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
    }
}

/// Numerically stable `ln Σ exp(x_i)`; `-∞` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Blum–Langford tail `Bucket(n, a, b) = Σ_{c=b}^{a+b} C(n,c) C(n,a+b−c) / C(2n,a+b)`.
///
/// Terms with `c > n` or `a + b − c > n` vanish. Evaluated as a
/// log-sum-exp of log-binomials.
pub fn bucket(n: u64, a: u64, b: u64) -> Result<f64> {
    let total = a + b;
    if total > 2 * n {
        return Err(Error::Domain(format!("a + b = {total} exceeds 2n = {}", 2 * n)));
    }
    let denom = log_choose(2 * n, total)?;
    let lo = b.max(total.saturating_sub(n));
    let hi = total.min(n);
    if lo > hi {
        return Ok(0.0);
    }
    let mut terms = Vec::with_capacity((hi - lo + 1) as usize);
    for c in lo..=hi {
        terms.push(log_choose(n, c)? + log_choose(n, total - c)? - denom);
    }
    Ok(log_sum_exp(&terms).exp().clamp(0.0, 1.0))
}

/// `b_max(n, a/n, δ) = max { b : Bucket(n, a, b) ≥ δ }`, scanning `b` from `n` down.
pub fn b_max(n: u64, a: u64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("delta = {delta} must lie in (0, 1]")));
    }
    if a > n {
        return Err(Error::Domain(format!("a = {a} exceeds n = {n}")));
    }
    for b in (1..=n).rev() {
        if bucket(n, a, b)? >= delta {
            return Ok(b);
        }
    }
    // Bucket(n, a, 0) = 1 exactly by Vandermonde, even where rounding says 1 − ulp.
    Ok(0)
}

/// Gallager's two-sided estimate of `C(n, j) e^{−n h_b(j/n)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GallagerSandwich {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl GallagerSandwich {
    /// Whether `lower ≤ value ≤ upper` up to a relative slack.
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.lower <= self.value * (1.0 + rel_tol) && self.value <= self.upper * (1.0 + rel_tol)
    }
}

/// `√(n / 8j(n−j)) ≤ C(n,j) e^{−n h_b(j/n)} ≤ √(n / 2πj(n−j))` for `1 ≤ j ≤ n−1`.
pub fn gallager_sandwich(n: u64, j: u64) -> Result<GallagerSandwich> {
    if j == 0 || j >= n {
        return Err(Error::Domain(format!("need 1 <= j <= n-1, got n = {n}, j = {j}")));
    }
    let (nf, jf) = (n as f64, j as f64);
    let spread = jf * (nf - jf);
    let value = (log_choose(n, j)? - nf * binary_entropy_nats(jf / nf)).exp();
    Ok(GallagerSandwich { lower: (nf / (8.0 * spread)).sqrt(), value, upper: (nf / (2.0 * PI * spread)).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    /// Exact binomial in u128 for the oracle side.
    fn choose_exact(n: u64, k: u64) -> u128 {
        let k = k.min(n - k);
        (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
    }

    #[test]
    fn log_choose_values() {
        assert_eq!(log_choose(17, 0).unwrap(), 0.0);
        assert_relative_eq!(log_choose(4, 2).unwrap(), 6f64.ln(), max_relative = 1e-15);
        assert_eq!(log_choose(40, 13).unwrap(), log_choose(40, 27).unwrap());
        assert!(log_choose(3, 4).is_err());
        for (n, k) in [(60, 30), (100, 7), (120, 64), (110, 55)] {
            let exact = (choose_exact(n, k) as f64).ln();
            assert_relative_eq!(log_choose(n, k).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn log_choose_large_n_matches_direct_sum() {
        // crossing the direct/log-gamma threshold must stay continuous
        let n = 1_000_000;
        for k in [63, 64, 65, 500] {
            let direct: f64 = (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
            assert_relative_eq!(log_choose(n, k).unwrap(), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn bucket_examples() {
        for n in [1, 5, 12] {
            for a in 0..=n {
                assert_abs_diff_eq!(bucket(n, a, 0).unwrap(), 1.0, epsilon = 1e-12);
            }
        }
        assert_abs_diff_eq!(bucket(1, 0, 1).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(bucket(2, 1, 1).unwrap(), 5.0 / 6.0, epsilon = 1e-15);
        assert!(bucket(3, 4, 3).is_err());
    }

    #[test]
    fn b_max_examples() {
        assert_eq!(b_max(9, 0, 1.0).unwrap(), 0);
        assert_eq!(b_max(7, 3, 1.0).unwrap(), 0);
        assert_eq!(b_max(1, 0, 0.5).unwrap(), 1);
        assert!(b_max(5, 1, 0.0).is_err());
        assert!(b_max(5, 6, 0.1).is_err());
    }

    #[test]
    fn b_max_matches_enumeration_oracle() {
        // exhaustive rational enumeration of the Bucket sum
        let bucket_exact = |n: u64, a: u64, b: u64| -> f64 {
            let num: u128 = (b..=a + b)
                .filter(|&c| c <= n && a + b - c <= n)
                .map(|c| choose_exact(n, c) * choose_exact(n, a + b - c))
                .sum();
            num as f64 / choose_exact(2 * n, a + b) as f64
        };
        let oracle = (0..=10).rev().find(|&b| bucket_exact(10, 2, b) >= 0.01).unwrap();
        assert_eq!(oracle, 8);
        assert_eq!(b_max(10, 2, 0.01).unwrap(), oracle);
    }

    #[test]
    fn gallager_examples() {
        let s = gallager_sandwich(2, 1).unwrap();
        assert_abs_diff_eq!(s.lower, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.value, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.upper, 0.564_189_583_547_756_3, epsilon = 1e-12);
        assert!(s.holds(1e-12));

        // mpmath: 0.2439750182, 0.266827932, 0.2752963279
        let s = gallager_sandwich(10, 3).unwrap();
        assert_abs_diff_eq!(s.lower, 0.243_975_018_2, epsilon = 1e-9);
        assert_abs_diff_eq!(s.value, 0.266_827_932, epsilon = 1e-9);
        assert_abs_diff_eq!(s.upper, 0.275_296_327_9, epsilon = 1e-9);

        let s = gallager_sandwich(10, 5).unwrap();
        assert_abs_diff_eq!(s.value, 0.246_093_75, epsilon = 1e-12);
        assert!(s.holds(0.0));

        assert!(gallager_sandwich(5, 0).is_err());
        assert!(gallager_sandwich(5, 5).is_err());
    }
}
