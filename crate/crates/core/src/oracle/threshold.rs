use super::report::{Check, VerificationReport};
use crate::bounds::expectation_bound_t1;
use crate::priors::{conditional_mutual_information, decode, DiscreteConditional, Rearrangement, RearrangementJoint};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Threshold learning on the integer grid `0..grid` with uniform inputs,
/// labels `1{x ≥ grid/2}` flipped with probability `label_noise`, and a
/// learner that picks uniformly among the empirical-risk-minimizing
/// thresholds `θ ∈ 0..=grid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdExperiment {
    pub grid: usize,
    pub n: usize,
    pub label_noise: f64,
}

impl Default for ThresholdExperiment {
    fn default() -> Self {
        Self { grid: 4, n: 3, label_noise: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOutcome {
    /// `I(J; Ŷ^{2n} | Y^{2n})`, nats.
    pub mutual_information: f64,
    pub bound: f64,
    pub mean_gap: f64,
    pub std_error: f64,
    pub draws: usize,
}

impl ThresholdExperiment {
    fn p_label_one(&self, x: usize) -> f64 {
        if 2 * x >= self.grid {
            1.0 - self.label_noise
        } else {
            self.label_noise
        }
    }

    fn predict(theta: usize, x: usize) -> usize {
        usize::from(x >= theta)
    }

    /// Thresholds with the fewest training errors.
    fn erm(&self, xs: &[usize], ys: &[usize]) -> Vec<usize> {
        let errors: Vec<usize> =
            (0..=self.grid).map(|t| xs.iter().zip(ys).filter(|(&x, &y)| Self::predict(t, x) != y).count()).collect();
        let best = *errors.iter().min().unwrap();
        (0..=self.grid).filter(|&t| errors[t] == best).collect()
    }

    fn population_risk(&self, theta: usize) -> f64 {
        (0..self.grid)
            .map(|x| {
                let p1 = self.p_label_one(x);
                if Self::predict(theta, x) == 1 {
                    1.0 - p1
                } else {
                    p1
                }
            })
            .sum::<f64>()
            / self.grid as f64
    }

    /// `P(Y = 0), P(Y = 1)`.
    pub fn label_dist(&self) -> Vec<f64> {
        let p1 = (0..self.grid).map(|x| self.p_label_one(x)).sum::<f64>() / self.grid as f64;
        vec![1.0 - p1, p1]
    }

    /// Exact `P(Ŷ^{2n} | Y^{2n})` in the training frame, with inputs
    /// marginalized out.
    pub fn predictor_table(&self) -> Result<DiscreteConditional> {
        let (n, g) = (self.n, self.grid);
        let len = 2 * n;
        let inputs = g
            .checked_pow(len as u32)
            .filter(|&v| v <= 1 << 20)
            .ok_or_else(|| Error::Budget("input grid too large".into()))?;
        let py = self.label_dist();
        // P(x | y) for each grid point and label
        let px_given_y = |x: usize, y: usize| -> f64 {
            let p = if y == 1 { self.p_label_one(x) } else { 1.0 - self.p_label_one(x) };
            p / (g as f64 * py[y])
        };
        let side = 1usize << len;
        let mut table = vec![vec![0.0; side]; side];
        for (row_idx, row) in table.iter_mut().enumerate() {
            let ys = decode(row_idx, 2, len);
            for xi in 0..inputs {
                let xs = decode(xi, g, len);
                let w: f64 = xs.iter().zip(&ys).map(|(&x, &y)| px_given_y(x, y)).product();
                if w == 0.0 {
                    continue;
                }
                let thetas = self.erm(&xs[..n], &ys[..n]);
                let share = w / thetas.len() as f64;
                for &t in &thetas {
                    let yhat: usize = xs.iter().fold(0, |acc, &x| acc * 2 + Self::predict(t, x));
                    row[yhat] += share;
                }
            }
        }
        // rows are exact mixtures; renormalize away rounding
        for row in &mut table {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
        }
        DiscreteConditional::new(n, 2, 2, table)
    }

    /// Exact information term, then a Monte Carlo estimate of the expected
    /// generalization gap over `draws` training sets (population risk of
    /// each threshold is exact).
    pub fn run(&self, draws: usize, seed: u64) -> Result<(VerificationReport, ThresholdOutcome)> {
        if self.grid < 2 || self.n == 0 || draws < 2 || !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::Domain("invalid threshold experiment".into()));
        }
        let start = std::time::Instant::now();
        let joint = RearrangementJoint::new(self.label_dist(), self.predictor_table()?)?;
        let mi = conditional_mutual_information(&joint, Rearrangement::J)?;
        let bound = expectation_bound_t1(mi, self.n as u64, 0.0)?;

        let risks: Vec<f64> = (0..=self.grid).map(|t| self.population_risk(t)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gaps = Vec::with_capacity(draws);
        for _ in 0..draws {
            let xs: Vec<usize> = (0..self.n).map(|_| rng.random_range(0..self.grid)).collect();
            let ys: Vec<usize> = xs.iter().map(|&x| usize::from(rng.random::<f64>() < self.p_label_one(x))).collect();
            let thetas = self.erm(&xs, &ys);
            let gap: f64 = thetas
                .iter()
                .map(|&t| {
                    let train =
                        xs.iter().zip(&ys).filter(|(&x, &y)| Self::predict(t, x) != y).count() as f64 / self.n as f64;
                    risks[t] - train
                })
                .sum::<f64>()
                / thetas.len() as f64;
            gaps.push(gap);
        }
        let mean = gaps.iter().sum::<f64>() / draws as f64;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();

        let mut report = VerificationReport::new("threshold_end_to_end")
            .param("grid", self.grid)
            .param("n", self.n)
            .param("label_noise", self.label_noise)
            .param("draws", draws)
            .param("seed", seed);
        report.push(
            Check::new("gap_below_bound_plus_3se", bound + 3.0 * se - mean, 0.0)
                .with_note(format!("gap {mean:.4} ± {se:.4}, I = {mi:.4} nats, bound {bound:.4}")),
        );
        report.runtime = start.elapsed();
        Ok((report, ThresholdOutcome { mutual_information: mi, bound, mean_gap: mean, std_error: se, draws }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_consistent_with_direct_simulation() {
        // compare one row of the exact table with sampled frequencies
        let e = ThresholdExperiment { grid: 3, n: 1, label_noise: 0.25 };
        let q = e.predictor_table().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let target_y = [1usize, 0];
        let mut counts = [0usize; 4];
        let mut kept = 0;
        while kept < 40_000 {
            let xs: Vec<usize> = (0..2).map(|_| rng.random_range(0..3)).collect();
            let ys: Vec<usize> = xs.iter().map(|&x| usize::from(rng.random::<f64>() < e.p_label_one(x))).collect();
            if ys != target_y {
                continue;
            }
            kept += 1;
            let th = e.erm(&xs[..1], &ys[..1]);
            let t = th[rng.random_range(0..th.len())];
            counts[ThresholdExperiment::predict(t, xs[0]) * 2 + ThresholdExperiment::predict(t, xs[1])] += 1;
        }
        for (a, &c) in counts.iter().enumerate() {
            let freq = c as f64 / kept as f64;
            let p = q.prob(&target_y, &decode(a, 2, 2));
            assert!((freq - p).abs() < 0.01, "cell {a}: {freq} vs {p}");
        }
    }

    #[test]
    fn gap_respects_the_bound() {
        let (r, out) = ThresholdExperiment::default().run(10_000, 1).unwrap();
        assert!(r.passed, "{}", r.text());
        assert!(out.mutual_information > 0.0);
    }
}
