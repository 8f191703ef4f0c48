use super::report::{Check, VerificationReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::LN_2;

/// Default reconstruction points: the midpoints of the two clusters.
pub const MIDPOINT_CENTERS: [f64; 2] = [-0.95, 1.15];
/// Quantization steps `2^-4, 2^-6, …, 2^-12`.
pub const QUANTIZATION_LEVELS: [i32; 5] = [4, 6, 8, 10, 12];

/// `U = −1 + X/5` for `X < 1/2`, otherwise `U = 1 + X/5`.
pub fn geometric_map(x: f64) -> f64 {
    if x < 0.5 {
        -1.0 + x / 5.0
    } else {
        1.0 + x / 5.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricReport {
    pub centers: [f64; 2],
    /// `E|U − Û|` for `X ~ Uniform[0, 1]`.
    pub lossy_distortion: f64,
    pub lossy_rate_nats: f64,
    pub lossy_rate_bits: f64,
    /// `(step, I(X_q; U_q))` in nats.
    pub lossless_mi: Vec<(f64, f64)>,
}

/// Exact `E|U − c|` for `U` uniform on `[lo, hi]`.
fn mean_abs_deviation(lo: f64, hi: f64, c: f64) -> f64 {
    let w = hi - lo;
    let c = c.clamp(lo, hi);
    ((c - lo).powi(2) + (hi - c).powi(2)) / (2.0 * w)
}

/// Mutual information between `X` and `U` after quantizing both onto a
/// grid of step `q` (bins `[iq, (i+1)q)`). The joint cell masses are exact
/// interval lengths, since `U` is piecewise linear in `X`.
pub fn quantized_mutual_information(q: f64) -> f64 {
    let bins = (1.0 / q).round() as i64;
    let mut joint: BTreeMap<(i64, i64), f64> = BTreeMap::new();
    for i in 0..bins {
        let (a, b) = (i as f64 * q, (i + 1) as f64 * q);
        for (s, e) in [(a, b.min(0.5)), (a.max(0.5), b)] {
            if e <= s {
                continue;
            }
            let (us, ue) = (geometric_map(s), geometric_map(s) + (e - s) / 5.0);
            let (j0, j1) = ((us / q).floor() as i64, (ue / q).ceil() as i64);
            for j in j0..j1 {
                let lo = us.max(j as f64 * q);
                let hi = ue.min((j + 1) as f64 * q);
                if hi > lo {
                    *joint.entry((i, j)).or_default() += 5.0 * (hi - lo);
                }
            }
        }
    }
    let mut px: BTreeMap<i64, f64> = BTreeMap::new();
    let mut pu: BTreeMap<i64, f64> = BTreeMap::new();
    for (&(i, j), &p) in &joint {
        *px.entry(i).or_default() += p;
        *pu.entry(j).or_default() += p;
    }
    joint.iter().map(|(&(i, j), &p)| p * (p / (px[&i] * pu[&j])).ln()).sum()
}

/// Lossy two-center description of the geometric map and the diverging
/// lossless proxy.
pub fn geometric_compression_demo(centers: Option<[f64; 2]>) -> GeometricReport {
    let centers = centers.unwrap_or(MIDPOINT_CENTERS);
    // each branch has probability 1/2 and U is uniform on it
    let lossy_distortion =
        0.5 * mean_abs_deviation(-1.0, -0.9, centers[0]) + 0.5 * mean_abs_deviation(1.1, 1.2, centers[1]);
    // Û is a deterministic two-valued function of X with equal masses
    let lossy_rate_nats = -(0.5f64 * 0.5f64.ln() + 0.5 * 0.5f64.ln());
    let lossless_mi = QUANTIZATION_LEVELS
        .iter()
        .map(|&k| {
            let q = 2f64.powi(-k);
            (q, quantized_mutual_information(q))
        })
        .collect();
    GeometricReport { centers, lossy_distortion, lossy_rate_nats, lossy_rate_bits: lossy_rate_nats / LN_2, lossless_mi }
}

/// Wraps the demo as pass/fail checks: distortion at most 0.05, rate of one
/// bit, and quantized mutual information strictly increasing as the grid
/// refines.
pub fn verify_geometric(centers: Option<[f64; 2]>) -> (VerificationReport, GeometricReport) {
    let start = std::time::Instant::now();
    let g = geometric_compression_demo(centers);
    let mut r = VerificationReport::new("geometric_compression").param("centers", g.centers);
    r.push(Check::new("lossy_distortion_at_most_0.05", 0.05 - g.lossy_distortion, 1e-12));
    r.push(Check::new("lossy_rate_is_one_bit", -(g.lossy_rate_bits - 1.0).abs(), 1e-12));
    let step = g.lossless_mi.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::INFINITY, f64::min);
    r.push(Check::verdict("lossless_mi_strictly_increasing", step, step > 0.0));
    r.runtime = start.elapsed();
    (r, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lossy_description() {
        let g = geometric_compression_demo(None);
        assert_abs_diff_eq!(g.lossy_rate_nats, LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(g.lossy_distortion, 0.025, epsilon = 1e-15);
        let edge = geometric_compression_demo(Some([-0.9, 1.1]));
        assert_abs_diff_eq!(edge.lossy_distortion, 0.05, epsilon = 1e-15);
    }

    #[test]
    fn distortion_matches_fine_quadrature() {
        let c = [-0.93, 1.17];
        let m = 200_000;
        let direct: f64 = (0..m)
            .map(|i| {
                let x = (i as f64 + 0.5) / m as f64;
                let u = geometric_map(x);
                (u - if x < 0.5 { c[0] } else { c[1] }).abs()
            })
            .sum::<f64>()
            / m as f64;
        assert_abs_diff_eq!(geometric_compression_demo(Some(c)).lossy_distortion, direct, epsilon = 1e-8);
    }

    #[test]
    fn joint_cells_are_a_distribution_and_mi_grows() {
        let (r, g) = verify_geometric(None);
        assert!(r.passed, "{}", r.text());
        assert!(g.lossless_mi[4].1 > g.lossless_mi[0].1);
        // at step q the map is injective on bins, so I ≈ H(X_q) = ln(1/q)
        for &(q, mi) in &g.lossless_mi {
            assert!(mi <= (1.0 / q).ln() + 1e-9);
            assert!(mi >= (1.0 / q).ln() - 2.0);
        }
    }
}
