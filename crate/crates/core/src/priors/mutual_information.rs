use super::conditional::DiscreteConditional;
use super::group::{all_permutations, index_map, pair_swaps};
use super::{constrained_rows, symmetrize, PermutationSpec, SymmetryKind};
use crate::math::kl_categorical_unchecked;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cap on `|group| · rows · cols` visited by the exact enumeration.
pub const ENUMERATION_BUDGET: usize = 1 << 24;

/// How the `2n` samples are split between training and ghost roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rearrangement {
    /// Independent fair coin per pair `{i, i+n}`.
    J,
    /// A uniformly random ordered split of all `2n` positions.
    T,
}

/// Joint law of the rearrangement, the label block and the prediction block.
///
/// `predictor` is written in the training frame: positions `0..n` are the
/// samples the learner was trained on. Labels are i.i.d. from `label_dist`.
/// With rearrangement `σ`, the observed blocks are `b` (labels in natural
/// order) and `a` (predictions in natural order), related to the training
/// frame by `y = b_σ` and `ŷ = a_σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangementJoint {
    pub label_dist: Vec<f64>,
    pub predictor: DiscreteConditional,
}

impl RearrangementJoint {
    pub fn new(label_dist: Vec<f64>, predictor: DiscreteConditional) -> Result<Self> {
        check_label_dist(&label_dist, &predictor)?;
        Ok(Self { label_dist, predictor })
    }

    pub fn n(&self) -> usize {
        self.predictor.n()
    }
}

fn check_label_dist(label_dist: &[f64], q: &DiscreteConditional) -> Result<()> {
    if label_dist.len() != q.label_alphabet() {
        return Err(Error::DimensionMismatch { expected: q.label_alphabet(), got: label_dist.len() });
    }
    let sum: f64 = label_dist.iter().sum();
    if (sum - 1.0).abs() > 1e-12 || label_dist.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// `μ(y) = Π_i label_dist(y_i)` for every row index.
fn row_weights(label_dist: &[f64], len: usize) -> Vec<f64> {
    let k = label_dist.len();
    let side = k.pow(len as u32);
    (0..side).map(|idx| super::decode(idx, k, len).iter().map(|&y| label_dist[y]).product()).collect()
}

/// Exact `I(σ; Ŷ^{2n} | Y^{2n})` by enumerating the full joint.
///
/// All marginals are obtained by summing the joint, not from the identity
/// that links this quantity to the symmetrized prior.
pub fn conditional_mutual_information(joint: &RearrangementJoint, kind: Rearrangement) -> Result<f64> {
    let q = &joint.predictor;
    check_label_dist(&joint.label_dist, q)?;
    let n = q.n();
    if n > super::group::MAX_GROUP_N {
        return Err(Error::Budget(format!("n = {n} exceeds the enumeration cap")));
    }
    let group = match kind {
        Rearrangement::J => pair_swaps(n),
        Rearrangement::T => all_permutations(2 * n),
    };
    let (rows, cols) = (q.num_rows(), q.num_cols());
    let work = group.len().saturating_mul(rows).saturating_mul(cols);
    if work > ENUMERATION_BUDGET {
        return Err(Error::Budget(format!("{work} joint cells exceed {ENUMERATION_BUDGET}")));
    }
    let len = 2 * n;
    let mu = row_weights(&joint.label_dist, len);
    let w = 1.0 / group.len() as f64;
    let maps: Vec<(Vec<usize>, Vec<usize>)> =
        group.iter().map(|s| (index_map(s, q.label_alphabet(), len), index_map(s, q.pred_alphabet(), len))).collect();
    let cell = |g: usize, b: usize, a: usize| -> f64 {
        let (ym, pm) = &maps[g];
        w * mu[b] * q.row(ym[b])[pm[a]]
    };

    let mut p_sb = vec![0.0; group.len() * rows];
    let mut p_ba = vec![0.0; rows * cols];
    for g in 0..group.len() {
        for b in 0..rows {
            if mu[b] == 0.0 {
                continue;
            }
            for a in 0..cols {
                let p = cell(g, b, a);
                p_sb[g * rows + b] += p;
                p_ba[b * cols + a] += p;
            }
        }
    }
    let p_b: Vec<f64> = (0..rows).map(|b| p_ba[b * cols..(b + 1) * cols].iter().sum()).collect();

    let mut info = 0.0;
    for g in 0..group.len() {
        for b in 0..rows {
            if p_b[b] == 0.0 {
                continue;
            }
            for a in 0..cols {
                let p = cell(g, b, a);
                if p > 0.0 {
                    info += p * (p * p_b[b] / (p_sb[g * rows + b] * p_ba[b * cols + a])).ln();
                }
            }
        }
    }
    Ok(info.max(0.0))
}

/// `E_Y[KL(p(·|Y) ‖ p̄(·|Y))]` where `p̄` is the group average of `p`,
/// which attains the infimum over priors with the given symmetry.
///
/// For type III the expectation collapses to the single row of the fixed
/// label vector.
pub fn infimum_kl_over_symmetric(p: &DiscreteConditional, label_dist: &[f64], spec: &PermutationSpec) -> Result<f64> {
    check_label_dist(label_dist, p)?;
    let sym = symmetrize(p, spec)?;
    let rows = constrained_rows(p, spec);
    let mu = match spec.kind {
        SymmetryKind::Type3 => vec![1.0; p.num_rows()],
        _ => row_weights(label_dist, 2 * p.n()),
    };
    Ok(rows.into_iter().filter(|&r| mu[r] > 0.0).map(|r| mu[r] * kl_categorical_unchecked(p.row(r), sym.row(r))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn joint(q: DiscreteConditional) -> RearrangementJoint {
        RearrangementJoint::new(vec![0.5, 0.5], q).unwrap()
    }

    #[test]
    fn constant_predictor_carries_no_information() {
        let q = DiscreteConditional::from_fn(1, 2, 2, |_, a| if a == [0, 0] { 1.0 } else { 0.0 }).unwrap();
        assert_abs_diff_eq!(conditional_mutual_information(&joint(q), Rearrangement::J).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn marking_the_training_slot_reveals_one_coin() {
        let q = DiscreteConditional::from_fn(1, 2, 2, |_, a| if a == [1, 0] { 1.0 } else { 0.0 }).unwrap();
        let j = joint(q);
        assert_abs_diff_eq!(conditional_mutual_information(&j, Rearrangement::J).unwrap(), LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(conditional_mutual_information(&j, Rearrangement::T).unwrap(), LN_2, epsilon = 1e-12);
    }

    #[test]
    fn copying_labels_reveals_nothing() {
        let q = DiscreteConditional::from_fn(1, 2, 2, |y, a| if a == y { 1.0 } else { 0.0 }).unwrap();
        assert_abs_diff_eq!(conditional_mutual_information(&joint(q), Rearrangement::J).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn infimum_matches_enumeration_on_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..40 {
            let n = 1 + trial % 2;
            let bias: f64 = rng.random_range(0.2..0.8);
            let q = DiscreteConditional::random(n, 2, 2, &mut rng).unwrap();
            let j = RearrangementJoint::new(vec![bias, 1.0 - bias], q.clone()).unwrap();
            for (kind, rearr) in [(SymmetryKind::Type1, Rearrangement::J), (SymmetryKind::Type2, Rearrangement::T)] {
                let spec = PermutationSpec::new(kind, n, None).unwrap();
                let inf = infimum_kl_over_symmetric(&q, &j.label_dist, &spec).unwrap();
                let mi = conditional_mutual_information(&j, rearr).unwrap();
                assert_abs_diff_eq!(inf, mi, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn group_average_beats_other_symmetric_priors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = DiscreteConditional::random(1, 2, 2, &mut rng).unwrap();
        let spec = PermutationSpec::new(SymmetryKind::Type1, 1, None).unwrap();
        let best = infimum_kl_over_symmetric(&p, &[0.5, 0.5], &spec).unwrap();
        for _ in 0..100 {
            let other = symmetrize(&DiscreteConditional::random(1, 2, 2, &mut rng).unwrap(), &spec).unwrap();
            let kl: f64 = (0..p.num_rows()).map(|r| 0.25 * kl_categorical_unchecked(p.row(r), other.row(r))).sum();
            assert!(best <= kl + 1e-12);
        }
    }

    #[test]
    fn larger_group_costs_at_least_as_much() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let p = DiscreteConditional::random(2, 2, 2, &mut rng).unwrap();
            let t1 = infimum_kl_over_symmetric(
                &p,
                &[0.5, 0.5],
                &PermutationSpec::new(SymmetryKind::Type1, 2, None).unwrap(),
            )
            .unwrap();
            let t2 = infimum_kl_over_symmetric(
                &p,
                &[0.5, 0.5],
                &PermutationSpec::new(SymmetryKind::Type2, 2, None).unwrap(),
            )
            .unwrap();
            assert!(t2 >= t1 - 1e-12);
        }
    }

    #[test]
    fn type3_uses_only_the_fixed_row() {
        let q = DiscreteConditional::from_fn(1, 2, 2, |_, a| if a == [1, 0] { 1.0 } else { 0.0 }).unwrap();
        let same = PermutationSpec::new(SymmetryKind::Type3, 1, Some(vec![1, 1])).unwrap();
        assert_abs_diff_eq!(infimum_kl_over_symmetric(&q, &[0.5, 0.5], &same).unwrap(), LN_2, epsilon = 1e-12);
        let differ = PermutationSpec::new(SymmetryKind::Type3, 1, Some(vec![0, 1])).unwrap();
        assert_eq!(infimum_kl_over_symmetric(&q, &[0.5, 0.5], &differ).unwrap(), 0.0);
    }
}
