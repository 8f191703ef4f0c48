use super::report::{Check, VerificationReport};
use crate::priors::{
    conditional_mutual_information, infimum_kl_over_symmetric, DiscreteConditional, PermutationSpec, Rearrangement,
    RearrangementJoint, SymmetryKind,
};
use crate::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Compares the best symmetric-prior KL with the enumerated conditional
/// mutual information on `tables` random binary predictors, half with
/// `n = 1` and half with `n = 2`. Type I pairs with pair-swap
/// rearrangements, type II with uniformly random ones.
pub fn verify_mi_equalities(tables: usize, seed: u64) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_j, mut worst_t) = (0.0f64, 0.0f64);
    for i in 0..tables {
        let n = 1 + i % 2;
        let q: f64 = rng.random_range(0.05..0.95);
        let p = DiscreteConditional::random(n, 2, 2, &mut rng)?;
        let label_dist = vec![1.0 - q, q];
        let joint = RearrangementJoint::new(label_dist.clone(), p.clone())?;
        for (kind, rearrangement, worst) in [
            (SymmetryKind::Type1, Rearrangement::J, &mut worst_j),
            (SymmetryKind::Type2, Rearrangement::T, &mut worst_t),
        ] {
            let spec = PermutationSpec::new(kind, n, None)?;
            let inf = infimum_kl_over_symmetric(&p, &label_dist, &spec)?;
            let mi = conditional_mutual_information(&joint, rearrangement)?;
            *worst = worst.max((inf - mi).abs());
        }
    }
    let mut report = VerificationReport::new("mi_equalities").param("tables", tables).param("seed", seed);
    report.push(Check::new("type1_vs_pair_swaps", -worst_j, 1e-9));
    report.push(Check::new("type2_vs_all_permutations", -worst_t, 1e-9));
    report.runtime = start.elapsed();
    Ok(report)
}
