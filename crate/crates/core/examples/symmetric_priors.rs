//! Symmetric conditional priors on a tiny label space: the best symmetric
//! prior is the group average, and its KL equals a conditional mutual
//! information.
//!
//! Run with `cargo run --example symmetric_priors`.

use mdlb::priors::{
    check_symmetry, conditional_mutual_information, infimum_kl_over_symmetric, symmetrize, DiscreteConditional,
    PermutationSpec, Rearrangement, RearrangementJoint, SymmetryKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mdlb::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 2;
    let p = DiscreteConditional::random(n, 2, 2, &mut rng)?;
    let label_dist = vec![0.3, 0.7];
    let joint = RearrangementJoint::new(label_dist.clone(), p.clone())?;

    for (kind, rearrangement) in [(SymmetryKind::Type1, Rearrangement::J), (SymmetryKind::Type2, Rearrangement::T)] {
        let spec = PermutationSpec::new(kind, n, None)?;
        let before = check_symmetry(&p, &spec)?;
        let q = symmetrize(&p, &spec)?;
        let after = check_symmetry(&q, &spec)?;
        let inf = infimum_kl_over_symmetric(&p, &label_dist, &spec)?;
        let mi = conditional_mutual_information(&joint, rearrangement)?;
        println!(
            "{kind:?}: violation {:.3e} -> {:.3e}; best KL {inf:.10} vs CMI {mi:.10} nats",
            before.max_violation, after.max_violation
        );
    }
    Ok(())
}
