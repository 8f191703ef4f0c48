//! Exact symmetric conditional priors over predicted-label vectors.
//!
//! A [`DiscreteConditional`] is a dense table `Q(ŷ | y)` over length-`2n`
//! vectors, where positions `0..n` hold the training sample and `n..2n` the
//! ghost sample. Vectors are indexed in base-`alphabet` positional notation
//! with position 0 most significant.
//!
//! Three symmetry groups act on positions:
//!
//! * type I: independent swaps of each pair `{i, i+n}` (`2^n` elements);
//! * type II: every permutation of the `2n` positions (`(2n)!` elements);
//! * type III: permutations that keep a given label vector fixed.
//!
//! [`infimum_kl_over_symmetric`] evaluates the best symmetric prior by group
//! averaging; [`conditional_mutual_information`] computes the same quantity
//! the long way, by enumerating the rearranged joint distribution.

mod conditional;
mod group;
mod mutual_information;

pub use conditional::{decode, encode, DiscreteConditional, MAX_TABLE_SIDE};
pub use group::{PermutationSpec, SymmetryKind};
pub use mutual_information::{
    conditional_mutual_information, infimum_kl_over_symmetric, Rearrangement, RearrangementJoint, ENUMERATION_BUDGET,
};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Outcome of [`check_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub max_violation: f64,
}

const SYMMETRY_TOL: f64 = 1e-12;

fn check_compatible(q: &DiscreteConditional, spec: &PermutationSpec) -> Result<()> {
    if q.n() != spec.n {
        return Err(Error::DimensionMismatch { expected: q.n(), got: spec.n });
    }
    if let Some(labels) = &spec.labels {
        if labels.iter().any(|&y| y >= q.label_alphabet()) {
            return Err(Error::Domain("label outside the label alphabet".into()));
        }
    }
    Ok(())
}

/// Rows a spec constrains: every row, or only the row of the fixed labels
/// for type III.
fn constrained_rows(q: &DiscreteConditional, spec: &PermutationSpec) -> Vec<usize> {
    match (&spec.kind, &spec.labels) {
        (SymmetryKind::Type3, Some(labels)) => vec![encode(labels, q.label_alphabet())],
        _ => (0..q.num_rows()).collect(),
    }
}

/// Tests `Q(ŷ_π | y_π) = Q(ŷ | y)` for every `π` in the group, within `1e-12`.
pub fn check_symmetry(q: &DiscreteConditional, spec: &PermutationSpec) -> Result<SymmetryCheck> {
    check_compatible(q, spec)?;
    let group = spec.group()?;
    let len = 2 * q.n();
    let mut max_violation: f64 = 0.0;
    for perm in &group {
        let y_map = group::index_map(perm, q.label_alphabet(), len);
        let p_map = group::index_map(perm, q.pred_alphabet(), len);
        for row in constrained_rows(q, spec) {
            let original = q.row(row);
            let permuted = q.row(y_map[row]);
            for (a, &value) in original.iter().enumerate() {
                max_violation = max_violation.max((permuted[p_map[a]] - value).abs());
            }
        }
    }
    Ok(SymmetryCheck { symmetric: max_violation <= SYMMETRY_TOL, max_violation })
}

/// Group average `Q̄(ŷ | y) = |G|⁻¹ Σ_π Q(ŷ_π | y_π)`.
pub fn symmetrize(q: &DiscreteConditional, spec: &PermutationSpec) -> Result<DiscreteConditional> {
    check_compatible(q, spec)?;
    let group = spec.group()?;
    let len = 2 * q.n();
    let rows = constrained_rows(q, spec);
    let mut out = q.clone();
    for &row in &rows {
        out.row_mut(row).iter_mut().for_each(|v| *v = 0.0);
    }
    let weight = 1.0 / group.len() as f64;
    for perm in &group {
        let y_map = group::index_map(perm, q.label_alphabet(), len);
        let p_map = group::index_map(perm, q.pred_alphabet(), len);
        for &row in &rows {
            let source = q.row(y_map[row]).to_vec();
            for (a, slot) in out.row_mut(row).iter_mut().enumerate() {
                *slot += weight * source[p_map[a]];
            }
        }
    }
    Ok(out)
}
