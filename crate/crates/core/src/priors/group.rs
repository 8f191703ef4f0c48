use super::conditional::{decode, encode};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest half-length whose groups are enumerated.
pub const MAX_GROUP_N: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryKind {
    /// Pair swaps `{i, i+n}`.
    Type1,
    /// All permutations of `2n` positions.
    Type2,
    /// Permutations preserving a label vector.
    Type3,
}

/// A permutation group on `2n` positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationSpec {
    pub kind: SymmetryKind,
    pub n: usize,
    pub labels: Option<Vec<usize>>,
}

impl PermutationSpec {
    pub fn new(kind: SymmetryKind, n: usize, labels: Option<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("n must be positive".into()));
        }
        if n > MAX_GROUP_N {
            return Err(Error::Budget(format!("n = {n} exceeds the enumeration cap {MAX_GROUP_N}")));
        }
        match (&kind, &labels) {
            (SymmetryKind::Type3, None) => return Err(Error::Domain("type-III symmetry needs a label vector".into())),
            (_, Some(l)) if l.len() != 2 * n => return Err(Error::DimensionMismatch { expected: 2 * n, got: l.len() }),
            _ => {}
        }
        Ok(Self { kind, n, labels })
    }

    /// Every group element as a position map `π`, acting by `(v_π)_i = v_{π(i)}`.
    pub fn group(&self) -> Result<Vec<Vec<usize>>> {
        if self.n > MAX_GROUP_N {
            return Err(Error::Budget(format!("n = {} exceeds the enumeration cap", self.n)));
        }
        Ok(match self.kind {
            SymmetryKind::Type1 => pair_swaps(self.n),
            SymmetryKind::Type2 => all_permutations(2 * self.n),
            SymmetryKind::Type3 => {
                let labels = self
                    .labels
                    .as_ref()
                    .ok_or_else(|| Error::Domain("type-III symmetry needs a label vector".into()))?;
                all_permutations(2 * self.n)
                    .into_iter()
                    .filter(|p| p.iter().enumerate().all(|(i, &j)| labels[j] == labels[i]))
                    .collect()
            }
        })
    }
}

/// The `2^n` products of pair swaps `{i, i+n}`.
pub(crate) fn pair_swaps(n: usize) -> Vec<Vec<usize>> {
    (0..1usize << n)
        .map(|mask| {
            let mut p: Vec<usize> = (0..2 * n).collect();
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    p.swap(i, i + n);
                }
            }
            p
        })
        .collect()
}

/// All permutations of `0..len` in lexicographic order.
pub(crate) fn all_permutations(len: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..len).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (0..len.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            return out;
        };
        let j = (i + 1..len).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
        out.push(current.clone());
    }
}

/// For every vector index, the index of the permuted vector `v_π`.
pub(crate) fn index_map(perm: &[usize], alphabet: usize, len: usize) -> Vec<usize> {
    let side = alphabet.pow(len as u32);
    (0..side)
        .map(|idx| {
            let v = decode(idx, alphabet, len);
            let permuted: Vec<usize> = perm.iter().map(|&j| v[j]).collect();
            encode(&permuted, alphabet)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes() {
        for n in 1..=3 {
            let t1 = PermutationSpec::new(SymmetryKind::Type1, n, None).unwrap().group().unwrap();
            assert_eq!(t1.len(), 1 << n);
        }
        let t2 = PermutationSpec::new(SymmetryKind::Type2, 3, None).unwrap().group().unwrap();
        assert_eq!(t2.len(), 720);
        let t3 = PermutationSpec::new(SymmetryKind::Type3, 2, Some(vec![0, 1, 1, 0])).unwrap();
        let g = t3.group().unwrap();
        assert_eq!(g.len(), 4);
        for p in &g {
            assert!(p.iter().enumerate().all(|(i, &j)| [0, 1, 1, 0][i] == [0, 1, 1, 0][j]));
        }
    }

    #[test]
    fn type1_is_inside_type2() {
        let t2 = all_permutations(4);
        for p in pair_swaps(2) {
            assert!(t2.contains(&p));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(PermutationSpec::new(SymmetryKind::Type2, 4, None).is_err());
        assert!(PermutationSpec::new(SymmetryKind::Type3, 2, None).is_err());
        assert!(PermutationSpec::new(SymmetryKind::Type3, 2, Some(vec![0, 1])).is_err());
    }
}
