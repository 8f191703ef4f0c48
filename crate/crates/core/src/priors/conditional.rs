use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest table side (`alphabet^{2n}`) that will be materialized.
pub const MAX_TABLE_SIDE: usize = 1 << 20;

const ROW_TOL: f64 = 1e-12;

/// Positional index of `v` in base `alphabet`, position 0 most significant.
pub fn encode(v: &[usize], alphabet: usize) -> usize {
    v.iter().fold(0, |acc, &d| acc * alphabet + d)
}

/// Inverse of [`encode`].
pub fn decode(mut index: usize, alphabet: usize, len: usize) -> Vec<usize> {
    let mut v = vec![0; len];
    for slot in v.iter_mut().rev() {
        *slot = index % alphabet;
        index /= alphabet;
    }
    v
}

fn table_side(alphabet: usize, len: usize) -> Result<usize> {
    let mut side: usize = 1;
    for _ in 0..len {
        side = side
            .checked_mul(alphabet)
            .filter(|&s| s <= MAX_TABLE_SIDE)
            .ok_or_else(|| Error::Budget(format!("{alphabet}^{len} exceeds {MAX_TABLE_SIDE}")))?;
    }
    Ok(side)
}

/// Dense conditional `Q(ŷ^{2n} | y^{2n})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConditional", into = "RawConditional")]
pub struct DiscreteConditional {
    n: usize,
    label_alphabet: usize,
    pred_alphabet: usize,
    table: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct RawConditional {
    n: usize,
    label_alphabet: usize,
    pred_alphabet: usize,
    table: Vec<Vec<f64>>,
}

impl TryFrom<RawConditional> for DiscreteConditional {
    type Error = Error;

    fn try_from(raw: RawConditional) -> Result<Self> {
        DiscreteConditional::new(raw.n, raw.label_alphabet, raw.pred_alphabet, raw.table)
    }
}

impl From<DiscreteConditional> for RawConditional {
    fn from(q: DiscreteConditional) -> Self {
        RawConditional { n: q.n, label_alphabet: q.label_alphabet, pred_alphabet: q.pred_alphabet, table: q.table }
    }
}

impl DiscreteConditional {
    pub fn new(n: usize, label_alphabet: usize, pred_alphabet: usize, table: Vec<Vec<f64>>) -> Result<Self> {
        if n == 0 || label_alphabet == 0 || pred_alphabet == 0 {
            return Err(Error::Domain("n and alphabet sizes must be positive".into()));
        }
        let rows = table_side(label_alphabet, 2 * n)?;
        let cols = table_side(pred_alphabet, 2 * n)?;
        if table.len() != rows {
            return Err(Error::DimensionMismatch { expected: rows, got: table.len() });
        }
        for row in &table {
            if row.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: row.len() });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_TOL || row.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::NotNormalized(sum));
            }
        }
        Ok(Self { n, label_alphabet, pred_alphabet, table })
    }

    /// Builds a table from an unnormalized weight function `f(y, ŷ)`;
    /// each row is rescaled to sum to one.
    pub fn from_fn(
        n: usize,
        label_alphabet: usize,
        pred_alphabet: usize,
        mut f: impl FnMut(&[usize], &[usize]) -> f64,
    ) -> Result<Self> {
        let len = 2 * n;
        let rows = table_side(label_alphabet, len)?;
        let cols = table_side(pred_alphabet, len)?;
        let mut table = Vec::with_capacity(rows);
        for r in 0..rows {
            let y = decode(r, label_alphabet, len);
            let mut row: Vec<f64> = (0..cols).map(|c| f(&y, &decode(c, pred_alphabet, len))).collect();
            let sum: f64 = row.iter().sum();
            if !(sum > 0.0) || !sum.is_finite() {
                return Err(Error::Domain(format!("row {r} has no positive mass")));
            }
            row.iter_mut().for_each(|v| *v /= sum);
            table.push(row);
        }
        Self::new(n, label_alphabet, pred_alphabet, table)
    }

    /// Every row uniform over `ŷ`.
    pub fn uniform(n: usize, label_alphabet: usize, pred_alphabet: usize) -> Result<Self> {
        Self::from_fn(n, label_alphabet, pred_alphabet, |_, _| 1.0)
    }

    /// `Q^{⊗2n}` of a fixed marginal over predictions, ignoring `y`.
    pub fn product(n: usize, label_alphabet: usize, marginal: &[f64]) -> Result<Self> {
        Self::from_fn(n, label_alphabet, marginal.len(), |_, yhat| yhat.iter().map(|&a| marginal[a]).product())
    }

    /// Rows drawn as normalized cubes of uniforms, which gives skewed
    /// tables with full support.
    pub fn random<R: Rng + ?Sized>(n: usize, label_alphabet: usize, pred_alphabet: usize, rng: &mut R) -> Result<Self> {
        Self::from_fn(n, label_alphabet, pred_alphabet, |_, _| {
            let u: f64 = rng.random::<f64>() + 1e-3;
            u * u * u
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label_alphabet(&self) -> usize {
        self.label_alphabet
    }

    pub fn pred_alphabet(&self) -> usize {
        self.pred_alphabet
    }

    pub fn num_rows(&self) -> usize {
        self.table.len()
    }

    pub fn num_cols(&self) -> usize {
        self.table[0].len()
    }

    pub fn row(&self, y_index: usize) -> &[f64] {
        &self.table[y_index]
    }

    pub(crate) fn row_mut(&mut self, y_index: usize) -> &mut [f64] {
        &mut self.table[y_index]
    }

    /// `Q(ŷ | y)` for explicit vectors.
    pub fn prob(&self, y: &[usize], yhat: &[usize]) -> f64 {
        self.table[encode(y, self.label_alphabet)][encode(yhat, self.pred_alphabet)]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_unnormalized_rows() {
        let bad = vec![vec![0.5, 0.6, 0.0, 0.0]; 4];
        assert!(matches!(DiscreteConditional::new(1, 2, 2, bad), Err(Error::NotNormalized(_))));
        let short = vec![vec![1.0]; 4];
        assert!(DiscreteConditional::new(1, 2, 2, short).is_err());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(DiscreteConditional::uniform(11, 2, 2), Err(Error::Budget(_))));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let q = DiscreteConditional::product(1, 2, &[0.25, 0.75]).unwrap();
        let back = DiscreteConditional::from_json(&q.to_json().unwrap()).unwrap();
        assert_eq!(q, back);
        let tampered =
            r#"{"n":1,"label-alphabet":2,"pred-alphabet":2,"table":[[1,0,0,0],[1,0,0,0],[1,0,0,0],[0.5,0,0,0]]}"#;
        assert!(DiscreteConditional::from_json(tampered).is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_inverse(v in proptest::collection::vec(0usize..3, 1..7)) {
            let idx = encode(&v, 3);
            prop_assert_eq!(decode(idx, 3, v.len()), v);
        }
    }
}
