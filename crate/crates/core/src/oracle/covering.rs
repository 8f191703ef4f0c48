use super::report::{Check, VerificationReport};
use crate::priors::{decode, encode, DiscreteConditional, RearrangementJoint};
use crate::{Error, Result};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::hash_map::Entry;
use std::collections::HashMap;

/// Largest codebook that will be drawn.
pub const MAX_CODEWORDS: usize = 1 << 22;
const SHARDS: usize = 32;

/// Exact matching, or matching of the generalization gap up to `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoverMode {
    /// Codeword must equal the rearranged prediction block; pair-swap
    /// rearrangement.
    Lossless,
    /// Codeword's gap may undershoot the realized gap by at most
    /// `epsilon`; uniformly random rearrangement of all positions.
    Lossy { epsilon: f64 },
}

/// A codebook of `⌈e^{m R}⌉` words drawn from `prior`, for every rate in `rates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookSpec {
    /// Number of blocks `m`, each holding `2n` samples.
    pub blocks: usize,
    pub n: usize,
    /// Rates in nats per block.
    pub rates: Vec<f64>,
    pub prior: DiscreteConditional,
    pub mode: CoverMode,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveragePoint {
    pub rate: f64,
    pub codewords: usize,
    pub coverage: f64,
    pub std_error: f64,
}

/// Codebook size `⌈e^{m R}⌉`.
pub fn codebook_size(blocks: usize, rate: f64) -> f64 {
    (blocks as f64 * rate).exp().ceil()
}

struct Sampler {
    rows: HashMap<usize, WeightedIndex<f64>>,
}

impl Sampler {
    fn new() -> Self {
        Self { rows: HashMap::new() }
    }

    fn draw<R: Rng + ?Sized>(&mut self, q: &DiscreteConditional, row: usize, rng: &mut R) -> Result<Option<usize>> {
        let w = match self.rows.entry(row) {
            Entry::Occupied(e) => e.into_mut(),
            Entry::Vacant(e) => match WeightedIndex::new(q.row(row).iter().copied()) {
                Ok(w) => e.insert(w),
                Err(_) => return Ok(None),
            },
        };
        Ok(Some(w.sample(rng)))
    }
}

/// Signed generalization gap of block predictions `v` (natural order)
/// against labels `b` when `σ` marks the training positions: ghost error
/// minus training error, summed over blocks.
fn gap(v: &[Vec<usize>], b: &[Vec<usize>], sigma: &[Vec<usize>], n: usize) -> f64 {
    let mut s = 0.0;
    for ((vj, bj), sj) in v.iter().zip(b).zip(sigma) {
        for (i, &pos) in sj.iter().enumerate() {
            let err = f64::from(u8::from(vj[pos] != bj[pos]));
            s += if i < n { -err } else { err };
        }
    }
    s / (v.len() * n) as f64
}

/// Probability that a codebook drawn from the prior covers the rearranged
/// prediction block, for each rate.
///
/// Every trial draws fresh labels, rearrangements, predictions and its own
/// codebook, one word at a time until the first cover. Smaller rates use a
/// prefix of the same codebook, so coverage is nondecreasing in the rate by
/// construction.
pub fn covering_simulation(
    spec: &CodebookSpec,
    joint: &RearrangementJoint,
    trials: usize,
) -> Result<Vec<CoveragePoint>> {
    let (q, p) = (&spec.prior, &joint.predictor);
    let n = spec.n;
    if spec.blocks == 0 || trials == 0 || spec.rates.is_empty() {
        return Err(Error::Domain("need at least one block, trial and rate".into()));
    }
    if q.n() != n || p.n() != n || q.label_alphabet() != p.label_alphabet() || q.pred_alphabet() != p.pred_alphabet() {
        return Err(Error::Schema("prior and predictor tables do not match the codebook spec".into()));
    }
    if spec.rates.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::Domain("rates must be non-negative".into()));
    }
    if let CoverMode::Lossy { .. } = spec.mode {
        if q.pred_alphabet() != q.label_alphabet() {
            return Err(Error::Domain("lossy covering compares predictions with labels; alphabets must agree".into()));
        }
    }
    let max_rate = spec.rates.iter().cloned().fold(0.0, f64::max);
    let l_max = codebook_size(spec.blocks, max_rate);
    if l_max > MAX_CODEWORDS as f64 {
        return Err(Error::Budget(format!("codebook of {l_max} words exceeds {MAX_CODEWORDS}")));
    }
    let l_max = l_max as usize;
    let (k, len) = (q.label_alphabet(), 2 * n);
    let label_draw = WeightedIndex::new(joint.label_dist.iter().copied()).map_err(|e| Error::Domain(e.to_string()))?;

    // index of the first covering codeword in each trial's own codebook
    let per = trials.div_ceil(SHARDS);
    let shards: Vec<Result<Vec<Option<usize>>>> = crate::with_pool(|| {
        (0..SHARDS)
            .into_par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
                rng.set_stream(1 + s as u64);
                let (mut pred_sampler, mut prior_sampler) = (Sampler::new(), Sampler::new());
                let count = per.min(trials.saturating_sub(s * per));
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let labels: Vec<Vec<usize>> =
                        (0..spec.blocks).map(|_| (0..len).map(|_| label_draw.sample(&mut rng)).collect()).collect();
                    let label_rows: Vec<usize> = labels.iter().map(|b| encode(b, k)).collect();
                    let mut realized = Vec::with_capacity(spec.blocks);
                    let mut sigmas = Vec::with_capacity(spec.blocks);
                    for b in &labels {
                        let mut sigma: Vec<usize> = (0..len).collect();
                        match spec.mode {
                            CoverMode::Lossless => {
                                for i in 0..n {
                                    if rng.random::<bool>() {
                                        sigma.swap(i, i + n);
                                    }
                                }
                            }
                            CoverMode::Lossy { .. } => sigma.shuffle(&mut rng),
                        }
                        let y: Vec<usize> = sigma.iter().map(|&j| b[j]).collect();
                        let yhat = pred_sampler.draw(p, encode(&y, k), &mut rng)?.ok_or(Error::NotNormalized(0.0))?;
                        let yhat = decode(yhat, p.pred_alphabet(), len);
                        let mut a = vec![0; len];
                        for (i, &j) in sigma.iter().enumerate() {
                            a[j] = yhat[i];
                        }
                        realized.push(a);
                        sigmas.push(sigma);
                    }
                    let target_codes: Vec<usize> = realized.iter().map(|a| encode(a, p.pred_alphabet())).collect();
                    let target_gap = gap(&realized, &labels, &sigmas, n);
                    let mut first = None;
                    'words: for r in 0..l_max {
                        let mut word = Vec::with_capacity(spec.blocks);
                        for (j, &row) in label_rows.iter().enumerate() {
                            let Some(c) = prior_sampler.draw(q, row, &mut rng)? else { break 'words };
                            if spec.mode == CoverMode::Lossless && c != target_codes[j] {
                                continue 'words;
                            }
                            word.push(decode(c, q.pred_alphabet(), len));
                        }
                        let covered = match spec.mode {
                            CoverMode::Lossless => true,
                            CoverMode::Lossy { epsilon } => target_gap - gap(&word, &labels, &sigmas, n) <= epsilon,
                        };
                        if covered {
                            first = Some(r);
                            break;
                        }
                    }
                    out.push(first);
                }
                Ok(out)
            })
            .collect()
    });
    let mut firsts = Vec::with_capacity(trials);
    for s in shards {
        firsts.extend(s?);
    }

    Ok(spec
        .rates
        .iter()
        .map(|&rate| {
            let size = (codebook_size(spec.blocks, rate) as usize).min(l_max);
            let hits = firsts.iter().filter(|f| f.is_some_and(|i| i < size)).count();
            let c = hits as f64 / trials as f64;
            CoveragePoint { rate, codewords: size, coverage: c, std_error: (c * (1.0 - c) / trials as f64).sqrt() }
        })
        .collect())
}

/// The reference experiment: labels are fair coins, the predictor copies
/// its labels, and the prior keeps each label with probability `agree`.
/// Returns the predictor joint, the prior and the per-block KL
/// `−2n ln(agree)`.
pub fn copy_label_setup(n: usize, agree: f64) -> Result<(RearrangementJoint, DiscreteConditional, f64)> {
    let copy = DiscreteConditional::from_fn(n, 2, 2, |y, a| f64::from(u8::from(y == a)))?;
    let prior = DiscreteConditional::from_fn(n, 2, 2, |y, a| {
        y.iter().zip(a).map(|(u, v)| if u == v { agree } else { 1.0 - agree }).product()
    })?;
    let joint = RearrangementJoint::new(vec![0.5, 0.5], copy)?;
    Ok((joint, prior, -2.0 * n as f64 * agree.ln()))
}

/// Monotonicity and rate-separation checks on the copy-label experiment
/// (`n = 1`, `agree = 0.8`, `m = 8`): one codebook seed per run, a six-point
/// rate sweep, and a comparison of rates `KL ± 0.5` on the same seed.
pub fn verify_covering(seeds: usize, trials: usize, seed: u64) -> Result<VerificationReport> {
    let start = std::time::Instant::now();
    let (joint, prior, kl) = copy_label_setup(1, 0.8)?;
    let sweep: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
    let (lo, hi) = ((kl - 0.5).max(0.0), kl + 0.5);
    let mut worst_step = f64::INFINITY;
    let mut separated = 0;
    for s in 0..seeds as u64 {
        let spec = CodebookSpec {
            blocks: 8,
            n: 1,
            rates: sweep.clone(),
            prior: prior.clone(),
            mode: CoverMode::Lossless,
            seed: seed.wrapping_add(s),
        };
        let c = covering_simulation(&spec, &joint, trials)?;
        worst_step = c.windows(2).map(|w| w[1].coverage - w[0].coverage).fold(worst_step, f64::min);
        let pair = covering_simulation(&CodebookSpec { rates: vec![lo, hi], ..spec }, &joint, trials)?;
        separated += usize::from(pair[1].coverage > pair[0].coverage);
    }
    let need = seeds - seeds / 20;
    let mut r = VerificationReport::new("covering_monotonicity")
        .param("seeds", seeds)
        .param("trials", trials)
        .param("seed", seed)
        .param("kl_per_block", kl);
    r.push(Check::new("coverage_nondecreasing_in_rate", worst_step, 0.0));
    r.push(
        Check::verdict("rate_separation", separated as f64 - need as f64, separated >= need)
            .with_note(format!("{separated}/{seeds} seeds cover more at KL+0.5 than at max(KL-0.5, 0)")),
    );
    r.runtime = start.elapsed();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point_mass(n: usize) -> DiscreteConditional {
        DiscreteConditional::from_fn(n, 2, 2, |_, a| f64::from(u8::from(a.iter().all(|&v| v == 1)))).unwrap()
    }

    #[test]
    fn matching_point_masses_cover_at_zero_rate() {
        let joint = RearrangementJoint::new(vec![0.5, 0.5], point_mass(1)).unwrap();
        let spec = CodebookSpec {
            blocks: 4,
            n: 1,
            rates: vec![0.0],
            prior: point_mass(1),
            mode: CoverMode::Lossless,
            seed: 1,
        };
        let c = covering_simulation(&spec, &joint, 200).unwrap();
        assert_eq!(c[0].coverage, 1.0);
        assert_eq!(c[0].codewords, 1);
    }

    #[test]
    fn prior_without_mass_never_covers() {
        let joint = RearrangementJoint::new(vec![0.5, 0.5], point_mass(1)).unwrap();
        let zeros = DiscreteConditional::from_fn(1, 2, 2, |_, a| f64::from(u8::from(a == [0, 0]))).unwrap();
        let spec = CodebookSpec {
            blocks: 3,
            n: 1,
            rates: vec![0.0, 1.0, 2.0],
            prior: zeros,
            mode: CoverMode::Lossless,
            seed: 2,
        };
        assert!(covering_simulation(&spec, &joint, 100).unwrap().iter().all(|p| p.coverage == 0.0));
    }

    #[test]
    fn coverage_grows_with_rate() {
        let (joint, prior, kl) = copy_label_setup(1, 0.8).unwrap();
        assert!((kl - 0.446_287).abs() < 1e-6);
        let rates: Vec<f64> = (0..6).map(|i| 0.2 * i as f64).collect();
        for seed in 0..5 {
            let spec = CodebookSpec {
                blocks: 8,
                n: 1,
                rates: rates.clone(),
                prior: prior.clone(),
                mode: CoverMode::Lossless,
                seed,
            };
            let c = covering_simulation(&spec, &joint, 500).unwrap();
            assert!(c.windows(2).all(|w| w[1].coverage >= w[0].coverage));
            assert!(c[5].coverage > 0.9);
        }
    }

    #[test]
    fn lossy_mode_is_at_least_as_easy_as_exact() {
        let (joint, prior, _) = copy_label_setup(1, 0.8).unwrap();
        let base = CodebookSpec { blocks: 6, n: 1, rates: vec![0.0, 0.5], prior, mode: CoverMode::Lossless, seed: 3 };
        let exact = covering_simulation(&base, &joint, 300).unwrap();
        let lossy = covering_simulation(&CodebookSpec { mode: CoverMode::Lossy { epsilon: 0.1 }, ..base }, &joint, 300)
            .unwrap();
        assert!(lossy[0].coverage >= exact[0].coverage);
        assert_eq!(lossy[1].coverage, 1.0);
    }

    #[test]
    fn budget_is_enforced() {
        let (joint, prior, _) = copy_label_setup(1, 0.8).unwrap();
        let spec = CodebookSpec { blocks: 8, n: 1, rates: vec![3.0], prior, mode: CoverMode::Lossless, seed: 0 };
        assert!(matches!(covering_simulation(&spec, &joint, 10), Err(Error::Budget(_))));
    }
}
