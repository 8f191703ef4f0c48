//! Numerical verification of the inequalities behind the bounds, plus the
//! covering and geometric-compression demonstrations.
//!
//! Every `verify_*` routine returns a [`VerificationReport`] holding the
//! worst margin of each checked inequality. [`run_suite`] bundles them into
//! the named suites used by `mdlb verify`.

mod combinatorics;
mod covering;
mod geometric;
mod hd;
mod identities;
mod l1;
mod report;
mod threshold;

pub use combinatorics::{
    bucket_exponent, verify_b_max, verify_bucket_asymptotics, verify_gallager, verify_vandermonde, AsymptoticRow,
};
pub use covering::{
    codebook_size, copy_label_setup, covering_simulation, verify_covering, CodebookSpec, CoverMode, CoveragePoint,
    MAX_CODEWORDS,
};
pub use geometric::{
    geometric_compression_demo, geometric_map, quantized_mutual_information, verify_geometric, GeometricReport,
    MIDPOINT_CENTERS, QUANTIZATION_LEVELS,
};
pub use hd::{log_exp_hd_sum, verify_exp_hd_sum, verify_hd_lemma};
pub use identities::verify_mi_equalities;
pub use l1::{exact_log_mgf_binary, log_mean_exp_ucb, verify_l1_empiric, LogMgfEstimate, MAX_LAMBDA_OVER_N};
pub use report::{Check, VerificationReport};
pub use threshold::{ThresholdExperiment, ThresholdOutcome};

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// `(K, n, λ)` configurations of the log-MGF check.
pub const L1_CONFIGS: [(usize, u64, f64); 3] = [(2, 100, 10.0), (5, 200, 50.0), (2, 50, 20.0)];

/// Named groups of checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// Grid checks of the `h_D` lemma.
    Hd,
    /// Vandermonde, `b_max`, Gallager, the exact `e^{n h_D}` sum and the
    /// `Bucket` exponent asymptotics.
    Bucket,
    /// Symmetric-prior identities and the threshold-learner experiment.
    Priors,
    /// Log-MGF of the L1 distance between empirical label distributions.
    L1,
    Covering,
    Geometric,
    All,
}

impl Suite {
    pub const ALL: [Suite; 7] =
        [Suite::Hd, Suite::Bucket, Suite::Priors, Suite::L1, Suite::Covering, Suite::Geometric, Suite::All];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hd => "hd",
            Suite::Bucket => "bucket",
            Suite::Priors => "priors",
            Suite::L1 => "l1",
            Suite::Covering => "covering",
            Suite::Geometric => "geometric",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown suite `{s}` (expected one of hd, bucket, priors, l1, covering, geometric, all)"
            ))
        })
    }
}

/// Runs every check in `suite`. Randomized checks derive their seeds from
/// `seed`, so reports are reproducible.
pub fn run_suite(suite: Suite, seed: u64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    let parts: &[Suite] = match suite {
        Suite::All => &Suite::ALL[..6],
        _ => std::slice::from_ref(&suite),
    };
    for &part in parts {
        match part {
            Suite::Hd => out.push(verify_hd_lemma(400, seed)?),
            Suite::Bucket => {
                out.push(verify_vandermonde(100)?);
                out.push(verify_b_max(30)?);
                out.push(verify_gallager(200)?);
                out.push(verify_exp_hd_sum(10..=14)?);
                out.push(verify_bucket_asymptotics(10, 2, 1, &[10, 50, 250])?.0);
            }
            Suite::Priors => {
                out.push(verify_mi_equalities(100, seed)?);
                out.push(ThresholdExperiment::default().run(10_000, seed)?.0);
            }
            Suite::L1 => {
                for (i, &(k, n, lambda)) in L1_CONFIGS.iter().enumerate() {
                    out.push(verify_l1_empiric(k, n, lambda, 100_000, seed.wrapping_add(i as u64), None)?.0);
                }
            }
            Suite::Covering => out.push(verify_covering(20, 400, seed)?),
            Suite::Geometric => out.push(verify_geometric(None).0),
            Suite::All => unreachable!(),
        }
    }
    Ok(out)
}
