//! Minimum-description-length generalization bounds and the training
//! machinery that goes with them.
//!
//! The crate is organized around five areas:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`math`] | binary entropy, `h_D` and its inverse, closed-form KL, log-domain binomials, `Bucket` / `b_max`, Gallager's sandwich |
//! | [`priors`] | exact type-I/II/III symmetric conditional priors on tiny discrete spaces and the matching conditional mutual informations |
//! | [`bounds`] | every generalization bound (expectation, tail, `h_D`-based, representation) plus latent-KL and empirical-gap estimators |
//! | [`train`] | a desk-scale encoder/decoder trainer for VIB, lossless CDVIB and lossy CDVIB with hand-derived gradients |
//! | [`oracle`] | numerical verification of the inequalities used in the proofs, covering and geometric-compression demos |
//!
//! The [`cli`] module holds the file formats and command implementations behind
//! the `mdlb` binary.
//!
//! All information quantities are in nats unless a [`math::LogBase`] says otherwise.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
mod error;
pub mod math;
pub mod oracle;
pub mod priors;
pub mod train;

pub use error::{Error, Result};

/// Worker cap from `MDLB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("MDLB_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0)
}

/// Runs `f` on a rayon pool honoring `MDLB_THREADS`.
///
/// Results never depend on the worker count: callers shard work with
/// per-shard seeds and reduce in shard order.
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}
