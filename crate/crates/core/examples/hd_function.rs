//! `h_D`, its inverse, and what they say about a population-risk bound.
//!
//! Run with `cargo run --example hd_function`.

use mdlb::math::{binary_entropy, h_d, h_d_inverse, LogBase};
use mdlb::oracle::verify_hd_lemma;

fn main() -> mdlb::Result<()> {
    println!("{:>6} {:>6} {:>12} {:>12}", "x", "x'", "h_D nats", "h_D bits");
    for (x, xp) in [(0.1, 0.0), (0.3, 0.1), (0.5, 0.5), (0.9, 0.2)] {
        let nats = h_d(x, xp, LogBase::Natural)?;
        let bits = h_d(x, xp, LogBase::Base2)?;
        println!("{x:>6.2} {xp:>6.2} {nats:>12.6} {bits:>12.6}");
    }
    println!("h_b(0.11) = {:.6} bits", binary_entropy(0.11, LogBase::Base2)?);

    // A training error of 0.05 and a budget of 0.02 nats per sample: the
    // population risk can be at most this.
    let risk = h_d_inverse(0.05, 0.02, LogBase::Natural)?;
    println!("largest x with h_D(x, 0.05) <= 0.02 nats: {risk:.6}");

    let report = verify_hd_lemma(400, 1)?;
    print!("{}", report.text());
    Ok(())
}
