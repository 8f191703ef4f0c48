//! How many codewords does a prior need to cover a prediction block? Coverage
//! switches on once the rate passes the per-block KL.
//!
//! Run with `cargo run --release --example covering`.

use mdlb::oracle::{copy_label_setup, covering_simulation, CodebookSpec, CoverMode};

fn main() -> mdlb::Result<()> {
    let (joint, prior, kl) = copy_label_setup(1, 0.8)?;
    println!("KL per block: {kl:.4} nats");
    let rates: Vec<f64> = (0..=12).map(|i| 0.1 * i as f64).collect();
    for mode in [CoverMode::Lossless, CoverMode::Lossy { epsilon: 0.1 }] {
        let spec = CodebookSpec { blocks: 8, n: 1, rates: rates.clone(), prior: prior.clone(), mode, seed: 5 };
        println!("{mode:?}");
        for p in covering_simulation(&spec, &joint, 2000)? {
            let bar = "#".repeat((p.coverage * 40.0).round() as usize);
            println!("  R = {:.1}  {:>5} words  {:.3} {bar}", p.rate, p.codewords, p.coverage);
        }
    }
    Ok(())
}
