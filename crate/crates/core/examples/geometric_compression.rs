//! A piecewise-linear latent map that clusters inputs around two centers:
//! one bit describes it up to a small distortion, while its exact
//! description keeps growing with the quantization resolution.
//!
//! Run with `cargo run --example geometric_compression`.

use mdlb::oracle::{geometric_compression_demo, geometric_map};

fn main() {
    for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("u({x:.2}) = {:+.4}", geometric_map(x));
    }
    let g = geometric_compression_demo(None);
    println!(
        "lossy: centers {:?}, distortion {:.4}, rate {:.4} bits",
        g.centers, g.lossy_distortion, g.lossy_rate_bits
    );
    for (q, mi) in &g.lossless_mi {
        println!("lossless at step {q:.2e}: {mi:.4} nats");
    }
    let edge = geometric_compression_demo(Some([-0.9, 1.1]));
    println!("with centers [-0.9, 1.1] the distortion is {:.4}", edge.lossy_distortion);
}
