//! The combinatorial tail `Bucket(n, a, b)`, its inverse `b_max`, Gallager's
//! binomial sandwich, and the `e^{n h_D}` sum that does not stay below `n`.
//!
//! Run with `cargo run --example bucket_tail`.

use mdlb::math::{b_max, bucket, gallager_sandwich};
use mdlb::oracle::{log_exp_hd_sum, verify_bucket_asymptotics};

fn main() -> mdlb::Result<()> {
    let n = 50;
    println!("Bucket(50, 5, b):");
    for b in [0, 5, 10, 20, 30] {
        println!("  b = {b:>2}  {:.6e}", bucket(n, 5, b)?);
    }
    for delta in [0.1, 0.01, 0.001] {
        println!("b_max(50, 5, {delta}) = {}", b_max(n, 5, delta)?);
    }

    let s = gallager_sandwich(100, 30)?;
    println!("C(100,30) e^(-100 h_b(0.3)): {:.6} <= {:.6} <= {:.6}", s.lower, s.value, s.upper);

    println!("max over V of the exact sum / n:");
    for n in [10u64, 14, 20, 33, 40] {
        let worst = (1..=2 * n).map(|v| log_exp_hd_sum(n, v).map(f64::exp)).collect::<mdlb::Result<Vec<_>>>()?;
        let worst = worst.into_iter().fold(0.0, f64::max);
        println!("  n = {n:>2}  {:.4}", worst / n as f64);
    }

    let (_, rows) = verify_bucket_asymptotics(10, 2, 1, &[10, 50, 250])?;
    for r in rows {
        println!("m = {:>3}: |exponent error| = {:.4}", r.m, r.max_abs_error);
    }
    Ok(())
}
