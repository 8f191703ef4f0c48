//! Every bound for a given information budget, with vacuous values flagged.
//!
//! Run with `cargo run --example bound_report`.

use mdlb::bounds::{population_risk_bound_t3, vc_prior_bound, BoundInputs, BoundReport, ReportMetadata};

fn main() -> mdlb::Result<()> {
    let n = 5000;
    for kl in [0.0, 5.0, 50.0, 500.0] {
        let report = BoundReport::compute(BoundInputs::new(n, 10, kl), 0.08, 0.0, ReportMetadata::default())?;
        println!("KL = {kl} nats, n = {n}");
        print!("{}", report.table());
        println!();
    }

    // Realizable case: zero training error gives a bound of order 1/n.
    let r = population_risk_bound_t3(3.0, n, 0.0, Some(0.05))?;
    println!("realizable: h_D bound {:.6}, linear form {:?}", r.value, r.linear_form);
    println!("VC-style prior term for d = 10: {:.3} nats", vc_prior_bound(n, 10)?);
    Ok(())
}
