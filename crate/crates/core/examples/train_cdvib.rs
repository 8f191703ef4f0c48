//! Trains VIB, lossless CDVIB and lossy CDVIB on a four-class Gaussian
//! mixture, then evaluates the representation bound on each model.
//!
//! Run with `cargo run --release --example train_cdvib`.

use mdlb::bounds::{empirical_gap, estimate_latent_kl, BoundInputs, BoundReport, ReportMetadata};
use mdlb::train::{synth_dataset, train, DataSpec, GeneratorSpec, Objective, Split, TrainConfig};

fn main() -> mdlb::Result<()> {
    let spec = DataSpec { generator: GeneratorSpec::quadrants(1.42), n_train: 1000, n_test: 1000 };
    let data = synth_dataset(&spec, 3)?;

    for objective in Objective::ALL {
        let cfg =
            TrainConfig { objective, beta: 1e-3, centers_per_class: 2, epochs: 15, seed: 3, ..TrainConfig::default() };
        let out = train(&cfg, &data.train, Some(&data.ghost))?;
        if let Some(msg) = &out.divergence {
            eprintln!("{objective}: diverged ({msg})");
            continue;
        }
        let last = out.history.iter().rev().find(|h| h.split == Split::Test).expect("test rows");
        let kl = estimate_latent_kl(&data.train, &data.ghost, &out.model, &out.bank)?;
        let gap = empirical_gap(&out.model, &data.train, &data.ghost, 32, 3)?;
        let report = BoundReport::compute(
            BoundInputs::new(data.train.len() as u64, 4, kl.total),
            gap.train_risk,
            gap.gap,
            ReportMetadata::default(),
        )?;
        println!(
            "{objective:<15} test acc {:.4}  latent KL {:>9.2} nats  gap {:+.4}  representation bound {:.4}",
            last.accuracy, kl.total, gap.gap, report.t4_expectation
        );
    }
    Ok(())
}
