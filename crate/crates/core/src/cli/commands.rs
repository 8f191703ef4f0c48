use super::config::{load, CoveringConfig, RunConfig};
use super::manifest::{content_hash, write_atomic, RunManifest};
use super::svg::{render, Panel, Series};
use super::{EXIT_DIVERGED, EXIT_OK, EXIT_VERIFY_FAILED};
use crate::bounds::{empirical_gap, estimate_latent_kl, BoundInputs, BoundReport, ReportMetadata, CSV_HEADER};
use crate::oracle::{covering_simulation, run_suite, CodebookSpec, Suite, VerificationReport};
use crate::train::{
    synth_dataset, train, write_history_csv, Checkpoint, Dataset, HistoryRow, Objective, Split, TrainOutcome,
};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
struct VerifyOutput<'a> {
    suite: Suite,
    seed: u64,
    passed: bool,
    reports: &'a [VerificationReport],
}

/// Runs a suite, writes `verify-<suite>.json` and prints the text reports.
pub fn cmd_verify(suite: Suite, seed: u64, out: &Path) -> Result<i32> {
    let mut manifest = RunManifest::begin("verify", None, seed, format!("suite={suite} seed={seed}").as_bytes(), out);
    let reports = run_suite(suite, seed)?;
    for r in &reports {
        print!("{}", r.text());
    }
    let passed = reports.iter().all(|r| r.passed);
    let file = format!("verify-{suite}.json");
    let json = serde_json::to_string_pretty(&VerifyOutput { suite, seed, passed, reports: &reports })?;
    write_atomic(&out.join(&file), json.as_bytes())?;
    manifest.outputs.push(file);
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    let code = if passed {
        println!("all {} reports passed", reports.len());
        EXIT_OK
    } else {
        println!("{} of {} reports failed: {}", failed.len(), reports.len(), failed.join(", "));
        EXIT_VERIFY_FAILED
    };
    manifest.finish(code)?;
    Ok(code)
}

/// Overrides applied on top of a run config.
#[derive(Debug, Clone, Default)]
pub struct TrainOverrides {
    pub seed: Option<u64>,
    pub beta: Option<f64>,
    pub objective: Option<Objective>,
}

fn history_name(objective: Option<Objective>, repeat: Option<usize>) -> String {
    let mut s = String::from("history");
    if let Some(o) = objective {
        s.push('-');
        s.push_str(o.name());
    }
    if let Some(r) = repeat {
        s.push_str(&format!("-r{r}"));
    }
    s.push_str(".csv");
    s
}

fn series_of(history: &[HistoryRow], split: Split, f: impl Fn(&HistoryRow) -> f64) -> (Vec<f64>, Vec<f64>) {
    history.iter().filter(|r| r.split == split).map(|r| (r.epoch as f64, f(r))).unzip()
}

/// Trains every objective `repeats` times. Writes one history CSV per run,
/// a checkpoint per objective (first repeat), the accuracy curve or the
/// comparison figure for sweeps, and the manifest.
pub fn cmd_train(config_path: &Path, overrides: &TrainOverrides, out: &Path) -> Result<i32> {
    let (mut cfg, bytes) = load::<RunConfig>(config_path)?;
    if let Some(b) = overrides.beta {
        cfg.train.beta = b;
    }
    if let Some(o) = overrides.objective {
        cfg.train.objective = o;
        cfg.objectives = None;
    }
    let seed = overrides.seed.unwrap_or(cfg.train.seed);
    cfg.validate()?;
    let mut hashed = bytes;
    hashed.extend_from_slice(
        format!("\nseed={seed} beta={:?} objective={:?}", overrides.beta, overrides.objective).as_bytes(),
    );
    let mut manifest = RunManifest::begin("train", Some(config_path), seed, &hashed, out);

    let split = synth_dataset(&cfg.data, seed)?;
    let test = (!split.ghost.is_empty()).then_some(&split.ghost);
    let (objectives, sweep) = cfg.objective_list();
    let jobs: Vec<(Objective, usize)> =
        objectives.iter().flat_map(|&o| (0..cfg.repeats).map(move |r| (o, r))).collect();
    let outcomes: Vec<Result<TrainOutcome>> = crate::with_pool(|| {
        jobs.par_iter()
            .map(|&(objective, r)| {
                let mut tc = cfg.train.clone();
                tc.objective = objective;
                tc.seed = seed.wrapping_add(r as u64);
                train(&tc, &split.train, test)
            })
            .collect()
    });

    let mut divergence = Vec::new();
    let mut runs: Vec<(Objective, usize, TrainOutcome)> = Vec::with_capacity(jobs.len());
    for (&(o, r), res) in jobs.iter().zip(outcomes) {
        let outcome = res?;
        if let Some(msg) = &outcome.divergence {
            divergence.push(format!("{o} repeat {r}: {msg}"));
        }
        runs.push((o, r, outcome));
    }

    for (o, r, outcome) in &runs {
        let name = history_name(sweep.then_some(*o), (cfg.repeats > 1).then_some(*r));
        let mut buf = Vec::new();
        write_history_csv(&outcome.history, &mut buf)?;
        write_atomic(&out.join(&name), &buf)?;
        manifest.outputs.push(name);
        if *r == 0 {
            let mut tc = cfg.train.clone();
            tc.objective = *o;
            tc.seed = seed;
            let ckpt = Checkpoint::new(tc, Some(cfg.data.clone()), seed, outcome.model.clone(), outcome.bank.clone());
            let name = if sweep { format!("checkpoint-{}.json", o.name()) } else { "checkpoint.json".into() };
            write_atomic(&out.join(&name), ckpt.to_json()?.as_bytes())?;
            manifest.outputs.push(name);
        }
    }

    let (svg, name) = if sweep {
        (comparison_figure(&objectives, &runs, cfg.train.beta), "comparison.svg")
    } else {
        (accuracy_figure(&runs), "accuracy.svg")
    };
    write_atomic(&out.join(name), svg.as_bytes())?;
    manifest.outputs.push(name.into());

    for (o, _, outcome) in runs.iter().filter(|(_, r, _)| *r == 0) {
        if let Some(last) = outcome.history.iter().rev().find(|h| h.split == Split::Test) {
            println!("{o}: test accuracy {:.4} after epoch {}", last.accuracy, last.epoch);
        }
    }
    let code = if divergence.is_empty() {
        EXIT_OK
    } else {
        for d in &divergence {
            eprintln!("diverged: {d}");
        }
        EXIT_DIVERGED
    };
    manifest.finish(code)?;
    Ok(code)
}

fn accuracy_figure(runs: &[(Objective, usize, TrainOutcome)]) -> String {
    let mut series = Vec::new();
    for split in [Split::Train, Split::Test] {
        let curves: Vec<(Vec<f64>, Vec<f64>)> =
            runs.iter().map(|(_, _, o)| series_of(&o.history, split, |h| h.accuracy)).collect();
        if let Some((x, _)) = curves.iter().find(|c| !c.0.is_empty()) {
            let ys: Vec<Vec<f64>> = curves.iter().map(|c| c.1.clone()).collect();
            series.push(Series::aggregate(split.name(), x, &ys));
        }
    }
    render(&[Panel { title: "Accuracy".into(), x_label: "epoch".into(), y_label: "accuracy".into(), series }])
}

/// Test accuracy and test log-likelihood per objective, side by side.
fn comparison_figure(objectives: &[Objective], runs: &[(Objective, usize, TrainOutcome)], beta: f64) -> String {
    let split = if runs.iter().any(|(_, _, o)| o.history.iter().any(|h| h.split == Split::Test)) {
        Split::Test
    } else {
        Split::Train
    };
    let panel = |title: &str, y_label: &str, f: &dyn Fn(&HistoryRow) -> f64| {
        let series = objectives
            .iter()
            .filter_map(|&obj| {
                let curves: Vec<(Vec<f64>, Vec<f64>)> = runs
                    .iter()
                    .filter(|(o, _, _)| *o == obj)
                    .map(|(_, _, o)| series_of(&o.history, split, f))
                    .collect();
                let x = curves.iter().find(|c| !c.0.is_empty())?.0.clone();
                let ys: Vec<Vec<f64>> = curves.into_iter().map(|c| c.1).collect();
                Some(Series::aggregate(obj.name(), &x, &ys))
            })
            .collect();
        Panel { title: title.into(), x_label: "epoch".into(), y_label: format!("{} {y_label}", split.name()), series }
    };
    render(&[
        panel("Accuracy", "accuracy", &|h| h.accuracy),
        panel("Log-likelihood", "log-likelihood (nats)", &|h| -(h.loss - beta * h.mean_kl)),
    ])
}

/// Options of `bound-report` beyond the checkpoint path.
#[derive(Debug, Clone)]
pub struct BoundOptions {
    pub train_data: Option<PathBuf>,
    pub ghost_data: Option<PathBuf>,
    pub seed: u64,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub lambda: Option<f64>,
    pub samples: usize,
}

/// Latent KL, empirical gap and all bounds for a checkpoint. Datasets are
/// read from CSV when given, otherwise regenerated from the checkpoint.
pub fn cmd_bound_report(checkpoint: &Path, opts: &BoundOptions, out: &Path) -> Result<i32> {
    let bytes =
        std::fs::read(checkpoint).map_err(|e| Error::Config(format!("cannot read {}: {e}", checkpoint.display())))?;
    let ckpt = Checkpoint::from_json(&String::from_utf8_lossy(&bytes))?;
    let mut manifest = RunManifest::begin("bound-report", Some(checkpoint), opts.seed, &bytes, out);
    let k = ckpt.model.num_classes();
    let (train, ghost) = match (&opts.train_data, &opts.ghost_data) {
        (Some(t), Some(g)) => (Dataset::read_csv(t, k)?, Dataset::read_csv(g, k)?),
        (None, None) => {
            let spec = ckpt.data.as_ref().ok_or_else(|| {
                Error::Config("checkpoint carries no data spec; pass --train-data and --ghost-data".into())
            })?;
            let s = synth_dataset(spec, ckpt.data_seed)?;
            (s.train, s.ghost)
        }
        _ => return Err(Error::Config("--train-data and --ghost-data go together".into())),
    };
    for (name, d) in [("training", &train), ("ghost", &ghost)] {
        if d.dim() != ckpt.model.input_dim() || d.num_classes() != k {
            return Err(Error::Schema(format!(
                "{name} set has dim {} and {} classes; the checkpoint expects {} and {k}",
                d.dim(),
                d.num_classes(),
                ckpt.model.input_dim()
            )));
        }
    }
    let kl = estimate_latent_kl(&train, &ghost, &ckpt.model, &ckpt.bank)?;
    let gap = empirical_gap(&ckpt.model, &train, &ghost, opts.samples, opts.seed)?;
    let mut inputs = BoundInputs::new(train.len() as u64, k as u64, kl.total);
    inputs.epsilon = opts.epsilon;
    inputs.lambda = opts.lambda;
    if let Some(d) = opts.delta {
        inputs.delta = d;
    }
    let meta = ReportMetadata {
        seed: opts.seed,
        config_hash: Some(content_hash(&bytes)),
        source: Some(checkpoint.display().to_string()),
    };
    let report = BoundReport::compute(inputs, gap.train_risk, gap.gap, meta)?;

    write_atomic(&out.join("bound-report.json"), report.to_json()?.as_bytes())?;
    write_atomic(&out.join("bound-report.csv"), format!("{CSV_HEADER}\n{}\n", report.csv_row()).as_bytes())?;
    manifest.outputs.extend(["bound-report.json".into(), "bound-report.csv".into()]);
    println!("latent KL {:.6} nats over {} samples (mean {:.6} ± {:.6})", kl.total, kl.count, kl.mean, kl.std_error);
    println!("train risk {:.4}, test risk {:.4}", gap.train_risk, gap.test_risk);
    print!("{}", report.table());
    manifest.finish(EXIT_OK)?;
    Ok(EXIT_OK)
}

/// Coverage-versus-rate sweep written as `coverage.csv`.
pub fn cmd_covering_sim(config_path: Option<&Path>, seed: u64, out: &Path) -> Result<i32> {
    let (cfg, bytes) = match config_path {
        Some(p) => load::<CoveringConfig>(p)?,
        None => (CoveringConfig::default(), Vec::new()),
    };
    let mut hashed = bytes;
    hashed.extend_from_slice(format!("\nseed={seed}").as_bytes());
    let mut manifest = RunManifest::begin("covering-sim", config_path, seed, &hashed, out);
    let (joint, prior, kl) = cfg.tables()?;
    let spec = CodebookSpec { blocks: cfg.blocks, n: cfg.n, rates: cfg.rates.clone(), prior, mode: cfg.mode, seed };
    let points = covering_simulation(&spec, &joint, cfg.trials)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Schema(e.to_string());
    w.write_record(["rate", "coverage", "stderr"]).map_err(csv_err)?;
    for p in &points {
        w.write_record([format!("{:.10}", p.rate), format!("{:.10}", p.coverage), format!("{:.10}", p.std_error)])
            .map_err(csv_err)?;
    }
    let buf = w.into_inner().map_err(|e| Error::Schema(e.to_string()))?;
    write_atomic(&out.join("coverage.csv"), &buf)?;
    manifest.outputs.push("coverage.csv".into());
    if let Some(kl) = kl {
        println!("KL per block {kl:.6} nats");
    }
    println!("{:>8} {:>10} {:>10} {:>10}", "rate", "codewords", "coverage", "stderr");
    for p in &points {
        println!("{:>8.3} {:>10} {:>10.4} {:>10.4}", p.rate, p.codewords, p.coverage, p.std_error);
    }
    manifest.finish(EXIT_OK)?;
    Ok(EXIT_OK)
}
