use mdlb::bounds::BoundReport;
use mdlb::train::{synth_dataset, BankMode, Checkpoint, DataSpec, GeneratorSpec, Model, PriorBank, TrainConfig};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn mdlb(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mdlb"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

const BLOBS: &str = r#"
[data]
n-train = 200
n-test = 200
generator = { kind = "blobs", means = [[-2.0, 0.0], [2.0, 0.0]], std = 1.0 }
[train]
objective = "vib"
epochs = 3
"#;

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn verify_hd_writes_report() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "out");
    let o = mdlb(&["verify", "--suite", "hd", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(files(&out), ["manifest.toml", "verify-hd.json"]);
    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verify-hd.json")).unwrap()).unwrap();
    assert_eq!(json["passed"], true);
    assert_eq!(json["suite"], "hd");
}

#[test]
fn usage_errors_exit_one() {
    let o = mdlb(&["verify", "--suite", "everything"], &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&mdlb(&["frobnicate"], &[])), 1);
    assert_eq!(code(&mdlb(&["train"], &[])), 1);
    assert_eq!(code(&mdlb(&["--help"], &[])), 0);
}

#[test]
fn failed_verification_exits_two() {
    // the exact e^{n h_D} sum exceeds n for n = 10..14
    let dir = TempDir::new().unwrap();
    let o = mdlb(&["verify", "--suite", "bucket", "--out", path(&dir, "o").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stdout).contains("exp_hd_sum"));
}

#[test]
fn train_writes_four_files_and_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.toml", BLOBS);
    let (a, b) = (path(&dir, "a"), path(&dir, "b"));
    for out in [&a, &b] {
        let o = mdlb(&["train", "--config", &cfg, "--seed", "3", "--out", out.to_str().unwrap()], &[]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(files(&a), ["accuracy.svg", "checkpoint.json", "history.csv", "manifest.toml"]);
    for f in ["accuracy.svg", "checkpoint.json", "history.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let history = std::fs::read_to_string(a.join("history.csv")).unwrap();
    assert!(history.starts_with("epoch,split,accuracy,loss,mean_kl\n"));
    assert_eq!(history.lines().count(), 1 + 3 * 2);
    let svg = std::fs::read_to_string(a.join("accuracy.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="0 0 800 400""#));
    assert!(svg.contains(r#"data-name="train""#) && svg.contains(r#"data-name="test""#));
    let manifest: toml::Value = toml::from_str(&std::fs::read_to_string(a.join("manifest.toml")).unwrap()).unwrap();
    assert_eq!(manifest["command"].as_str(), Some("train"));
    assert_eq!(manifest["seed"].as_integer(), Some(3));
    assert_eq!(manifest["config-hash"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.toml", BLOBS);
    let (a, b) = (path(&dir, "a"), path(&dir, "b"));
    mdlb(&["train", "--config", &cfg, "--seed", "1", "--out", a.to_str().unwrap()], &[]);
    mdlb(&["train", "--config", &cfg, "--seed", "2", "--out", b.to_str().unwrap()], &[]);
    assert_ne!(std::fs::read(a.join("history.csv")).unwrap(), std::fs::read(b.join("history.csv")).unwrap());
}

#[test]
fn invalid_configs_exit_one() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "o");
    let cfg = write(&dir, "run.toml", BLOBS);
    assert_eq!(code(&mdlb(&["train", "--config", &cfg, "--beta", "-0.5", "--out", out.to_str().unwrap()], &[])), 1);
    let bad = write(&dir, "bad.toml", &BLOBS.replace("epochs = 3", "epochs = 3\nbeta = -1.0"));
    assert_eq!(code(&mdlb(&["train", "--config", &bad, "--out", out.to_str().unwrap()], &[])), 1);
    let unknown = write(&dir, "unknown.toml", &BLOBS.replace("epochs = 3", "epochs = 3\nmomentum = 0.9"));
    assert_eq!(code(&mdlb(&["train", "--config", &unknown, "--out", out.to_str().unwrap()], &[])), 1);
    let alpha = write(&dir, "alpha.toml", &BLOBS.replace("epochs = 3", "epochs = 3\nalpha = 0.1\nbatch-size = 32"));
    assert_eq!(code(&mdlb(&["train", "--config", &alpha, "--out", out.to_str().unwrap()], &[])), 1);
    assert_eq!(code(&mdlb(&["train", "--config", "/nonexistent.toml", "--out", out.to_str().unwrap()], &[])), 1);
}

#[test]
fn json_configs_are_accepted() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"data": {"n-train": 50, "n-test": 0, "generator": {"kind": "rings", "radii": [1.0, 2.0], "noise": 0.1}},
                   "train": {"epochs": 2, "objective": "cdvib-lossless"}}"#;
    let cfg = write(&dir, "run.json", json);
    let o = mdlb(&["train", "--config", &cfg, "--out", path(&dir, "o").to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divergence_exits_three_and_keeps_artifacts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.toml", &BLOBS.replace("epochs = 3", "epochs = 3\nlearning-rate = 1e200"));
    let out = path(&dir, "o");
    let o = mdlb(&["train", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diverged"));
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("exit-code = 3"));
}

#[test]
fn objective_sweep_writes_one_history_per_objective() {
    let dir = TempDir::new().unwrap();
    let sweep = format!("objectives = [\"vib\", \"cdvib_lossless\", \"cdvib_lossy\"]\nrepeats = 3\n{BLOBS}");
    let cfg = write(&dir, "sweep.toml", &sweep);
    let out = path(&dir, "o");
    let o = mdlb(&["train", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let names = files(&out);
    for obj in ["vib", "cdvib-lossless", "cdvib-lossy"] {
        assert_eq!(names.iter().filter(|n| n.starts_with(&format!("history-{obj}-r"))).count(), 3);
        assert!(names.contains(&format!("checkpoint-{obj}.json")));
    }
    assert!(names.contains(&"comparison.svg".to_string()));
    let svg = std::fs::read_to_string(out.join("comparison.svg")).unwrap();
    assert!(svg.contains(">Accuracy<") && svg.contains(">Log-likelihood<"));
    assert_eq!(svg.matches("class=\"band\"").count(), 6);
    assert_eq!(svg.matches("class=\"series\"").count(), 6);
}

#[test]
fn objective_flag_overrides_sweep() {
    let dir = TempDir::new().unwrap();
    let sweep = format!("objectives = [\"vib\", \"cdvib-lossy\"]\n{BLOBS}");
    let cfg = write(&dir, "sweep.toml", &sweep);
    let out = path(&dir, "o");
    let o = mdlb(&["train", "--config", &cfg, "--objective", "cdvib-lossy", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(files(&out), ["accuracy.svg", "checkpoint.json", "history.csv", "manifest.toml"]);
    let ckpt = Checkpoint::from_json(&std::fs::read_to_string(out.join("checkpoint.json")).unwrap()).unwrap();
    assert_eq!(ckpt.config.objective.name(), "cdvib-lossy");
}

fn zero_checkpoint(dir: &TempDir, n: usize) -> String {
    let data = DataSpec { generator: GeneratorSpec::two_blobs(3.0), n_train: n, n_test: n };
    let ckpt = Checkpoint::new(
        TrainConfig::default(),
        Some(data),
        9,
        Model::zeros(2, 4, 3, 2),
        PriorBank::new(2, 1, 3, 0.0, BankMode::Lossless).unwrap(),
    );
    write(dir, "zero.json", &ckpt.to_json().unwrap())
}

fn report(out: &Path) -> BoundReport {
    serde_json::from_slice(&std::fs::read(out.join("bound-report.json")).unwrap()).unwrap()
}

#[test]
fn zero_checkpoint_hits_the_kl_free_floor() {
    let dir = TempDir::new().unwrap();
    let ckpt = zero_checkpoint(&dir, 400);
    let out = path(&dir, "o");
    let o = mdlb(&["bound-report", "--checkpoint", &ckpt, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("VACUOUS"));
    let r = report(&out);
    assert_eq!(r.inputs.kl_term, 0.0);
    assert!((r.t4_expectation - 2.0 * (4.0f64 / 400.0).sqrt()).abs() < 1e-12);
    // a constant predictor has the same risk everywhere
    assert!((r.empirical_risk - 0.5).abs() < 1e-12);
    let csv = std::fs::read_to_string(out.join("bound-report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(csv.lines().next().unwrap(), mdlb::bounds::CSV_HEADER);
}

#[test]
fn delta_changes_only_tail_columns() {
    let dir = TempDir::new().unwrap();
    let ckpt = zero_checkpoint(&dir, 300);
    let (a, b) = (path(&dir, "a"), path(&dir, "b"));
    mdlb(&["bound-report", "--checkpoint", &ckpt, "--delta", "0.05", "--out", a.to_str().unwrap()], &[]);
    mdlb(&["bound-report", "--checkpoint", &ckpt, "--delta", "0.001", "--out", b.to_str().unwrap()], &[]);
    let (ra, rb) = (report(&a), report(&b));
    assert_eq!(ra.t1_expectation, rb.t1_expectation);
    assert_eq!(ra.t3_population_risk, rb.t3_population_risk);
    assert_eq!(ra.t4_expectation, rb.t4_expectation);
    assert_eq!(ra.empirical_gap, rb.empirical_gap);
    assert!(rb.t1_tail > ra.t1_tail);
    assert!(rb.t5_tail > ra.t5_tail);
    assert!(rb.t6_population_risk > ra.t6_population_risk);
    assert!(rb.t7_tail > ra.t7_tail);
}

#[test]
fn bound_report_on_csv_datasets_and_schema_mismatch() {
    let dir = TempDir::new().unwrap();
    let ckpt = zero_checkpoint(&dir, 100);
    let split =
        synth_dataset(&DataSpec { generator: GeneratorSpec::two_blobs(3.0), n_train: 60, n_test: 40 }, 1).unwrap();
    let (t, g) = (path(&dir, "train.csv"), path(&dir, "ghost.csv"));
    split.train.write_csv(&t).unwrap();
    split.ghost.write_csv(&g).unwrap();
    let out = path(&dir, "o");
    let args = [
        "bound-report",
        "--checkpoint",
        &ckpt,
        "--train-data",
        t.to_str().unwrap(),
        "--ghost-data",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&mdlb(&args, &[])), 0);
    assert_eq!(report(&out).inputs.n, 60);

    let wide = path(&dir, "wide.csv");
    std::fs::write(&wide, "x0,x1,x2,label\n0.1,0.2,0.3,1\n").unwrap();
    let args = [
        "bound-report",
        "--checkpoint",
        &ckpt,
        "--train-data",
        wide.to_str().unwrap(),
        "--ghost-data",
        g.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    assert_eq!(code(&mdlb(&args, &[])), 1);

    let broken = write(&dir, "broken.json", "{\"format\": \"mdlb-checkpoint/0\"}");
    assert_eq!(code(&mdlb(&["bound-report", "--checkpoint", &broken, "--out", out.to_str().unwrap()], &[])), 1);
}

#[test]
fn covering_sim_writes_coverage_curve() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "o");
    let cfg = write(
        &dir,
        "cover.toml",
        "blocks = 6\nrates = [0.0, 0.5, 1.0]\ntrials = 200\nmode = { kind = \"lossy\", epsilon = 0.05 }\n",
    );
    let o = mdlb(&["covering-sim", "--config", &cfg, "--seed", "4", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("coverage.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rate,coverage,stderr"));
    let cov: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(cov.len(), 3);
    assert!(cov.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(files(&out), ["coverage.csv", "manifest.toml"]);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a"), path(&dir, "b"));
    mdlb(&["verify", "--suite", "l1", "--seed", "3", "--out", a.to_str().unwrap()], &[("MDLB_THREADS", "1")]);
    mdlb(&["verify", "--suite", "l1", "--seed", "3", "--out", b.to_str().unwrap()], &[("MDLB_THREADS", "3")]);
    assert_eq!(std::fs::read(a.join("verify-l1.json")).unwrap(), std::fs::read(b.join("verify-l1.json")).unwrap());
}
