use std::fs;
use std::path::Path;
use std::process::Command as Process;

use srp_tools::commands::{self, MODEL_FILE, SNN_FILE};
use srp_tools::eval::read_metrics;
use srp_tools::report::{read_rows, CaseRow, TheoremRow};
use srp_tools::{Command, RunConfig};

fn config(command: Command, pairs: &[(&str, &str)]) -> RunConfig {
    let mut c = RunConfig::new(command);
    for (k, v) in pairs {
        c.set(k, v).unwrap();
    }
    c
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small synthetic dataset and a briefly trained MLP with L = 4.
fn trained(root: &Path) {
    let data = root.join("data");
    let run = root.join("run");
    commands::run(&config(
        Command::SynthDigits,
        &[
            ("out", s(&data)),
            ("synth_train", "300"),
            ("synth_test", "120"),
            ("seed", "3"),
        ],
    ))
    .unwrap();
    commands::run(&config(
        Command::Train,
        &[
            ("data", s(&data)),
            ("out", s(&run)),
            ("arch", "mlp:32-16"),
            ("epochs", "3"),
            ("seed", "5"),
        ],
    ))
    .unwrap();
}

#[test]
fn even_timing_at_t_equal_l_matches_ann() {
    let root = tempfile::tempdir().unwrap();
    trained(root.path());
    let out = root.path().join("even");
    commands::run(&config(
        Command::Eval,
        &[
            ("model", s(&root.path().join("run").join(MODEL_FILE))),
            ("data", s(&root.path().join("data"))),
            ("out", s(&out)),
            ("timesteps", "4"),
            ("even_timing", "on"),
        ],
    ))
    .unwrap();
    let rows = read_metrics(&out.join("metrics.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].acc_snn, rows[0].acc_ann);
    assert_eq!(rows[0].acc_srp, None);
}

#[test]
fn pipeline_is_deterministic() {
    let roots = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut artifacts = Vec::new();
    for root in &roots {
        let root = root.path();
        trained(root);
        let run = root.join("run");
        commands::run(&config(
            Command::Convert,
            &[("model", s(&run.join(MODEL_FILE))), ("out", s(&run))],
        ))
        .unwrap();
        commands::run(&config(
            Command::Eval,
            &[
                ("model", s(&run.join(SNN_FILE))),
                ("data", s(&root.join("data"))),
                ("out", s(&run)),
                ("srp", "on"),
                ("tau", "4"),
            ],
        ))
        .unwrap();
        commands::run(&config(
            Command::Analyze,
            &[
                ("model", s(&run.join(SNN_FILE))),
                ("data", s(&root.join("data"))),
                ("out", s(&run)),
                ("timesteps", "4"),
                ("samples", "20"),
            ],
        ))
        .unwrap();
        let files = [
            MODEL_FILE,
            SNN_FILE,
            "metrics.csv",
            "train_history.csv",
            "summary.json",
            "plot_data.csv",
        ];
        artifacts.push(files.map(|f| fs::read(run.join(f)).unwrap()));
    }
    assert_eq!(artifacts[0], artifacts[1]);

    let run = roots[0].path().join("run");
    let metrics = read_metrics(&run.join("metrics.csv")).unwrap();
    assert_eq!(
        metrics.iter().map(|r| r.timesteps).collect::<Vec<_>>(),
        vec![1, 2, 4, 8]
    );
    assert!(metrics.iter().all(|r| r.acc_srp.is_some()));
    let rows: Vec<CaseRow> = read_rows(&run.join("type_ii_T4.csv")).unwrap();
    for layer in 0..2 {
        let total: f64 = rows
            .iter()
            .filter(|r| r.layer == layer)
            .map(|r| r.fraction)
            .sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn verify_theorem_writes_rows() {
    let out = tempfile::tempdir().unwrap();
    let msg = commands::run(&config(
        Command::VerifyTheorem,
        &[
            ("out", s(out.path())),
            ("samples", "5"),
            ("timesteps", "2,4"),
        ],
    ))
    .unwrap();
    assert!(msg.contains("0 violations"), "{msg}");
    let rows: Vec<TheoremRow> = read_rows(&out.path().join("theorem.csv")).unwrap();
    assert_eq!(rows.len(), 1 + 2 * 5);
    assert_eq!(rows[0].placements, 400);
    assert_eq!(rows[0].weights, "2 -1");
}

fn srp() -> Process {
    Process::new(env!("CARGO_BIN_EXE_srp"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");

    let ok = srp()
        .args(["verify-theorem", "--samples", "2", "--out", s(&out)])
        .status()
        .unwrap();
    assert_eq!(ok.code(), Some(0));

    let cap = srp()
        .args(["verify-theorem", "-T", "12", "--out", s(&out)])
        .status()
        .unwrap();
    assert_eq!(cap.code(), Some(2));

    let bad_value = srp().args(["eval", "--tau", "zero"]).status().unwrap();
    assert_eq!(bad_value.code(), Some(2));

    let missing = srp()
        .args(["eval", "--model", "/no/such/model", "--data", s(dir.path())])
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(2));

    // data directory without IDX files
    let model = dir.path().join("m.srpq");
    let net = srp_core::train::mlp(vec![1, 28, 28], &[4], 10, 4, 0).unwrap();
    srp_tools::Checkpoint::new(net, Default::default())
        .save(&model)
        .unwrap();
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let data_err = srp()
        .args([
            "eval",
            "--model",
            s(&model),
            "--data",
            s(&empty),
            "--out",
            s(&out),
        ])
        .status()
        .unwrap();
    assert_eq!(data_err.code(), Some(3));

    let garbage = dir.path().join("garbage.srpq");
    fs::write(&garbage, b"not a model").unwrap();
    let fmt = srp()
        .args(["convert", "--model", s(&garbage), "--out", s(&out)])
        .status()
        .unwrap();
    assert_eq!(fmt.code(), Some(3));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out = dir.path().join("o");
    fs::write(
        &cfg,
        format!("out = {}\nsamples = 3\ntimesteps = 2\n", out.display()),
    )
    .unwrap();
    let status = srp()
        .args(["verify-theorem", "--config", s(&cfg), "--samples", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let rows: Vec<TheoremRow> = read_rows(&out.join("theorem.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].timesteps, 2);
}
