use std::path::Path;
use std::process::{Command, Output};

fn segreward(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segreward"))
        .args(args)
        .current_dir(dir)
        .env_remove("SEGREWARD_SEED")
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = segreward(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn small_train_config(dir: &Path) {
    std::fs::write(
        dir.join("train.toml"),
        "training_steps = 20\nwarmup_steps = 2\nbatch_size = 8\nembed_dim = 8\nnum_canonical = 4\n",
    )
    .unwrap();
}

#[test]
fn help_lists_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let help = ok(dir.path(), &["--help"]);
    for cmd in ["demos", "train-reward", "eval-epic", "eval-subtask", "train-rl", "report"] {
        assert!(help.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn usage_and_config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["demos", "--env", "chainmanip-9", "--n", "2", "--out", "d.jsonl"],
        vec!["demos", "--env", "chainmanip-2", "--n", "0", "--out", "d.jsonl"],
        vec!["frobnicate"],
        vec!["train-rl", "--env", "chainmanip-2", "--reward", "dense", "--out", "rl"],
    ] {
        let out = segreward(dir.path(), &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn missing_input_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = segreward(dir.path(), &["train-reward", "--data", "absent.jsonl", "--out", "m.ckpt"]);
    assert_eq!(out.status.code(), Some(1));
    let out = segreward(
        dir.path(),
        &["train-rl", "--env", "chainmanip-2", "--reward", "learned:absent.ckpt", "--out", "rl"],
    );
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reward_pipeline_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    small_train_config(d);
    ok(d, &["demos", "--env", "chainmanip-2", "--n", "4", "--out", "data/demos.jsonl", "--seed", "3"]);
    ok(d, &["train-reward", "--data", "data/demos.jsonl", "--config", "train.toml", "--out", "models/m.ckpt"]);
    for f in ["models/m.ckpt", "models/m.metrics.csv", "models/m.config.toml"] {
        assert!(d.join(f).is_file(), "{f}");
    }
    ok(d, &["eval-epic", "--model", "models/m.ckpt", "--data", "data/demos.jsonl"]);
    let epic = std::fs::read_to_string(d.join("models/m.epic.csv")).unwrap();
    assert!(epic.starts_with("target,subtask,pearson,distance,coverage_size"));
    assert!(epic.contains("random-init-vs-psi"));

    // A model compared with itself is at distance zero.
    ok(d, &["eval-epic", "--model", "models/m.ckpt", "--data", "data/demos.jsonl", "--against", "models/m.ckpt", "--out", "self.csv"]);
    let mut rows = csv::Reader::from_path(d.join("self.csv")).unwrap();
    let row = rows.records().next().unwrap().unwrap();
    assert!(row[3].parse::<f64>().unwrap().abs() < 1e-9, "{row:?}");

    ok(d, &["eval-subtask", "--model", "models/m.ckpt", "--data", "data/demos.jsonl", "--out", "subtask.csv"]);
    let subtask = std::fs::read_to_string(d.join("subtask.csv")).unwrap();
    assert!(subtask.contains("subtask_precision") && subtask.contains("progressive_fraction"));
}

#[test]
fn seed_variable_overrides_configured_seed() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |seed: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_segreward"))
            .args(["demos", "--env", "chainmanip-1", "--n", "3", "--out", out])
            .current_dir(d)
            .env("SEGREWARD_SEED", seed)
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(d.join(out)).unwrap()
    };
    assert_eq!(run("7", "a.jsonl"), run("7", "b.jsonl"));
    assert_ne!(run("7", "a.jsonl"), run("8", "c.jsonl"));
}

#[test]
fn rl_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("rl.toml"), "total_steps = 4096\neval_every = 2048\neval_episodes = 2\n").unwrap();
    ok(d, &["train-rl", "--env", "chainmanip-1", "--reward", "psi", "--seeds", "0,1", "--config", "rl.toml", "--out", "runs"]);
    for f in ["runs/psi_seed0.csv", "runs/psi_seed1.csv", "runs/psi_summary.csv"] {
        assert!(d.join(f).is_file(), "{f}");
    }
    std::fs::write(d.join("runs/notes.csv"), "a,b\n1,2\n").unwrap();
    let out = segreward(d, &["report", "--dir", "runs"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("notes.csv"));
    let report = std::fs::read_to_string(d.join("runs/report.csv")).unwrap();
    assert!(report.contains("psi_summary.csv") && report.contains("psi_seed1.csv"));
    assert!(d.join("runs/report.md").is_file());
}
