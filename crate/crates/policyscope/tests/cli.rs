//! End-to-end checks of the command-line interface and its exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn policyscope(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_policyscope"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn bench_list_names_all_families() {
    let dir = tempfile::tempdir().unwrap();
    let out = policyscope(&["bench", "list"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["rosenbrock", "hpt", "robot_push"] {
        assert!(stdout.contains(name), "missing {name} in: {stdout}");
    }
}

#[test]
fn run_suite_plot_replay_workflow() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "benchmark = \"rosenbrock\"\noptimizer = \"random\"\nbudget = 10\nseed = 3\n\
         output_dir = \"out\"\n",
    );
    let config = config.to_str().unwrap();

    // Single run with a CLI override.
    let out = policyscope(
        &["run", "--config", config, "--optimizer", "multi_agent_scripted:uniform"],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("best objective"), "stdout: {stdout}");
    let csv = dir.path().join("out/rosenbrock_multi_agent_scripted-uniform_seed3.csv");
    assert!(csv.exists());

    // Suite with two repetitions.
    let out = policyscope(&["suite", "--config", config, "--reps", "2"], dir.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/summary.csv").exists());

    // Plots from the accumulated CSVs.
    let out = policyscope(&["plot", "out"], dir.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/convergence.svg").exists());
    // The scripted multi-agent run carries weights, so a weights plot exists.
    let weights_plots = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("weights_"))
        .count();
    assert!(weights_plots >= 1);

    // Replay the recorded random run (no LLM calls; loop must reproduce).
    let transcript = dir.path().join("out/rosenbrock_random_seed3.transcript.txt");
    assert!(transcript.exists());
    let out = policyscope(
        &["replay", transcript.to_str().unwrap(), "--config", config],
        dir.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let original = std::fs::read(dir.path().join("out/rosenbrock_random_seed3.csv")).unwrap();
    let replayed = std::fs::read(dir.path().join("out/replay/rosenbrock_random_seed3.csv")).unwrap();
    assert_eq!(original, replayed);

    // Replay under a drifted config must fail with a nonzero exit.
    let out = policyscope(
        &["replay", transcript.to_str().unwrap(), "--config", config, "--output-dir", "out/drift"],
        dir.path(),
    );
    assert!(out.status.success());
    let drifted_config = write_config(dir.path(), "budget = 11\n");
    let out = policyscope(
        &["replay", transcript.to_str().unwrap(), "--config", drifted_config.to_str().unwrap()],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("replay error"));
}

#[test]
fn failures_exit_nonzero_with_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "optimizer = \"annealing\"\n");
    let out = policyscope(&["run", "--config", config.to_str().unwrap()], dir.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown optimizer"));

    let out = policyscope(&["run", "--config", "missing.toml"], dir.path());
    assert!(!out.status.success());

    // An LLM optimizer without any endpoint configured is a config error.
    if std::env::var("POLICYSCOPE_BASE_URL").is_err() {
        let config = write_config(dir.path(), "optimizer = \"multi_agent\"\n");
        let out = policyscope(&["run", "--config", config.to_str().unwrap()], dir.path());
        assert!(!out.status.success());
        assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
    }
}
