use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn adarestart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adarestart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn game_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--problem",
        "matrix-game",
        "--seed",
        "3",
        "--rows",
        "20",
        "--cols",
        "25",
        "--max-iters",
        "400",
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    adarestart(&args)
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(game_run(&a, &["--track-current"]).status.code(), Some(0));
    assert_eq!(game_run(&b, &["--track-current"]).status.code(), Some(0));
    for name in ["trace.csv", "series.csv", "summary.json"] {
        let (x, y) = (fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap());
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs between repeats");
    }
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    // Loose target met: 0. Zero target cannot be met in 400 iterations: 2.
    assert_eq!(game_run(&dir.path().join("ok"), &["--target", "1.0"]).status.code(), Some(0));
    let unmet = game_run(&dir.path().join("unmet"), &["--target", "0"]);
    assert_eq!(unmet.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("unmet/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["reached_target"], false);
    assert_eq!(summary["iterations"], 400);

    // Missing seed, bad config file, unknown suite: 1.
    let no_seed = adarestart(&["run", "--problem", "matrix-game", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(no_seed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&no_seed.stderr).contains("--seed"));
    let missing = dir.path().join("missing.json");
    assert_eq!(adarestart(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(adarestart(&["verify", "no-such-suite"]).status.code(), Some(1));
}

#[test]
fn config_file_runs_match_flag_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
        "problem": {"kind": "matrix_game", "seed": 3, "rows": 20, "cols": 25, "family": "uniform_negative"},
        "algorithm": "pdhg",
        "policy": {"kind": "adaptive", "beta": 0.5, "first_epoch": 1},
        "max_iters": 400
    }"#;
    let path = dir.path().join("cfg.json");
    fs::write(&path, config).unwrap();
    let from_file = dir.path().join("file");
    let out = adarestart(&["run", "--config", path.to_str().unwrap(), "--out", from_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let from_flags = dir.path().join("flags");
    assert_eq!(game_run(&from_flags, &[]).status.code(), Some(0));
    assert_eq!(
        fs::read(from_file.join("trace.csv")).unwrap(),
        fs::read(from_flags.join("trace.csv")).unwrap()
    );
}

#[test]
fn gen_instance_then_run_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("lp.json");
    let gen = adarestart(&[
        "gen-instance", "--problem", "box-lp", "--seed", "5", "--sources", "3", "--sinks", "4", "--out",
        inst.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = dir.path().join("run");
    let run = adarestart(&[
        "run", "--instance", inst.to_str().unwrap(), "--max-iters", "300", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let active = adarestart(&["active-set", out.join("active_sets.json").to_str().unwrap()]);
    assert_eq!(active.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&active.stdout).contains("last active-set change"));
}

#[test]
fn grid_search_and_ratio_sweep_emit_json() {
    let grid = adarestart(&[
        "grid-search", "--problem", "matrix-game", "--seed", "1", "--rows", "10", "--cols", "10", "--max-iters",
        "200", "--target", "1e-3", "--periods", "8,32",
    ]);
    assert_eq!(grid.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&grid.stdout).unwrap();
    assert!([8, 32].contains(&v["best_period"].as_u64().unwrap()));
    assert_eq!(v["entries"].as_array().unwrap().len(), 2);

    let sweep = adarestart(&[
        "ratio-sweep", "--problem", "box-lp", "--seed", "2", "--sources", "2", "--sinks", "3", "--ratios", "1",
        "--iters", "50",
    ]);
    assert_eq!(sweep.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&sweep.stdout).unwrap();
    assert_eq!(v["best_ratio"], 1.0);
    assert_eq!(v["step_primal"], v["step_dual"]);
}

#[test]
fn verify_reports_per_check_lines() {
    let out = adarestart(&["verify", "lower-bound"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS lower-bound-spectrum"));
}
