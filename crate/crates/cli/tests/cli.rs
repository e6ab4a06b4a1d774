use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use safeopt_core::benchmarks::demo1_eval;
use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn safeopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safeopt")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = safeopt(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn exit_code(args: &[&str]) -> i32 {
    safeopt(args).status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_file(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn out_arg(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

/// Constrained minimizer of demo 1 by brute force on a fine grid.
fn demo1_truth() -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    for k in 0..=100_000 {
        let p = 10.0 * k as f64 / 100_000.0;
        let (f, g) = demo1_eval(p).unwrap();
        if g < 4.0 && f < best.0 {
            best = (f, p);
        }
    }
    best.1
}

#[test]
fn optimize_demo1_is_safe_and_finds_the_constrained_minimum() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "run");
    run_ok(&["optimize", "--config", &config("demo1.toml"), "--out", &out]);
    let summary = json(&tmp.path().join("run/summary.json"));
    assert_eq!(summary["status"], "completed");
    assert_eq!(summary["true_violations"], 0);
    assert_eq!(summary["measured_violations"], 0);
    let best = summary["best"]["point"][0].as_f64().unwrap();
    // grid spacing is 10 / 199
    assert!((best - demo1_truth()).abs() < 0.06, "best {best}");
    for name in ["history.csv", "surfaces.jsonl", "manifest.json"] {
        assert!(tmp.path().join("run").join(name).exists(), "{name}");
    }
    let manifest = json(&tmp.path().join("run/manifest.json"));
    assert_eq!(manifest["command"], "optimize");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn every_shipped_campaign_config_runs() {
    let tmp = TempDir::new().unwrap();
    for name in ["demo2.toml", "demo1_shrink.toml", "sim1d.toml"] {
        let out = out_arg(&tmp, name);
        run_ok(&["optimize", "--config", &config(name), "--out", &out]);
        let summary = json(&tmp.path().join(name).join("summary.json"));
        assert_eq!(summary["status"], "completed", "{name}");
        assert_eq!(summary["measured_violations"], 0, "{name}");
    }
}

#[test]
fn same_seed_gives_identical_history_and_other_seed_differs() {
    let tmp = TempDir::new().unwrap();
    let noisy = write_file(
        tmp.path(),
        "noisy.toml",
        "plant = \"demo1\"\ninitializers = [[1.8], [2.2]]\n[noise]\nobjective_std = 5.0\nconstraint_std = 0.015\n",
    );
    let read = |run: &str, seed: &str| {
        let out = out_arg(&tmp, run);
        run_ok(&["optimize", "--config", &noisy, "--seed", seed, "--out", &out]);
        (
            fs::read(tmp.path().join(run).join("history.csv")).unwrap(),
            fs::read(tmp.path().join(run).join("manifest.json")).unwrap(),
        )
    };
    let a = read("a", "4");
    let b = read("b", "4");
    let c = read("c", "5");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
}

#[test]
fn cli_overrides_change_algorithm_and_budget() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "run");
    run_ok(&[
        "optimize",
        "--config",
        &config("demo1.toml"),
        "--algo-override",
        "stageOpt",
        "--iterations",
        "12",
        "--out",
        &out,
    ]);
    let summary = json(&tmp.path().join("run/summary.json"));
    assert_eq!(summary["iterations"], 12);
    let manifest = json(&tmp.path().join("run/manifest.json"));
    let algo = &manifest["config"]["algorithm"];
    assert_eq!(algo["algorithm"], "stageOpt");
    assert_eq!(algo["switch_iteration"], 6);
}

#[test]
fn invalid_algorithm_is_a_config_error_without_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_file(tmp.path(), "bad.toml", "plant = \"demo1\"\ninitializers = [[2.0]]\n[algorithm]\nname = \"greedyOpt\"\n");
    let out = out_arg(&tmp, "run");
    assert_eq!(exit_code(&["optimize", "--config", &cfg, "--out", &out]), 3);
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn config_errors_exit_with_code_3() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "run");
    let unknown_key = write_file(tmp.path(), "k.toml", "plant = \"demo1\"\ninitializers = [[2.0]]\ncolour = 1\n");
    let outside = write_file(tmp.path(), "o.toml", "plant = \"demo1\"\ninitializers = [[12.0]]\n");
    let bad_plant = write_file(tmp.path(), "p.toml", "plant = \"rig\"\ninitializers = [[2.0]]\n");
    for cfg in [&unknown_key, &outside, &bad_plant] {
        assert_eq!(exit_code(&["optimize", "--config", cfg, "--out", &out]), 3, "{cfg}");
    }
    let missing = out_arg(&tmp, "missing.toml");
    assert_eq!(exit_code(&["optimize", "--config", &missing, "--out", &out]), 3);
}

#[test]
fn usage_errors_exit_with_code_2() {
    assert_eq!(exit_code(&["optimize"]), 2);
    assert_eq!(exit_code(&["frobnicate"]), 2);
}

#[test]
fn failing_external_plant_exits_with_code_4_and_keeps_history() {
    let tmp = TempDir::new().unwrap();
    // answers two requests, then reports a fault
    let rig = write_file(
        tmp.path(),
        "rig.sh",
        "n=0\nwhile read cmd p rest; do n=$((n+1)); if [ $n -gt 2 ]; then echo \"ERR rig offline\"; else echo \"OK 100 2\"; fi; done\n",
    );
    let cfg = write_file(
        tmp.path(),
        "ext.toml",
        &format!("plant = \"external:sh {rig}\"\npreset = \"demo1\"\ninitializers = [[1.8], [2.2]]\n"),
    );
    let out = out_arg(&tmp, "run");
    let result = safeopt(&["optimize", "--config", &cfg, "--out", &out]);
    assert_eq!(result.status.code(), Some(4), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(String::from_utf8_lossy(&result.stderr).contains("rig offline"));
    let summary = json(&tmp.path().join("run/summary.json"));
    assert_eq!(summary["evaluations"], 2);
    let rows = fs::read_to_string(tmp.path().join("run/history.csv")).unwrap().lines().count();
    assert_eq!(rows, 3);
}

#[test]
fn context_chain_reports_transfer_factors() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "chain");
    run_ok(&["context-chain", "--config", &config("context_chain.toml"), "--out", &out]);
    let report = json(&tmp.path().join("chain/transfer_report.json"));
    let first = &report[0]["entries"][0];
    let expected = (-(0.753f64 - 0.684).powi(2) / (2.0 * 0.1 * 0.1)).exp();
    assert!((first["objective_factor"].as_f64().unwrap() - expected).abs() < 1e-9);
    assert!((first["constraint_factor"].as_f64().unwrap() - 0.788).abs() < 5e-4);
    for k in 1..=3 {
        assert!(tmp.path().join(format!("chain/stage{k}_history.csv")).exists());
    }
}

#[test]
fn context_chain_with_identical_contexts_keeps_full_correlation() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_file(
        tmp.path(),
        "same.toml",
        "plant = \"demo-context\"\ninitializers = [[1.8], [2.2]]\n\
         [[stages]]\ncontext = [0.7]\niterations = 10\n\
         [[stages]]\ncontext = [0.7]\niterations = 5\n",
    );
    let out = out_arg(&tmp, "chain");
    run_ok(&["context-chain", "--config", &cfg, "--out", &out]);
    let report = json(&tmp.path().join("chain/transfer_report.json"));
    assert_eq!(report[0]["entries"][0]["objective_factor"].as_f64().unwrap(), 1.0);
}

#[test]
fn uncertifiable_transfer_exits_with_code_5() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_file(
        tmp.path(),
        "far.toml",
        "plant = \"demo-context\"\ninitializers = [[1.8], [2.2]]\n\
         [[stages]]\ncontext = [0.753]\niterations = 10\n\
         [[stages]]\ncontext = [0.3]\niterations = 5\n",
    );
    let out = out_arg(&tmp, "chain");
    assert_eq!(exit_code(&["context-chain", "--config", &cfg, "--out", &out]), 5);
    assert!(tmp.path().join("chain/stage1_history.csv").exists());
}

#[test]
fn context_chain_needs_two_stages() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "chain");
    assert_eq!(exit_code(&["context-chain", "--config", &config("demo1.toml"), "--out", &out]), 3);
}

#[test]
fn eigmap_single_point_and_empty_range() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "one");
    run_ok(&["eigmap", "--n", "0.7:0.7:1", "--tau", "3:3:1", "--out", &out]);
    let csv = fs::read_to_string(tmp.path().join("one/eigmap.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,tau,frequency,growth_rate");

    let empty = out_arg(&tmp, "empty");
    assert_eq!(exit_code(&["eigmap", "--n", "0:1:0", "--out", &empty]), 3);
    assert!(!tmp.path().join("empty").exists());
    assert_eq!(exit_code(&["eigmap", "--tau", "garbage", "--out", &empty]), 3);
}

#[test]
fn eigmap_of_shipped_network_has_a_stable_region() {
    let tmp = TempDir::new().unwrap();
    let out = out_arg(&tmp, "map");
    run_ok(&["eigmap", "--out", &out]);
    let summary = json(&tmp.path().join("map/summary.json"));
    assert_eq!(summary["points"], 26 * 27);
    assert!(summary["stable_points"].as_u64().unwrap() > 0);
    assert!(summary["most_stable"]["growth_rate"].as_f64().unwrap() < 0.0);
    let rows = fs::read_to_string(tmp.path().join("map/eigmap.csv")).unwrap().lines().count();
    assert_eq!(rows, 26 * 27 + 1);
}

#[test]
fn simulate_open_loop_oscillates_and_stable_setting_decays() {
    let tmp = TempDir::new().unwrap();
    let open = out_arg(&tmp, "open");
    let closed = out_arg(&tmp, "closed");
    run_ok(&["simulate", "--n", "0", "--tau", "3", "--duration", "2", "--out", &open]);
    run_ok(&["simulate", "--n", "0.7", "--tau", "3", "--duration", "2", "--out", &closed]);
    let rms = |run: &str| json(&tmp.path().join(run).join("summary.json"))["rms_pressure"].as_f64().unwrap();
    assert!(rms("open") > 1.0);
    assert!(rms("closed") < 0.1 * rms("open"));
    let header = fs::read_to_string(tmp.path().join("open/sim.csv")).unwrap();
    assert!(header.starts_with("t,p_norm,V\n"));
}

#[test]
fn presets_lists_every_table_entry() {
    let text = String::from_utf8(run_ok(&["presets"]).stdout).unwrap();
    for name in ["demo1", "demo2", "demo-context", "sim-1d", "sim-2d", "exp-1d", "exp-2d", "nrpd-2d"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let listed: Value = serde_json::from_slice(&run_ok(&["presets", "--json"]).stdout).unwrap();
    assert!(listed.as_array().unwrap().len() >= 8);
}
