//! End-to-end tests of the command-line interface: artifact determinism,
//! exit codes, and the pinned file formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chanapprox")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chanapprox-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn gen_writes_readable_channel_files() {
    let dir = tmpdir("gen");
    let path = dir.join("chan.json");
    let out = run(&["gen", "--gen", "hard-grid:3:8", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["q"], 3);
    assert_eq!(parsed["labels"].as_array().unwrap().len(), 45);
    assert_eq!(parsed["pxy"].as_array().unwrap().len(), 3);
}

#[test]
fn upgrade_noiseless_binary_is_lossless() {
    let out = run(&["upgrade", "--gen", "noiseless:2", "--L", "2"]);
    assert!(out.status.success());
    let line = stdout(&out);
    assert!(line.starts_with("delta_I=0 "), "unexpected summary: {line}");
    assert!(line.contains("L_actual=2"));
}

#[test]
fn degrade_useless_channel_to_one_symbol() {
    let out = run(&["degrade", "--gen", "useless:3", "--L", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("delta_I=0 "));
}

#[test]
fn upgrade_artifacts_are_byte_identical_across_runs() {
    let dir = tmpdir("det");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = run(&[
            "upgrade",
            "--gen",
            "hard-grid:3:10",
            "--L",
            "9",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    assert_eq!(read(&a), read(&b), "result files differ between runs");
}

#[test]
fn degrade_emits_quantizer_csv() {
    let dir = tmpdir("quant");
    let csv = dir.join("quant.csv");
    let out = run(&[
        "degrade",
        "--gen",
        "random:3:20:5",
        "--L",
        "4",
        "--quantizer-out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("y,z1,z2,z_id"));
    assert_eq!(lines.count(), 20);
}

#[test]
fn summary_units_flag_rescales() {
    let nats = run(&["bound", "--kind", "onehot-up", "--q", "3", "--L", "10"]);
    let bits = run(&[
        "bound", "--kind", "onehot-up", "--q", "3", "--L", "10", "--units", "bits",
    ]);
    let v_nats: f64 = stdout(&nats).trim().strip_prefix("bound=").unwrap().parse().unwrap();
    let v_bits: f64 = stdout(&bits).trim().strip_prefix("bound=").unwrap().parse().unwrap();
    assert!((v_nats - 256.0 / 9.0).abs() < 1e-9);
    assert!((v_bits - v_nats / std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn sweep_writes_sorted_csv_and_slope() {
    let dir = tmpdir("sweep");
    let csv = dir.join("sweep.csv");
    let out = run(&[
        "sweep",
        "--gen",
        "random:2:512:7",
        "--mode",
        "degrade",
        "--L-list",
        "64,4,16,8,32",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout(&out).starts_with("slope="));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "L_design,L_actual,delta_I,bound,mode,q,elapsed_ms");
    let designs: Vec<usize> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(designs, vec![4, 8, 16, 32, 64]);
    // delta_I <= bound and L_actual <= L_design on every row, and the bound
    // column is the exact closed form 64/L^2 for a binary degrade
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        let l: f64 = fields[0].parse().unwrap();
        let l_actual: f64 = fields[1].parse().unwrap();
        let delta: f64 = fields[2].parse().unwrap();
        let bound: f64 = fields[3].parse().unwrap();
        assert!(l_actual <= l);
        assert!(delta <= bound + 1e-12);
        assert!((bound - 64.0 / (l * l)).abs() < 1e-15);
        assert_eq!(fields[4], "degrade");
    }
}

#[test]
fn sweep_is_deterministic_modulo_timing() {
    let dir = tmpdir("sweepdet");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    for path in [&a, &b] {
        let out = run(&[
            "sweep",
            "--gen",
            "random:3:100:9",
            "--mode",
            "upgrade",
            "--L-list",
            "4,9,16",
            "--out",
            path.to_str().unwrap(),
            "--jobs",
            "2",
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    let strip_timing = |text: &str| -> String {
        text.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let ta = strip_timing(&std::fs::read_to_string(&a).unwrap());
    let tb = strip_timing(&std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, tb);
}

#[test]
fn sweep_with_empty_budget_list_writes_header_only() {
    let dir = tmpdir("sweepempty");
    let csv = dir.join("empty.csv");
    let out = run(&[
        "sweep",
        "--gen",
        "random:2:16:1",
        "--mode",
        "degrade",
        "--L-list",
        "",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, "L_design,L_actual,delta_I,bound,mode,q,elapsed_ms\n");
}

#[test]
fn sweep_records_failed_points_and_exits_nonzero() {
    let dir = tmpdir("sweepfail");
    let csv = dir.join("fail.csv");
    // L = 3 gives a per-coordinate budget of 1 for q = 3: upgrade precondition
    let out = run(&[
        "sweep",
        "--gen",
        "random:3:30:2",
        "--mode",
        "upgrade",
        "--L-list",
        "3,9",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3,,,,upgrade,3,"));
    assert!(lines[2].starts_with("9,"));
}

#[test]
fn verify_suites_pass_and_print_residuals() {
    for suite in ["lemma", "bounds", "claims", "oracle"] {
        let out = run(&["verify", "--suite", suite, "--seed", "1"]);
        assert!(out.status.success(), "suite {suite}: {out:?}");
        let text = stdout(&out);
        assert!(text.contains("PASS"), "suite {suite} output: {text}");
        assert!(text.contains("residual="));
    }
}

#[test]
fn exit_code_2_on_unreadable_channel_file() {
    let out = run(&["upgrade", "--channel", "/nonexistent/chan.json", "--L", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_2_on_malformed_generator_spec() {
    let out = run(&["upgrade", "--gen", "bogus:spec", "--L", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_3_on_budget_precondition() {
    // q = 3 with L = 3: per-coordinate budget 1 < 2
    let out = run(&["upgrade", "--gen", "random:3:10:1", "--L", "3"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn upgrade_result_respects_declared_bound() {
    let dir = tmpdir("bound");
    let path = dir.join("res.json");
    let out = run(&[
        "upgrade",
        "--gen",
        "hard-grid:3:40",
        "--L",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let delta = parsed["delta_i_nats"].as_f64().unwrap();
    let bound = parsed["bound_nats"].as_f64().unwrap();
    assert!(delta <= bound + 1e-12);
    assert!((bound - 256.0 / 9.0).abs() < 1e-12);
    let total: f64 = parsed["pxz"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["p"].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-10);
}
