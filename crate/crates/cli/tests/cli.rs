use std::fs;
use std::path::PathBuf;

use spectral_attention_cli::{run, CommandResult};

fn cli(args: &[&str]) -> CommandResult {
    run(std::iter::once("spectral-attention").chain(args.iter().copied()))
}

fn ok(args: &[&str]) -> CommandResult {
    let r = cli(args);
    assert_eq!(r.exit_code, 0, "{args:?}: {}", r.summary);
    r
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spectral-attention-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn field(json: &serde_json::Value, key: &str) -> f64 {
    json[key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn dct_table_first_row_is_constant() {
    let r = ok(&["dct-table", "--size", "8"]);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 8);
    for v in lines.next().unwrap().split(',') {
        let v: f64 = v.parse().unwrap();
        assert!((v - 0.35355).abs() < 1e-5);
    }
    assert_eq!(r.stdout.lines().count(), 9);
}

#[test]
fn dct_table_writes_truncated_companion() {
    let out = scratch("d8.csv");
    let r = ok(&["dct-table", "--size", "8", "--tau", "0.5", "--out", out.to_str().unwrap()]);
    assert!(r.stdout.is_empty());
    assert_eq!(r.files, vec![out.clone(), scratch("d8-dbar.csv")]);
    let dbar = fs::read_to_string(scratch("d8-dbar.csv")).unwrap();
    assert_eq!(dbar.lines().count(), 1 + 4);
    let full = fs::read_to_string(&out).unwrap();
    // the truncated rows are the leading rows of the full basis
    assert!(full.starts_with(&dbar));
}

#[test]
fn dct_table_rejects_empty_retention() {
    assert_eq!(cli(&["dct-table", "--size", "8", "--tau", "0.01"]).exit_code, 1);
    assert_eq!(cli(&["dct-table", "--size", "0"]).exit_code, 1);
}

#[test]
fn coverage_is_one_everywhere() {
    let r = ok(&["coverage", "--size", "16"]);
    let rows: Vec<_> = r.stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let cov: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!((cov - 1.0).abs() < 1e-10);
    }
    assert_eq!(cli(&["coverage", "--size", "0"]).exit_code, 1);
}

#[test]
fn klt_reports_near_diagonal_covariance() {
    let r = ok(&["klt", "--size", "8", "--rho", "0.9"]);
    let json: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(field(&json["report"], "off_diagonal_ratio") < 0.05);
    assert!(field(&json["report"], "mean_cosine") >= 0.9);
    let curve = json["compaction"].as_array().unwrap();
    assert_eq!(curve.len(), 8);
    assert!((field(&curve[7], "energy") - 1.0).abs() < 1e-12);
    assert_eq!(cli(&["klt", "--size", "8", "--rho", "1.0"]).exit_code, 1);
}

#[test]
fn equiv_passes_and_detects_a_fault() {
    ok(&["equiv", "--seed", "1"]);
    let grid = ok(&["equiv", "--seed", "1", "--grid"]);
    assert_eq!(grid.stdout.lines().filter(|l| l.starts_with("naive-vs-simplified")).count(), 20);
    let bad = cli(&["equiv", "--seed", "1", "--perturb"]);
    assert_eq!(bad.exit_code, 1);
    assert!(bad.summary.contains("naive-vs-simplified"), "{}", bad.summary);
}

#[test]
fn gradcheck_passes_and_catches_corruption() {
    for mode in ["vanilla", "dct-k", "simplified"] {
        let r = ok(&["gradcheck", "--mode", mode, "--seed", "2"]);
        let err: f64 = r.stdout.lines().nth(1).unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert!(err < 1e-5);
    }
    let bad = cli(&["gradcheck", "--mode", "vanilla", "--corrupt-gradient"]);
    assert_eq!(bad.exit_code, 1);
    assert!(bad.summary.contains("gradient"));
}

#[test]
fn cost_reproduces_swin_t_deltas() {
    let r = ok(&["cost", "--model", "swin-t", "--tau", "0.25", "--variant", "simplified"]);
    let json: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!((field(&json, "param_delta") / 6.08e6 - 1.0).abs() < 0.01);
    assert!((field(&json, "mult_delta") / 1.25e9 - 1.0).abs() < 0.01);
    assert_eq!(json["stages"].as_array().unwrap().len(), 4);
}

#[test]
fn cost_rejects_unknown_model_and_variant() {
    assert_eq!(cli(&["cost", "--model", "resnet", "--tau", "0.5"]).exit_code, 1);
    assert_eq!(cli(&["cost", "--model", "swin-t", "--tau", "0.5", "--variant", "sparse"]).exit_code, 2);
}

#[test]
fn train_writes_history() {
    let out = scratch("train.csv");
    let r = ok(&[
        "train", "--mode", "dct-q", "--steps", "20", "--samples", "64", "--seed", "3", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.files, vec![out.clone()]);
    let csv = fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("# mode=dct-q seed=3"));
    assert_eq!(csv.lines().count(), 2 + 21);
}

#[test]
fn train_reports_divergence() {
    let r = cli(&["train", "--mode", "vanilla", "--steps", "50", "--samples", "32", "--lr", "1e4"]);
    assert_eq!(r.exit_code, 1);
    assert!(r.summary.contains("diverged"), "{}", r.summary);
}

#[test]
fn bench_matches_worked_examples() {
    let r = ok(&["bench"]);
    assert!(r.stdout.contains("1,2,4,1,0.5,vanilla,384,384,true"));
    assert!(r.stdout.contains("1,2,4,1,0.5,naive,240,240,true"));
    assert!(r.stdout.contains("1,2,4,1,0.5,simplified,176,176,true"));
    let bad = cli(&["bench", "--perturb"]);
    assert_eq!(bad.exit_code, 1);
    assert!(bad.summary.contains("closed-form count"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["dct-table", "--size", "12", "--tau", "0.5"][..],
        &["klt", "--size", "8", "--rho", "0.5"],
        &["equiv", "--seed", "4", "--grid"],
        &["cost", "--model", "swin-s", "--tau", "0.75", "--variant", "naive"],
        &["train", "--mode", "vanilla", "--steps", "10", "--samples", "32"],
    ] {
        assert_eq!(ok(args).stdout, ok(args).stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(cli(&["frobnicate"]).exit_code, 2);
    assert_eq!(cli(&[]).exit_code, 2);
    assert_eq!(cli(&["dct-table"]).exit_code, 2);
    assert_eq!(cli(&["gradcheck", "--mode", "nope"]).exit_code, 2);
    let help = cli(&["--help"]);
    assert_eq!(help.exit_code, 0);
    assert!(help.stdout.contains("dct-table"));
    assert!(!help.stdout.contains("perturb"));
}
