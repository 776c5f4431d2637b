use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_algotherm"));
    c.env_remove("ALGOTHERM_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn error_line(out: &Output) -> Value {
    let err = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    serde_json::from_str(err.trim_end()).unwrap()
}

fn csv_row<'a>(text: &'a str, t: &str) -> Vec<&'a str> {
    text.lines().find(|l| l.starts_with(&format!("{t},"))).unwrap().split(',').collect()
}

#[test]
fn dyadic2_sweep_gives_exact_partition_function() {
    let out = run(&["sweep", "--machine", "dyadic2.json", "--t-grid", "0.25,0.5", "--precision", "128"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "T,n,Z_lo,Z_hi,F_lo,F_hi,E_lo,E_hi,S_lo,S_hi,C_lo,C_hi,tail_bounded");
    assert_eq!(&csv_row(&text, "0.25")[2..4], ["0.06640625", "0.06640625"]);
    assert_eq!(&csv_row(&text, "0.5")[2..4], ["0.3125", "0.3125"]);
    let e = csv_row(&text, "0.5");
    let (lo, hi): (f64, f64) = (e[6].parse().unwrap(), e[7].parse().unwrap());
    assert!(lo <= 1.2 && 1.2 <= hi && hi - lo < 1e-30);
    assert!(text.contains("# machine=dyadic2 hash="));
    assert!(text.contains("# precision=128"));
}

#[test]
fn grid_ranges_are_inclusive() {
    let out = run(&["sweep", "--machine", "dyadic2", "--t-grid", "1/4:1:1/4", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let ts: Vec<&str> = v["rows"].as_array().unwrap().iter().map(|r| r["T"].as_str().unwrap()).collect();
    assert_eq!(ts, ["0.25", "0.5", "0.75", "1"]);
}

#[test]
fn solve_temp_recovers_one_half() {
    let v = ok_json(&["solve-temp", "--machine", "dyadic2", "--target", "0.3125"]);
    let lo: f64 = v["T"]["lo"].as_str().unwrap().parse().unwrap();
    let hi: f64 = v["T"]["hi"].as_str().unwrap().parse().unwrap();
    assert!(lo <= 0.5 && 0.5 <= hi);
    assert_eq!(v["header"]["precision"], 128);
}

#[test]
fn ensemble_first_codeword_law() {
    let v = ok_json(&["ensemble", "--machine", "dyadic2", "--N", "3", "--L", "4"]);
    assert_eq!(v["ensemble"]["R"]["1"], "2/3");
    assert_eq!(v["ensemble"]["R"]["2"], "1/3");
    assert_eq!(v["ensemble"]["E"], "4/3");
    assert!(v["theta_digest"].is_string());
}

#[test]
fn harmonic_probes_match_pinned_crossings() {
    let v = ok_json(&["probe-divergence", "--machine", "harmonic", "--t", "3/2", "--depth", "20", "--threshold", "1"]);
    assert_eq!(v["first_exceeding"], 16);
    let v = ok_json(&[
        "probe-divergence", "--machine", "harmonic", "--t", "1", "--weight", "l", "--depth", "160",
        "--threshold", "3", "--normalized-threshold", "20",
    ]);
    assert_eq!(v["first_exceeding"], 157);
    assert_eq!(v["first_normalized_exceeding"], 127);
    let v = ok_json(&["entropy-partial", "--machine", "harmonic", "--cutoff", "157"]);
    let lo: f64 = v["value"]["lo"].as_str().unwrap().parse().unwrap();
    assert!(lo > 3.0);
}

#[test]
fn exit_codes_and_error_lines() {
    let cases: [(&[&str], i32, &str); 5] = [
        (&["sweep", "--machine", "nosuch", "--t-grid", "1"], 2, "config"),
        (&["sweep", "--bogus"], 2, "config"),
        (&["ensemble", "--machine", "dyadic2", "--N", "5000", "--L", "9000"], 3, "resource"),
        (&["probe-divergence", "--machine", "dyadic2", "--t", "0", "--depth", "3"], 4, "numeric-domain"),
        (&["solve-temp", "--machine", "dyadic2", "--target", "3"], 5, "unsolvable"),
    ];
    for (args, code, kind) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}");
        assert!(out.stdout.is_empty());
        assert_eq!(error_line(&out)["error"]["kind"], kind, "{args:?}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["ensemble", "--machine", "dyadic2", "--N", "6", "--L", "8", "--mc-samples", "2e5", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["header"]["seed"], 9);
    assert!(v["header"]["machine"]["hash"].is_string());
    let c = run(&["ensemble", "--machine", "dyadic2", "--N", "6", "--L", "8", "--mc-samples", "2e5", "--seed", "10"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let p = path.to_str().unwrap();
    let out = run(&["sweep", "--machine", "dyadic2", "--t-grid", "0.5", "--output", p]);
    assert!(out.status.success() && out.stdout.is_empty());
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.contains("0.5,2,0.3125,0.3125"));
    // A failing run leaves the previous file alone and no temporaries behind.
    let bad = run(&["sweep", "--machine", "dyadic2", "--t-grid", "x", "--output", p]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn precision_comes_from_the_environment() {
    let out = bin().env("ALGOTHERM_PRECISION", "64").args(["solve-temp", "--machine", "dyadic2", "--target", "0.3125"]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["header"]["precision"], 64);
    let out = bin().env("ALGOTHERM_PRECISION", "64").args(["--precision", "96", "solve-temp", "--machine", "dyadic2", "--target", "0.3125"]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["header"]["precision"], 96);
    let out = bin().env("ALGOTHERM_PRECISION", "lots").args(["machines"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("sdvm.ckpt");
    let ck = ck.to_str().unwrap();
    let direct = run(&["enumerate", "--machine", "sdvm", "--rounds", "9"]).stdout;
    run(&["enumerate", "--machine", "sdvm", "--rounds", "6", "--checkpoint", ck]);
    let resumed = run(&["enumerate", "--machine", "sdvm", "--rounds", "9", "--checkpoint", ck]).stdout;
    let body = |b: &[u8]| String::from_utf8_lossy(b).lines().filter(|l| !l.starts_with("# args")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&direct), body(&resumed));
    // The checkpoint belongs to sdvm; another machine must not reuse it.
    let other = run(&["enumerate", "--machine", "dyadic2", "--rounds", "3", "--checkpoint", ck]);
    assert_eq!(other.status.code(), Some(2));
}

#[test]
fn machine_files_and_builtins() {
    let v = ok_json(&["machines"]);
    let names: Vec<&str> = v["machines"].as_array().unwrap().iter().map(|m| m["name"].as_str().unwrap()).collect();
    for n in ["dyadic2", "harmonic", "geometric", "sdvm"] {
        assert!(names.contains(&n));
    }
    let spec = run(&["machines", "--show", "dyadic2"]).stdout;
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d2.json");
    std::fs::write(&path, &spec).unwrap();
    let from_file = ok_json(&["solve-temp", "--machine", path.to_str().unwrap(), "--target", "0.3125"]);
    let builtin = ok_json(&["solve-temp", "--machine", "@dyadic2", "--target", "0.3125"]);
    assert_eq!(from_file["header"]["machine"]["hash"], builtin["header"]["machine"]["hash"]);
    assert!(Path::new(&path).exists());
}

#[test]
fn complexity_report() {
    let v = ok_json(&["complexity", "--machine", "sdvm", "--target", "0000000000", "--lmax", "12", "--fuel", "256"]);
    assert_eq!(v["verdict"]["kind"], "exact");
    let len = v["verdict"]["length"].as_u64().unwrap();
    assert!(len <= 15, "{len}");
    let out = run(&["complexity", "--machine", "sdvm", "--target", "1", "--lmax", "30", "--fuel", "64", "--budget", "1048576"]);
    assert_eq!(out.status.code(), Some(3));
}
