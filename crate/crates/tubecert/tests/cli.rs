//! End-to-end tests of the command-line interface: exit codes, output
//! files, reproducibility of certificate bytes, and rejection paths.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tubecert"))
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tubecert-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn validate_builtins() {
    for name in ["fib", "ising"] {
        let (code, stdout, _) = run(&["validate", "--builtin", name]);
        assert_eq!(code, 0, "{name}: {stdout}");
        assert!(stdout.contains("validate: PASS"));
    }
}

#[test]
fn validate_corrupted_file_fails() {
    let dir = tmpdir("corrupt");
    // emit a category file, corrupt a fusion coefficient, expect a named failure
    let cat = tubecert::builtin::builtin_category("vec_z2").unwrap();
    let mut file = cat.to_file();
    file.fusion.retain(|(a, b, _, _)| !(a == "g" && b == "g"));
    file.fusion.push(("g".into(), "g".into(), "g".into(), 1));
    let path = dir.join("bad.json");
    std::fs::write(&path, file.to_json()).unwrap();
    let (code, _, stderr) = run(&["validate", "--file", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(
        stderr.contains("violat") || stderr.contains("duality") || stderr.contains("unit"),
        "stderr should name the failing identity: {stderr}"
    );
}

#[test]
fn info_reports_dimensions() {
    let (code, stdout, _) = run(&["info", "--builtin", "ising"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("tube algebra dimension: 12"), "{stdout}");
    assert!(stdout.contains("1.414213562373"), "d(σ) = √2: {stdout}");
}

#[test]
fn certify_writes_verified_certificate_and_verify_accepts() {
    let dir = tmpdir("certify");
    let cert = dir.join("z2.json");
    let (code, stdout, stderr) = run(&[
        "certify",
        "--builtin",
        "vec_z2",
        "--S",
        "g",
        "--eps",
        "1/100",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
    assert!(stdout.contains("oracle gap: 2.0000"), "{stdout}");
    assert!(stdout.contains("ACCEPTED"));
    assert!(cert.exists());

    let (code, stdout, _) = run(&[
        "verify",
        cert.to_str().unwrap(),
        "--builtin",
        "vec_z2",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("ACCEPTED"));

    // tampering with k must be caught by the exact verifier
    let json = std::fs::read_to_string(&cert).unwrap();
    let mut value: serde_json::Value = serde_json::from_str(&json).unwrap();
    value["k"] = serde_json::Value::String("21/10".into());
    let bad = dir.join("tampered.json");
    std::fs::write(&bad, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    let (code, stdout, _) = run(&["verify", bad.to_str().unwrap(), "--builtin", "vec_z2"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("REJECTED"));

    // verifying against the wrong category fails on the hash
    let (code, stdout, _) = run(&["verify", cert.to_str().unwrap(), "--builtin", "vec_z3"]);
    assert_eq!(code, 1, "{stdout}");
}

#[test]
fn certificates_are_byte_identical_per_seed() {
    let dir = tmpdir("repro");
    let mut bytes = Vec::new();
    for run_idx in 0..2 {
        let path = dir.join(format!("fib-{run_idx}.json"));
        let (code, _, stderr) = run(&[
            "certify",
            "--builtin",
            "fib",
            "--S",
            "tau",
            "--eps",
            "1/50",
            "--seed",
            "7",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{stderr}");
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "same config + seed must be byte-identical");
    // a different seed still verifies (and may differ in bytes)
    let path = dir.join("fib-other-seed.json");
    let (code, _, _) = run(&[
        "certify",
        "--builtin",
        "fib",
        "--S",
        "tau",
        "--eps",
        "1/50",
        "--seed",
        "8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn certify_fixed_k_above_gap_writes_refutation() {
    let dir = tmpdir("fixedk");
    let out = dir.join("fib-k32.json");
    let (code, stdout, _) = run(&[
        "certify",
        "--builtin",
        "fib",
        "--S",
        "tau",
        "--k",
        "3/2",
        "--eps",
        "1/50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("infeasible"), "{stdout}");
    assert!(Path::new(&out.with_extension("refutation.json")).exists());
}

#[test]
fn refute_command() {
    let dir = tmpdir("refute");
    let out = dir.join("wit.json");
    let (code, stdout, _) = run(&[
        "refute",
        "--builtin",
        "fib",
        "--S",
        "tau",
        "--k",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("φ(Δ² − kΔ)"), "{stdout}");
    let json = std::fs::read_to_string(&out).unwrap();
    assert!(json.contains("target_value"));
    // below the gap there is nothing to refute
    let (code, stdout, _) = run(&["refute", "--builtin", "fib", "--S", "tau", "--k", "1"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("no refutation"));
}

#[test]
fn weighted_nu_certify() {
    let dir = tmpdir("nu");
    let cert = dir.join("z3.json");
    let (code, stdout, stderr) = run(&[
        "certify",
        "--builtin",
        "vec_z3",
        "--S",
        "g,g^2",
        "--nu",
        "g=1/2,g^2=1/2",
        "--eps",
        "1/100",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "stdout: {stdout}\nstderr: {stderr}");
    // asymmetric weights are rejected
    let (code, _, stderr) = run(&[
        "certify",
        "--builtin",
        "vec_z3",
        "--S",
        "g,g^2",
        "--nu",
        "g=1/2,g^2=1/3",
        "--eps",
        "1/100",
    ]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("symmetric"), "{stderr}");
}

#[test]
fn oracle_gap_digits() {
    let (code, stdout, _) = run(&["oracle-gap", "--builtin", "fib", "--S", "tau"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("1.381966011250"), "{stdout}");
}

#[test]
fn input_errors_exit_2() {
    // float eps refused
    let (code, _, stderr) = run(&[
        "certify",
        "--builtin",
        "vec_z2",
        "--S",
        "g",
        "--eps",
        "0.01",
    ]);
    assert_eq!(code, 2);
    assert!(stderr.contains("exact rational"), "{stderr}");
    // unknown builtin
    let (code, _, _) = run(&["validate", "--builtin", "nope"]);
    assert_eq!(code, 2);
    // both --builtin and --file
    let (code, _, _) = run(&[
        "validate",
        "--builtin",
        "fib",
        "--file",
        "/nonexistent.json",
    ]);
    assert_eq!(code, 2);
    // non-generating S
    let (code, _, stderr) = run(&["oracle-gap", "--builtin", "ising", "--S", "eps"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("generating"), "{stderr}");
}

#[test]
fn category_file_roundtrip_through_cli() {
    let dir = tmpdir("roundtrip");
    let cat = tubecert::builtin::builtin_category("ising").unwrap();
    let path = dir.join("ising.json");
    std::fs::write(&path, cat.to_file().to_json()).unwrap();
    let (code, stdout, _) = run(&["validate", "--file", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    // certify from the file, verify against the builtin (same hash)
    let cert = dir.join("cert.json");
    let (code, _, stderr) = run(&[
        "certify",
        "--file",
        path.to_str().unwrap(),
        "--S",
        "sigma",
        "--eps",
        "1/50",
        "--out",
        cert.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stderr}");
    let (code, _, _) = run(&["verify", cert.to_str().unwrap(), "--builtin", "ising"]);
    assert_eq!(code, 0);
}
