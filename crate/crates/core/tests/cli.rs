//! Black-box tests of the installed binary: exit codes, artifact layout,
//! determinism, and the error text a user actually sees.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qpu-twin"));
    // Keep the ambient environment from steering output locations.
    c.env_remove("QPU_TWIN_OUT");
    c
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process terminated by signal")
}

/// Data rows of a counts CSV: everything after the `bitstring,count` header
/// that is not a `#` comment.
fn csv_rows(path: &Path) -> Vec<(String, f64)> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip_while(|l| *l != "bitstring,count")
        .skip(1)
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (bits, count) = l.split_once(',').unwrap();
            (bits.to_string(), count.parse().unwrap())
        })
        .collect()
}

#[test]
fn usage_errors_exit_2() {
    let out = bin().args(["simulate", "GHZ-2", "--no-such-flag"]).output().unwrap();
    assert_eq!(code(&out), 2, "{}", stderr(&out));

    let out = bin().args(["bench", "--only", "no-fixture-has-this-name"]).output().unwrap();
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("GHZ-2"), "should list the known fixtures: {}", stderr(&out));
}

#[test]
fn parse_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.qasm");
    fs::write(&bad, "OPENQASM 2.0;\nqreg q[2];\nfrobnicate q[0];\n").unwrap();
    let out = bin().arg("simulate").arg(&bad).output().unwrap();
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("broken.qasm"), "{}", stderr(&out));
}

#[test]
fn missing_inputs_exit_4() {
    let out = bin().args(["simulate", "/definitely/not/here.qasm"]).output().unwrap();
    assert_eq!(code(&out), 4, "{}", stderr(&out));

    let out = bin()
        .args(["simulate", "GHZ-2", "--calibration", "/definitely/not/here.json"])
        .output()
        .unwrap();
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn resource_limits_exit_5() {
    let out = bin().args(["simulate", "QW-6", "--max-memory-gib", "1"]).output().unwrap();
    assert_eq!(code(&out), 5, "{}", stderr(&out));
    assert!(stderr(&out).contains("GiB"), "{}", stderr(&out));

    let out = bin().args(["simulate", "QW-4", "--max-qubits", "5"]).output().unwrap();
    assert_eq!(code(&out), 5, "{}", stderr(&out));
}

#[test]
fn noiseless_ghz_writes_a_two_row_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "GHZ-2", "--mode", "noiseless"])
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    assert!(dir.path().join("ghz-2.dist.json").is_file());
    let rows = csv_rows(&dir.path().join("ghz-2.counts.csv"));
    assert_eq!(rows.len(), 2, "{rows:?}");
    assert_eq!(rows[0].0, "00");
    assert_eq!(rows[1].0, "11");
    assert!((rows[0].1 - 5000.0).abs() < 1e-9);
    assert!((rows[1].1 - 5000.0).abs() < 1e-9);
}

#[test]
fn sampled_runs_with_one_seed_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let out = bin()
            .args(["simulate", "GHZ-3", "--sample", "--seed", "11"])
            .arg("-o")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    for name in ["ghz-3.dist.json", "ghz-3.counts.csv"] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn out_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "GHZ-2", "--mode", "noiseless"])
        .env("QPU_TWIN_OUT", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("ghz-2.dist.json").is_file());
    assert!(dir.path().join("ghz-2.counts.csv").is_file());
}

#[test]
fn dump_schedule_emits_timeline_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["simulate", "GHZ-2", "--dump-schedule"])
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ghz-2.schedule.json")).unwrap()).unwrap();
    assert!(v["duration_ns"].as_u64().unwrap() > 0);
    assert!(!v["timelines"].as_array().unwrap().is_empty());
    assert!(!v["events"].as_array().unwrap().is_empty());
}

#[test]
fn compile_emits_native_qasm_and_layout() {
    let dir = tempfile::tempdir().unwrap();
    let logical = dir.path().join("ghz-4.qasm");
    fs::write(
        &logical,
        "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[4];\ncreg c[4];\n\
         h q[0];\ncx q[0],q[1];\ncx q[1],q[2];\ncx q[2],q[3];\n\
         measure q[0] -> c[0];\nmeasure q[1] -> c[1];\nmeasure q[2] -> c[2];\nmeasure q[3] -> c[3];\n",
    )
    .unwrap();
    let out = bin()
        .arg("compile")
        .arg(&logical)
        .args(["--gateset", "ibmq", "--topology", "ibmq-melbourne"])
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let qasm = fs::read_to_string(dir.path().join("ghz-4.native.qasm")).unwrap();
    assert!(qasm.contains("OPENQASM 2.0;"));
    assert!(qasm.contains("cx "), "lowered output should use the target gateset:\n{qasm}");
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("ghz-4.compile.json")).unwrap()).unwrap();
    assert_eq!(v["gateset"].as_str().unwrap(), "ibmq-u-cnot");
    assert!(v["wire_permutation"].as_array().is_some());
}

#[test]
fn comparing_a_histogram_with_itself_gives_zero_distance() {
    let dir = tempfile::tempdir().unwrap();
    let sim = bin()
        .args(["simulate", "GHZ-2"])
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&sim), 0, "{}", stderr(&sim));

    let counts = dir.path().join("ghz-2.counts.csv");
    let out = bin()
        .arg("compare")
        .arg(&counts)
        .arg(&counts)
        .args(["--circuit-id", "self"])
        .arg("-o")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("self.report.json")).unwrap()).unwrap();
    assert_eq!(v["report"]["hellinger"].as_f64().unwrap(), 0.0);
    assert_eq!(v["sim_sha256"], v["ref_sha256"]);
    assert!(dir.path().join("plots").join("self.csv").is_file());
}

#[test]
fn malformed_reference_csv_is_rejected_with_its_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.csv");
    fs::write(&good, "bitstring,count\n00,70\n11,30\n").unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "bitstring,count\n00,70\n11,not-a-number\n").unwrap();

    let out = bin().arg("compare").arg(&good).arg(&bad).arg("-o").arg(dir.path()).output().unwrap();
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    let err = stderr(&out);
    assert!(err.contains("bad.csv") && err.contains("line 3"), "{err}");
}
