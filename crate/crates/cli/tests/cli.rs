use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn moyal(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_moyal"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn analytic_kernel_at_the_origin_is_inverse_pi_squared() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(
        dir.path(),
        &[
            "kernel",
            "--analytic",
            "--q1",
            "0",
            "--p1",
            "0",
            "--q2",
            "0",
            "--p2",
            "0",
            "--q",
            "0",
            "--p",
            "0",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["re"].as_f64().unwrap() - 0.10132118).abs() < 1e-8);
    assert_eq!(v["im"].as_f64().unwrap(), 0.0);
    let prov = json(&dir.path().join("moyal-provenance.json"));
    assert_eq!(prov["command"]["name"], "kernel");
    assert_eq!(prov["config"]["dim"], 128);
    assert_eq!(prov["seed"], 20240101);
    assert_eq!(prov["exit_code"], 0);
}

#[test]
fn negative_coordinates_parse() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(dir.path(), &["kernel", "--analytic", "--q1", "-0.5", "--p", "-1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(dir.path(), &["kernel", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(moyal(dir.path(), &["frobnicate"]).status.code(), Some(1));
    assert_eq!(moyal(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(moyal(dir.path(), &["--version"]).status.code(), Some(0));
}

#[test]
fn unreadable_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(dir.path(), &["verify-deformation", "--triples", "absent.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.json"));
    let prov = json(&dir.path().join("moyal-provenance.json"));
    assert_eq!(prov["exit_code"], 1);
    assert!(prov["error"].as_str().unwrap().contains("absent.json"));
}

#[test]
fn config_file_merges_under_flags_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), r#"{"dim": 16, "seed": 5}"#).unwrap();
    let o = moyal(
        dir.path(),
        &["fosc", "--config", "c.json", "--dim", "20", "--out", "f.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let prov = json(&dir.path().join("f.provenance.json"));
    assert_eq!(prov["config"]["dim"], 20);
    assert_eq!(prov["config"]["seed"], 5);
    assert_eq!(
        fs::read_to_string(dir.path().join("f.csv")).unwrap().lines().count(),
        1 + 18
    );

    fs::write(dir.path().join("bad.json"), r#"{"dims": 16}"#).unwrap();
    let o = moyal(dir.path(), &["fosc", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));
}

#[test]
fn wigner_vacuum_peaks_at_two_and_is_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(
        dir.path(),
        &["wigner", "--state", "vacuum", "--dim", "32", "--out", "w.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    let report = stdout_json(&o);
    assert!((report["value_at_origin"][0].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!((report["normalization"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    let csv = fs::read_to_string(dir.path().join("w.csv")).unwrap();
    assert!(csv.starts_with("q,p,re,im\n"));
    assert_eq!(csv.lines().count(), 1 + 121 * 121);
    assert_eq!(json(&dir.path().join("w.json"))["real_valued"], true);
    assert!(dir.path().join("w.provenance.json").exists());
}

#[test]
fn invalid_state_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(dir.path(), &["wigner", "--state", "squeezed"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn deformation_batch_writes_one_row_per_triple() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("t.json"),
        r#"{"triples":[{"q1":0.1,"p1":-0.2,"q2":0.3,"p2":0.1,"q":0.5,"p":-0.4},
                       {"q1":0,"p1":0,"q2":0,"p2":0,"q":2,"p":0}]}"#,
    )
    .unwrap();
    let o = moyal(
        dir.path(),
        &[
            "verify-deformation",
            "--triples",
            "t.json",
            "--dim",
            "256",
            "--damping",
            "0.6,0.4,0.3,0.2,0.15,0.1",
            "--order",
            "5",
            "--strict",
            "--out",
            "d.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "q1,p1,q2,p2,q,p,mu,r_num_re,r_num_im,r_ana,abs_diff,err,status"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    // μ = 4: analytic 9/16, numeric 4·2/4 = 2
    assert_eq!(rows[1][9], "0.5625");
    assert!((rows[1][7].parse::<f64>().unwrap() - 2.0).abs() < 1e-3);
    assert!(rows.iter().all(|r| r[12] == "ok"));
}

#[test]
fn strict_mode_turns_warnings_into_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["kernel", "--q", "3", "--dim", "16"];
    assert_eq!(moyal(dir.path(), &args).status.code(), Some(0));
    let o = moyal(dir.path(), &[&args[..], &["--strict"]].concat());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&dir.path().join("moyal-provenance.json"))["exit_code"], 2);
}

#[test]
fn kernel_route_rejects_non_decaying_symbols() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(
        dir.path(),
        &[
            "star",
            "--a",
            "symbol:q",
            "--b",
            "wigner:vacuum",
            "--route",
            "kernel",
            "--dim",
            "16",
            "--grid-points",
            "21",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("decay"));
}

#[test]
fn star_of_vacuum_with_itself_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--dim", "32", "--grid-extent", "5", "--grid-points", "51"];
    let o = moyal(
        dir.path(),
        &[&["wigner", "--state", "vacuum", "--out", "w.csv"][..], &grid].concat(),
    );
    assert_eq!(o.status.code(), Some(0));
    let o = moyal(
        dir.path(),
        &[
            &[
                "star", "--a", "w.csv", "--b", "w.csv", "--route", "kernel", "--out", "s.csv",
            ][..],
            &grid,
        ]
        .concat(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!((stdout_json(&o)["value_at_origin"][0].as_f64().unwrap() - 2.0).abs() < 1e-3);
}

#[test]
fn kproduct_identities_hold() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(dir.path(), &["kproduct", "--count", "10", "--size", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v["associativity_relative"].as_f64().unwrap() < 1e-12);
    assert!(v["unit_law"].as_f64().unwrap() < 1e-10);
    assert!(v["homomorphism"].as_f64().unwrap() < 1e-10);
}

#[test]
fn convergence_over_schedules_and_single_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(
        dir.path(),
        &[
            "convergence",
            "--target",
            "parity",
            "--gamma",
            "1,1",
            "--dims",
            "300",
            "--schedule",
            "0.4,0.2,0.1,0.05:2",
            "--schedule",
            "0.6,0.4,0.3,0.2,0.15,0.1:5",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    for row in csv.lines().skip(1) {
        let re: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((re - 0.5).abs() < 1e-3);
        // no estimate from one dimension
        assert!(row.ends_with(','));
    }
    let prov = json(&dir.path().join("c.provenance.json"));
    assert!(prov["warnings"][0].as_str().unwrap().contains("single dimension"));
    assert_eq!(json(&dir.path().join("c.plot.json"))["data"], "c.csv");
}

#[test]
fn kernel_convergence_over_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = moyal(
        dir.path(),
        &[
            "convergence",
            "--target",
            "kernel",
            "--q1",
            "0.2",
            "--p",
            "0.3",
            "--dims",
            "64,128,256",
            "--out",
            "c.csv",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("c.csv")).unwrap();
    let diffs: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(diffs.len(), 2);
    assert!(diffs[1] < diffs[0]);
    assert_eq!(stdout_json(&o)["non_monotone"], false);
}

#[test]
fn identical_runs_are_byte_identical() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("c.json"), r#"{"dim": 24, "seed": 99}"#).unwrap();
        let o = moyal(
            dir.path(),
            &["kernel", "--config", "c.json", "--random", "6", "--out", "k.csv"],
        );
        assert_eq!(o.status.code(), Some(0));
        let o = moyal(
            dir.path(),
            &["kproduct", "--config", "c.json", "--count", "3", "--out", "kp.json"],
        );
        assert_eq!(o.status.code(), Some(0));
        ["k.csv", "k.provenance.json", "kp.json", "kp.provenance.json"].map(|f| fs::read(dir.path().join(f)).unwrap())
    };
    assert_eq!(run(), run());
}
