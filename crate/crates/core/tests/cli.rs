//! Runs the compiled binary end to end.

use std::process::{Command, Output};

use serde_json::Value;

fn surfcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_surfcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn fox_genus_three_lists_six_matches() {
    let out = surfcheck(&["verify-fox", "--genus", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["suite"], "verify-fox");
    assert_eq!(r["pass"], true);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 6);
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn telescope_genus_one_final_sum() {
    let out = surfcheck(&["verify-telescope", "--genus", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let detail = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "final_sum")
        .unwrap()["detail"]
        .as_str()
        .unwrap()
        .to_string();
    assert_eq!(detail, "final sum = -1[1] +1[x1 x2 x1^-1 x2^-1]");
}

#[test]
fn main_identity_headline_run() {
    let out = surfcheck(&[
        "verify-main", "--group", "su2", "--genus", "2", "--trials", "100", "--seed", "7", "--h", "1e-5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for key in ["suite", "genus", "group", "seed", "trials", "h", "max_residual", "calibrated_mu", "pass"] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert!(r["max_residual"].as_f64().unwrap() <= 1e-5);
    assert_eq!(r["seed"], 7);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = surfcheck(&[
            "verify-pw", "--trials", "20", "--seed", "3", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let other = surfcheck(&["verify-pw", "--trials", "20", "--seed", "4"]);
    assert_ne!(other.stdout, std::fs::read(&a).unwrap());
}

#[test]
fn exit_codes() {
    assert_eq!(surfcheck(&["verify-fox", "--bogus"]).status.code(), Some(1));
    assert_eq!(surfcheck(&["verify-fox", "--genus", "0"]).status.code(), Some(1));
    assert_eq!(surfcheck(&["verify-fox", "--group", "so3"]).status.code(), Some(1));
    assert_eq!(surfcheck(&["nonsense"]).status.code(), Some(1));
    assert_eq!(surfcheck(&["verify-cycle", "--genus", "1"]).status.code(), Some(1));
    assert_eq!(surfcheck(&["--help"]).status.code(), Some(0));

    let failing = surfcheck(&["verify-main", "--genus", "1", "--trials", "4", "--tol", "1e-300"]);
    assert_eq!(failing.status.code(), Some(2));
    let r = report(&failing);
    assert_eq!(r["pass"], false);
    let failures = r["failures"].as_array().unwrap();
    assert_eq!(failures.len(), 4);
    // replay data: the configuration is present and loadable
    assert_eq!(failures[0]["configuration"].as_array().unwrap().len(), 2);
}

#[test]
fn fiber_and_moment_suites_pass() {
    for args in [
        &["project-fiber", "--trials", "50", "--seed", "1"][..],
        &["verify-moment", "--trials", "50", "--genus", "3"][..],
        &["verify-cycle", "--genus", "4"][..],
        &["calibrate", "--group", "su3", "--trials", "50"][..],
    ] {
        let out = surfcheck(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stdout));
    }
}
