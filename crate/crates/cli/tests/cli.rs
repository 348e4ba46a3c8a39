use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn painleve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_painleve"))
        .args(args)
        .output()
        .expect("binary runs")
}

/// Runs a command expected to exit with `code` and parses its JSON report.
fn report(args: &[&str], code: i32) -> Value {
    let out = painleve(args);
    assert_eq!(
        out.status.code(),
        Some(code),
        "{args:?}\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap().to_string())
        .collect()
}

fn roots(r: &Value) -> Vec<(String, u64)> {
    r["roots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| (x["iota"].as_str().unwrap().to_string(), x["multiplicity"].as_u64().unwrap()))
        .collect()
}

fn pair(s: &str, m: u64) -> (String, u64) {
    (s.to_string(), m)
}

#[test]
fn uno_resonances() {
    let r = report(&["resonances", "--system", "warped", "--dims", "5", "--family", "uno"], 0);
    assert_eq!(r["schema"], 1);
    assert_eq!(roots(&r), [pair("-4", 1), pair("-1", 1), pair("0", 1), pair("2", 1)]);
    assert_eq!(r["residual"], "1");
    assert_eq!(r["params"]["b0"], "1");
}

#[test]
fn bb_resonances() {
    let r = report(&["resonances", "--system", "bb", "--d2", "4"], 0);
    assert_eq!(roots(&r), [pair("-2", 1), pair("-1", 1), pair("0", 3), pair("2", 1)]);
    assert_eq!(r["factorization"], "(iota + 2) (iota + 1) iota^3 (iota - 2)");
}

#[test]
fn case_i_keeps_the_irreducible_quadratic() {
    let r = report(&["resonances", "--dims", "2,3", "--family", "caseI", "--l", "2"], 0);
    assert_eq!(r["residual"], "iota^2 + 4*iota + 8");
    assert_eq!(roots(&r), [pair("-4", 1), pair("-1", 1), pair("0", 1), pair("2", 1)]);
}

#[test]
fn dos_minus_projection_reports_lambda() {
    let r = report(
        &["series", "--system", "warped", "--dims", "4", "--family", "dos", "--sign", "minus", "--a0", "2", "--N", "10", "--h0"],
        0,
    );
    assert_eq!(r["series"]["lambda"], "0");
    assert_eq!(r["series"]["h0_projected"], true);
    assert!(r["constraint"].as_array().unwrap().iter().all(|row| row["coeff"] == "0"));
}

#[test]
fn case_ii_coefficient_table() {
    let r = report(&["series", "--dims", "2,4", "--family", "caseII", "--point", "-4/3,-1/3", "--N", "12"], 0);
    let table = r["coefficients"].as_array().unwrap();
    let find = |var: &str, step: u64| {
        table
            .iter()
            .find(|row| row["variable"] == var && row["step"] == step)
            .map(|row| row["coeff"].as_str().unwrap().to_string())
            .unwrap()
    };
    assert_eq!(find("x1", 2), "-9/20");
    assert_eq!(find("u1", 2), "3/20");
    assert_eq!(find("u3", 2), "3/5");
    assert_eq!(find("u1", 4), "-351/5600");
    assert_eq!(find("u3", 4), "-243/700");
}

#[test]
fn zero_truncation_keeps_only_leading_terms() {
    let r = report(&["series", "--dims", "3", "--family", "uno", "--N", "0"], 0);
    let table = r["coefficients"].as_array().unwrap();
    assert_eq!(table.len(), 4);
    assert!(table.iter().all(|row| row["step"] == 0));
    assert_eq!(strings(&r["balance"]["leading_coefficients"]), ["6", "1", "1", "3"]);
}

#[test]
fn reports_are_deterministic() {
    for args in [
        &["series", "--dims", "2,4", "--family", "caseII", "--point", "-4/3,-1/3", "--h0"][..],
        &["resonances", "--system", "bb", "--d2", "6"][..],
        &["ellipsoid", "--dims", "2,2", "--bound", "4", "--moduli", "3,8"][..],
    ] {
        assert_eq!(painleve(args).stdout, painleve(args).stdout, "{args:?}");
    }
}

#[test]
fn validate_projected_uno_passes() {
    let r = report(&["validate", "--dims", "3", "--family", "uno", "--h0"], 0);
    assert_eq!(r["pass"], true);
    let checks = r["report"]["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
    for name in ["formal_residual", "residual_slope", "constraint", "lyapunov_identity", "frame_limits"] {
        assert!(checks.iter().any(|c| c["name"] == name), "missing {name}");
    }
}

#[test]
fn validate_perturbed_lambda_fails_the_constraint() {
    let r = report(&["validate", "--dims", "3", "--family", "uno", "--h0", "--perturb-lambda", "1/100"], 4);
    assert_eq!(r["pass"], false);
    let constraint = r["report"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "constraint")
        .unwrap()
        .clone();
    assert_eq!(constraint["pass"], false);
}

#[test]
fn validate_equilibrium_is_trivial() {
    let r = report(&["validate", "--dims", "3", "--family", "equilibrium"], 0);
    assert_eq!(r["pass"], true);
}

#[test]
fn validate_reads_a_saved_series_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.json");
    let csv = dir.path().join("trajectory.csv");
    let path = |p: &Path| p.to_str().unwrap().to_string();
    let out = painleve(&["series", "--dims", "2", "--family", "uno", "--h0", "-o", &path(&series)]);
    assert!(out.status.success() && out.stdout.is_empty());
    let r = report(&["validate", "--input", &path(&series), "--csv", &path(&csv)], 0);
    assert_eq!(r["pass"], true);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,x1,x2,u1,u2"));
    assert!(lines.count() > 2);
}

#[test]
fn ellipsoid_examples() {
    let r = report(&["ellipsoid", "--dims", "7,7,7", "--bound", "20", "--moduli", "8"], 0);
    assert_eq!(r["count"], 0);
    assert_eq!(r["obstructed"], true);
    assert_eq!(r["obstructions"][0]["verdict"], "obstructed");

    let r = report(&["ellipsoid", "--dims", "2,2", "--bound", "3"], 0);
    let points: Vec<Vec<String>> = r["points"].as_array().unwrap().iter().map(strings).collect();
    assert!(points.contains(&vec!["-1".to_string(), "-1".to_string()]));

    let r = report(&["ellipsoid", "--dims", "4", "--bound", "1"], 0);
    let points: Vec<Vec<String>> = r["points"].as_array().unwrap().iter().map(strings).collect();
    assert_eq!(points, [vec!["-1".to_string()], vec!["1".to_string()]]);
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        &["resonances", "--dims", "1", "--family", "uno"][..],
        &["resonances", "--dims", "2,x", "--family", "uno"][..],
        &["series", "--dims", "4", "--family", "dos", "--sign", "minus", "--a0", "0.5"][..],
        &["series", "--dims", "4", "--family", "dos"][..],
        &["resonances", "--dims", "3", "--family", "uno", "--param", "nope=1"][..],
        &["validate", "--input", "/nonexistent/series.json"][..],
        &["frobnicate"][..],
    ] {
        let out = painleve(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}
