use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gencollatz"))
        .args(args)
        .env_remove("GENCOLLATZ_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&stdout(args)).unwrap()
}

fn mins(report: &Value) -> Vec<(u64, i64)> {
    report["cycles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| {
            let e = c["elements"].as_array().unwrap();
            (e.len() as u64, e[0].as_i64().unwrap())
        })
        .collect()
}

#[test]
fn trajectories() {
    let first = |args: &[&str]| stdout(args).lines().next().unwrap().to_string();
    assert_eq!(
        first(&["trajectory", "--family", "collatz", "--start", "4", "--steps", "5"]),
        "4 5 7 9 6 4"
    );
    assert_eq!(
        first(&["trajectory", "--family", "perm:3", "--start", "8", "--steps", "6"]),
        "8 6 5 4 7 11 8"
    );
    assert_eq!(
        first(&["trajectory", "-f", "collatz", "--start", "0", "--steps", "3"]),
        "0 0 0 0"
    );
    let t = json(&["trajectory", "-f", "3x1", "--start", "-42", "--steps", "11", "--format", "json"]);
    let last = t["steps"].as_array().unwrap().last().unwrap().clone();
    assert_eq!((last["value"].as_i64(), last["k1"].as_u64(), last["k2"].as_u64()), (Some(-41), Some(7), Some(4)));
    assert_eq!(t["lambda"], "2187/2048");
}

#[test]
fn node_tables() {
    let csv = stdout(&["nodes", "--family", "collatz", "--depth", "0", "--format", "csv"]);
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows, ["1,1,PP,0,1,1,0.666666666666667,", "1,1,PG,1,0,1,1.333333333333333,"]);

    let csv = stdout(&["nodes", "--family", "collatz", "--depth", "7", "--format", "csv"]);
    assert!(csv.lines().any(|l| l.starts_with("6,1,PP,31,22,53,") && l.ends_with(",8.3733287")));
    let csv = stdout(&["nodes", "--family", "3x1", "--depth", "7", "--format", "csv"]);
    assert!(csv.lines().any(|l| l.contains(",53,31,84,") && l.ends_with(",9.2663084")));

    assert_eq!(code(&["nodes", "--family", "3x1", "--check-paper"]), 0);
    assert_eq!(code(&["nodes", "--family", "perm:3", "--check-paper"]), 2);
    assert_eq!(code(&["nodes", "--family", "matthews"]), 2);
}

#[test]
fn csv_and_json_carry_the_same_numbers() {
    let args = ["nodes", "-f", "3x1", "--depth", "6"];
    let csv = stdout(&[&args[..], &["--format", "csv"]].concat());
    let js = json(&[&args[..], &["--format", "json"]].concat());
    let rows = js.as_array().unwrap();
    let lines: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(lines.len(), rows.len());
    for (line, r) in lines.iter().zip(rows) {
        let f: Vec<&str> = line.split(',').collect();
        let fields = [
            r["i"].to_string(),
            r["j"].to_string(),
            r["side"].as_str().unwrap().to_string(),
            r["k1"].to_string(),
            r["k2"].to_string(),
            r["k"].to_string(),
            r["lambda"].as_str().unwrap().to_string(),
            r["ln_c"].as_str().unwrap_or("").to_string(),
        ];
        assert_eq!(f, fields);
    }

    let args = ["search", "-f", "3x1", "--lo", "-150", "--hi", "150"];
    let csv = stdout(&[&args[..], &["--format", "csv"]].concat());
    let js = json(&[&args[..], &["--format", "json"]].concat());
    let from_csv: Vec<(u64, i64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(from_csv, mins(&js));
}

#[test]
fn searches() {
    let r = json(&["search", "--family", "collatz", "--lo", "1", "--hi", "200", "--format", "json"]);
    assert_eq!(mins(&r), [(1, 1), (2, 2), (5, 4), (12, 44)]);
    let r = json(&["search", "-f", "collatz", "--lo", "-200", "--hi", "0", "--threads", "2", "--format", "json"]);
    assert_eq!(mins(&r), [(1, -1), (1, 0), (2, -3), (5, -9), (12, -111)]);

    let dir = tempfile::tempdir().unwrap();
    let mapping = dir.path().join("matthews.json");
    std::fs::write(&mapping, gencollatz::catalog::fixtures::MATTHEWS_MAPPING).unwrap();
    let out = dir.path().join("report.json");
    stdout(&[
        "search",
        "--file",
        mapping.to_str().unwrap(),
        "--lo",
        "-6000",
        "--hi",
        "6000",
        "--max-steps",
        "100000",
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let periods: Vec<u64> = r["cycles"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["elements"].as_array().unwrap().len() as u64)
        .collect();
    assert_eq!(periods.len(), 17);
    assert!(periods.contains(&1747) && periods.contains(&1426));

    assert_eq!(code(&["search", "-f", "collatz", "--lo", "5", "--hi", "1"]), 2);
    assert_eq!(code(&["search", "-f", "collatz", "--lo", "1", "--hi", "5", "--max-steps", "0"]), 2);
    assert_eq!(code(&["search", "-f", "perm:9", "--lo", "1", "--hi", "5"]), 2);
    assert_eq!(code(&["search", "--lo", "1", "--hi", "5"]), 2);
    assert_eq!(code(&["search", "--file", "/nonexistent/m.json", "--lo", "1", "--hi", "5"]), 1);
}

#[test]
fn bundled_catalogs_verify() {
    for name in ["collatz", "3x1", "perm:3", "matthews"] {
        assert_eq!(code(&["verify", name]), 0, "{name}");
    }
    assert_eq!(code(&["verify", "/nonexistent/catalog.json"]), 1);
}

fn tamper(src: &Path, dst: &Path) {
    let mut cat: Value = serde_json::from_str(&std::fs::read_to_string(src).unwrap()).unwrap();
    let e = &mut cat["cycles"][3]["elements"][1];
    *e = Value::from(e.as_i64().unwrap() + 1);
    std::fs::write(dst, serde_json::to_string(&cat).unwrap()).unwrap();
}

#[test]
fn round_trip_and_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let found = dir.path().join("found.json");
    stdout(&[
        "search",
        "-f",
        "collatz",
        "--lo",
        "-500",
        "--hi",
        "500",
        "--catalog",
        found.to_str().unwrap(),
    ]);
    assert_eq!(code(&["verify", found.to_str().unwrap()]), 0);
    // checked against a different mapping
    assert_eq!(code(&["verify", found.to_str().unwrap(), "-f", "3x1"]), 1);

    let enumerated = dir.path().join("oracle.json");
    stdout(&[
        "oracle",
        "-f",
        "collatz",
        "--max-period",
        "12",
        "--format",
        "json",
        "-o",
        enumerated.to_str().unwrap(),
    ]);
    assert_eq!(code(&["verify", enumerated.to_str().unwrap()]), 0);
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&found).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&enumerated).unwrap()).unwrap();
    assert_eq!(a["cycles"], b["cycles"]);

    let bad = dir.path().join("tampered.json");
    tamper(&found, &bad);
    let out = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn oracle_counts() {
    let count = |fam: &str, p: &str| -> usize {
        let c = json(&["oracle", "-f", fam, "--max-period", p, "--format", "json"]);
        c["cycles"].as_array().unwrap().len()
    };
    assert_eq!(count("collatz", "5"), 7);
    assert_eq!(count("3x1", "3"), 4);
    assert_eq!(count("collatz", "0"), 0);
    assert_eq!(code(&["oracle", "-f", "collatz", "--max-period", "40"]), 2);
}

#[test]
fn lambda_and_bound() {
    let l = json(&["lambda", "-f", "perm:3", "--counts", "1,2,3", "--format", "json"]);
    assert_eq!(l["lambda"], "512/729");
    assert_eq!(l["decimal"], "0.702331961591221");
    let l = json(&["lambda", "-f", "collatz", "--k1", "31", "--k2", "22", "--format", "json"]);
    assert_eq!(l["decimal"], "0.997914046257311");

    let b = json(&["bound", "-f", "collatz", "--k1", "3", "--k2", "2", "--format", "json"]);
    assert_eq!(b["ln_c"], "2.8207519");
    let b = json(&["bound", "-f", "3x1", "--k1", "1", "--k2", "1", "--format", "json"]);
    assert_eq!(b["ln_c"], "0.3704306");
    let b = json(&[
        "bound", "-f", "matthews", "--counts", "1,1,1,1", "--constant", "1/2", "--format", "json",
    ]);
    assert_eq!(b["constant"], "1/2");
    assert_eq!(code(&["bound", "-f", "matthews", "--counts", "1,1,1,1"]), 2);
    assert_eq!(code(&["bound", "-f", "collatz", "--k1", "1", "--k2", "1", "--precision", "8"]), 2);
    assert_eq!(code(&["lambda", "-f", "matthews", "--k1", "1", "--k2", "1"]), 2);
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_gencollatz"))
        .args(["nodes", "--depth", "2"])
        .env("GENCOLLATZ_PRECISION", "32")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_gencollatz"))
        .args(["nodes", "--depth", "4", "--format", "csv"])
        .env("GENCOLLATZ_PRECISION", "96")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("5.0150589"));
}

#[test]
fn node_search() {
    let r = json(&["search-node", "-f", "collatz", "--k1", "3", "--k2", "2", "--format", "json"]);
    assert_eq!(r["c"], "16.7894693");
    let c = r["cycles"].as_array().unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0]["elements"][0], 4);
    let r = json(&["search-node", "-f", "3x1", "--k1", "7", "--k2", "4", "--format", "json"]);
    assert_eq!(r["signs"], "BySide");
    assert_eq!(r["cycles"][0]["elements"][0], -136);
}

#[test]
fn help_documents_variant_order() {
    let h = stdout(&["--help"]);
    assert!(h.contains("5: 4n-1, 2n, 4n-3"));
    assert!(h.contains("6: 4n-1, 4n-3, 2n"));
    assert_eq!(code(&["frobnicate"]), 2);
}
