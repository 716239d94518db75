use std::process::Command;

use kness_cli::{build_matrix, parse_matrix, InputError};
use kness_core::matrix::{ComplexMatrix, C64};
use kness_core::Tolerances;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn kness() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kness"))
}

#[test]
fn shorthand_examples() {
    assert_eq!(parse_matrix("diag:2,0,-2", &tol()).unwrap(), ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]));
    let e3 = parse_matrix("e:3", &tol()).unwrap();
    assert_eq!(e3.get(0, 1), C64::new(2f64.sqrt(), 0.0));
    assert_eq!(e3.get(1, 2), C64::new(2f64.sqrt(), 0.0));
    let err = parse_matrix("diag:1,1,-1", &tol()).unwrap_err();
    assert!(matches!(err, InputError::NotTraceFree { .. }));
    assert_eq!(err.to_string(), "matrix is not trace-free: trace = 1");

    let j = parse_matrix("jordan:2@1,1@-2", &tol()).unwrap();
    let want = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 0.0, -2.0]]);
    assert_eq!(j, want.unwrap());
    let s = parse_matrix("std:3,1:1,0,0", &tol()).unwrap();
    assert_eq!(s.dim(), 4);
    assert_eq!(parse_matrix("x:3", &tol()).unwrap(), ComplexMatrix::real_diag(&[2.0, 0.0, -2.0]));
    assert_eq!(parse_matrix("diag:1,i,-1-i", &tol()).unwrap().get(1, 1), C64::new(0.0, 1.0));

    for bad in ["diag:1", "e:1", "std:3:1,2", "jordan:2", "nosuchfile.json", "{\"n\":2}"] {
        assert!(build_matrix(bad).is_err(), "{bad}");
    }
}

#[test]
fn json_round_trip() {
    for spec in ["diag:2,0,-2", "diag:1,i,-1-i", "e:4", "x:5", "std:3,1:1,0.5i,-2", "std:2,2:1+i,0,0", "jordan:2@1,1@-2"] {
        let a = parse_matrix(spec, &tol()).unwrap();
        let back = parse_matrix(&a.to_json(), &tol()).unwrap();
        assert_eq!(a, back, "{spec}");
        assert_eq!(back.to_json(), a.to_json());
    }
}

#[test]
fn json_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, parse_matrix("e:3", &tol()).unwrap().to_json()).unwrap();
    assert_eq!(parse_matrix(path.to_str().unwrap(), &tol()).unwrap(), parse_matrix("e:3", &tol()).unwrap());
}

fn json_out(args: &[&str]) -> serde_json::Value {
    let out = kness().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn subcommands() {
    let k = json_out(&["k", "e:2"]);
    assert_eq!(k["result"]["k_value"], 2.0);
    assert_eq!(k["manifest"]["command"], "k");

    let c = json_out(&["classify", "diag:2,0,-2"]);
    assert_eq!(c["result"]["classification"]["case_id"], 2);
    assert_eq!(c["result"]["classification"]["infimum"]["exact"], "1/2");

    let p = json_out(&["partition", "4", "--compare", "3,1"]);
    assert_eq!(p["result"]["c_exact"], "1/5");
    assert_eq!(p["result"]["compare"]["dominance"], "greater");

    let s = json_out(&["spectral", "jordan:2@1,1@-2"]);
    assert_eq!(s["result"]["profile"]["diagonalizable"], false);
    assert_eq!(s["result"]["profile"]["invariant_partition"], serde_json::json!([3]));

    let r = json_out(&["residual", "e:3"]);
    assert!(r["result"]["critical_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(r["result"]["ness"]["satisfied"], true);

    let bad = kness().args(["k", "diag:1,1,-1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("trace = 1"));
}

#[test]
fn reruns_match_except_timestamp() {
    let args = ["minimize", "e:3", "--restarts", "3", "--thin", "10", "--seed", "7"];
    let mut a = json_out(&args);
    let mut b = json_out(&args);
    for v in [&mut a, &mut b] {
        v["manifest"]["timestamp"] = serde_json::Value::Null;
    }
    assert_eq!(a, b);
    assert_eq!(a["manifest"]["seed"], 7);
    assert!((a["result"]["report"]["best_k"].as_f64().unwrap() - 0.5).abs() < 1e-3);
}

#[test]
fn verify_exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = kness().args(["verify", "--only", "1,8"]).env("KNESS_OUT_DIR", dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["result"]["failed"], serde_json::json!([]));

    let constants = std::fs::read_to_string(dir.path().join("constants.csv")).unwrap();
    assert!(constants.lines().any(|l| l == "3,(3),1/2,0.5"), "{constants}");
    let fixtures = std::fs::read_to_string(dir.path().join("fixtures.csv")).unwrap();
    assert!(fixtures.contains("diag(2,0,-2): case 2, inf 0.5, extra 2.0"));
    assert!(fixtures.contains("diag(3,-1,-2): case 5, inf 0.071428"));
    let criteria = std::fs::read_to_string(dir.path().join("criteria.csv")).unwrap();
    assert_eq!(criteria.lines().count(), 3);

    let fail = kness()
        .args(["verify", "--only", "5", "--max-iters", "1", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(fail.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(report["result"]["failed"], serde_json::json!([5]));
    assert!(String::from_utf8_lossy(&fail.stderr).contains("FAIL criterion  5"));
}
