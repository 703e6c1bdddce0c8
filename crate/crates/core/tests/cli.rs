use std::path::Path;
use std::process::{Command, Output};

fn relequil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relequil"))
        .args(args)
        .env("RELEQUIL_LOG", "off")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn solve_cc_reports_lagrange_lambda() {
    let out = relequil(&["solve-cc", "--preset", "lagrange", "--ambient", "2"]);
    assert!(out.status.success());
    let lambda = json(&out)["lambda"].as_f64().unwrap();
    assert!((lambda - 3f64.powf(-1.5)).abs() < 1e-9);
}

#[test]
fn euler_preset_is_collinear() {
    let out = relequil(&["solve-cc", "--preset", "euler", "--ambient", "2", "--masses", "1,1,1"]);
    assert_eq!(json(&out)["geometry"], "collinear");
}

#[test]
fn exit_codes_follow_the_contract() {
    let bad_mass = relequil(&["solve-cc", "--preset", "lagrange", "--ambient", "2", "--masses", "1,-1,1"]);
    assert_eq!(bad_mass.status.code(), Some(1));
    let diag: serde_json::Value = serde_json::from_slice(&bad_mass.stderr).unwrap();
    assert_eq!(diag["exit_code"], 1);
    assert!(diag["error"].as_str().unwrap().contains("mass"));

    let mode = relequil(&["analyze", "--preset", "tetrahedron", "--mode", "simple4"]);
    assert_eq!(mode.status.code(), Some(1));

    let no_conv = relequil(&[
        "solve-cc",
        "--ambient",
        "2",
        "--positions",
        "[[0,0],[1,0.1],[0.3,2],[2,2.5]]",
        "--tol-max-iters",
        "1",
    ]);
    assert_eq!(no_conv.status.code(), Some(2));

    assert_eq!(relequil(&["parity-scan", "--dim", "5"]).status.code(), Some(1));
    assert!(relequil(&["integrals", "--preset", "square", "--mode", "simple4"]).status.success());
}

#[test]
fn analyze_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = relequil(&[
            "analyze",
            "--preset",
            "lagrange",
            "--ambient",
            "2",
            "--masses",
            "0.99,0.005,0.005",
            "--matrices",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["report.json", "spectrum.csv", "b3.csv", "l3.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let hash = |d: &Path| {
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("run.json")).unwrap()).unwrap();
        v["job_hash"].clone()
    };
    assert_eq!(hash(&a), hash(&b));

    let csv = std::fs::read_to_string(a.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("re,im,block"));
    let blocks: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert_eq!(blocks.len(), 12);
    assert_eq!(blocks.iter().filter(|b| **b == "E3").count(), 4);

    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["spectrally_stable"], true);
    assert_eq!(report["report"]["theorem_verdicts"]["planar-case"], "inconclusive");
}

#[test]
fn parity_scan_passes_every_positive_definite_draw() {
    let out = relequil(&["parity-scan", "--count", "1000", "--dim", "8", "--family", "positive-definite"]);
    let v = json(&out);
    assert_eq!(v["pass"], 1000);
    assert_eq!(v["curated"]["diag(-2,-1,1,-1,0,0)"], "pass");
    let generic = json(&relequil(&["parity-scan", "--count", "40", "--dim", "6", "--family", "generic"]));
    assert_eq!(generic["fail"], 0);
    assert!(generic["not_applicable"].as_u64().unwrap() > 0);
}

#[test]
fn sflow_check_battery_and_file_input() {
    let v = json(&relequil(&["sflow-check", "--paths", "100", "--pairs", "40", "--seed", "9"]));
    assert_eq!(v["path_mismatches"], 0);
    assert_eq!(v["pair_mismatches"], 0);

    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "1,0,0\n0,-2,0\n0,0,0.5\n").unwrap();
    std::fs::write(dir.path().join("c.csv"), "1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let path = |from: &str| {
        relequil(&[
            "sflow-check",
            "--base",
            dir.path().join("a.csv").to_str().unwrap(),
            "--direction",
            dir.path().join("c.csv").to_str().unwrap(),
            "--from",
            from,
            "--to",
            "3",
        ])
    };
    // Only -2 + t changes sign on [-0.25, 3], from negative to positive.
    let v = json(&path("-0.25"));
    assert_eq!(v["agree"], true);
    assert_eq!(v["endpoint_flow"], 1);
    assert_eq!(v["crossings"].as_array().unwrap().len(), 1);
    // At t = -1 the start matrix is singular.
    assert_eq!(path("-1").status.code(), Some(2));
}

#[test]
fn integrals_flag_the_coplanar_relative_equilibrium() {
    let v = json(&relequil(&["integrals", "--preset", "square", "--mode", "simple4"]));
    assert_eq!(v["independence"]["coplanar"], true);
    assert!(v["independence"]["rank"].as_u64().unwrap() < 14);
    let generic = json(&relequil(&[
        "integrals",
        "--preset",
        "lagrange",
        "--momenta",
        "[[0.1,0.2,0.3,0.4],[0.5,-0.2,0.1,0],[-0.6,0,-0.4,-0.4]]",
    ]));
    assert_eq!(generic["independence"]["rank"], 14);
}
