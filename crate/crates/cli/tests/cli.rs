use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use extsource::equilibrium::{reflect_potential, Potential};
use tempfile::TempDir;

const QUADRATIC: &str = r#"["0", "0", "0.5"]"#;

struct Case {
    dir: TempDir,
}

impl Case {
    fn new(config: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("config.json"), config).unwrap();
        Case { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, cmd: &str, extra: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_extsource"))
            .arg(cmd)
            .arg("--config")
            .arg(self.path("config.json"))
            .arg("--out")
            .arg(self.path("out"))
            .args(extra)
            .output()
            .unwrap()
    }

    fn ok(&self, cmd: &str, extra: &[&str]) -> Output {
        let out = self.run(cmd, extra);
        assert!(out.status.success(), "{cmd} failed: {}", String::from_utf8_lossy(&out.stderr));
        out
    }

    fn rows(&self, file: &str) -> Vec<csv::StringRecord> {
        read_rows(&self.path("out").join(file))
    }
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

fn config(potential: &str, n_list: &str, extra: &str) -> String {
    format!(r#"{{"potential": {potential}, "n_list": {n_list}{extra}}}"#)
}

#[test]
fn equilibrium_reports_the_quadratic_closed_form_and_shrinking_support() {
    let case = Case::new(&config(QUADRATIC, "[4]", r#", "t_list": ["1", "0.01"]"#));
    case.ok("equilibrium", &["--jobs", "2"]);
    let rows = case.rows("equilibrium.csv");
    assert_eq!(rows.len(), 2);
    // columns: hash, t, c0, c1, a, b, ...
    assert_eq!(&rows[0][1], "1");
    assert!((num(&rows[0][2]) - 0.5).abs() < 1e-18);
    assert!((num(&rows[0][3]) - 1.0).abs() < 1e-18);
    let width = num(&rows[1][5]) - num(&rows[1][4]);
    assert!(width > 0.0 && width < 0.5, "{width}");
    let cached = std::fs::read_dir(case.path("out/cache")).unwrap().count();
    assert_eq!(cached, 2);
}

#[test]
fn validation_failures_exit_with_code_two() {
    let case = Case::new(&config(r#"["0", "0", "-0.5", "0", "0.05"]"#, "[4]", ""));
    let out = case.run("equilibrium", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("convex"));

    let case = Case::new(&config(QUADRATIC, "[4]", ""));
    assert_eq!(case.run("equilibrium", &["--digits", "20"]).status.code(), Some(2));
    let case = Case::new(&config(QUADRATIC, "[]", ""));
    assert_eq!(case.run("equilibrium", &[]).status.code(), Some(2));
    let case = Case::new("{ not json");
    assert_eq!(case.run("equilibrium", &[]).status.code(), Some(2));
}

#[test]
fn io_failures_exit_with_code_four() {
    let case = Case::new(&config(QUADRATIC, "[4]", ""));
    let out = Command::new(env!("CARGO_BIN_EXE_extsource"))
        .args(["equilibrium", "--config"])
        .arg(case.path("missing.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    std::fs::write(case.path("blocker"), "").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_extsource"))
        .args(["equilibrium", "--config"])
        .arg(case.path("config.json"))
        .arg("--out")
        .arg(case.path("blocker"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn warm_cache_reproduces_the_csv_and_rows_carry_the_hash() {
    let case = Case::new(&config(QUADRATIC, "[6]", r#", "regime": "bulk_density""#));
    let cache = case.path("cache");
    let cache = cache.to_str().unwrap();
    case.ok("universality", &["--cache", cache]);
    let cold = std::fs::read(case.path("out/universality.csv")).unwrap();
    let systems = std::fs::read_dir(cache).unwrap().filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("system-")).count();
    assert_eq!(systems, 1);
    case.ok("universality", &["--cache", cache]);
    let warm = std::fs::read(case.path("out/universality.csv")).unwrap();
    assert_eq!(cold, warm);

    let rows = case.rows("universality.csv");
    assert_eq!(rows.len(), 9);
    let hash = rows[0][0].to_string();
    assert!(rows.iter().all(|r| r[0] == hash));
    case.ok("universality", &["--cache", cache, "--digits", "80"]);
    let rows = case.rows("universality.csv");
    assert!(rows.iter().all(|r| r[0] != hash));

    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(case.path("out/universality_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["regime"], "bulk_density");
    assert_eq!(summary["runs"][0]["points"], 9);
}

#[test]
fn edge_reference_contains_the_airy_diagonal() {
    let case = Case::new(&config(QUADRATIC, "[6]", r#", "regime": "edge_right", "grid": {"xi": ["0"], "eta": ["0", "1"]}"#));
    case.ok("universality", &[]);
    let rows = case.rows("universality.csv");
    // hash, regime, n, xi, eta, value, reference, ...
    assert_eq!(&rows[0][1], "edge_right");
    // Ai'(0)² = 0.0669874…
    assert!(rows[0][6].starts_with("6.69874"), "{}", &rows[0][6]);
}

#[test]
fn left_edge_matches_the_reflected_right_edge() {
    let n = 8;
    let grid = r#""grid": {"xi": ["0", "0.5"], "eta": ["0", "1"]}"#;
    let left = Case::new(&config(QUADRATIC, "[8]", &format!(r#", "regime": "edge_left", {grid}"#)));
    left.ok("universality", &[]);
    let r = reflect_potential(&Potential::quadratic(), n);
    let coeffs = serde_json::to_string(&r.coeff_strings()).unwrap();
    let right = Case::new(&config(&coeffs, "[8]", &format!(r#", "regime": "edge_right", {grid}"#)));
    right.ok("universality", &[]);
    let (l, r) = (left.rows("universality.csv"), right.rows("universality.csv"));
    assert_eq!(l.len(), 4);
    for (a, b) in l.iter().zip(&r) {
        assert!((num(&a[5]) - num(&b[5])).abs() < 1e-6);
    }
}

#[test]
fn literal_bulk_error_decreases_from_16_to_32() {
    let case = Case::new(&config(QUADRATIC, "[16, 32]", r#", "regime": "bulk""#));
    case.ok("universality", &[]);
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(case.path("out/universality_summary.json")).unwrap()).unwrap();
    let err = |k: usize| summary["runs"][k]["max_abs_err"].as_f64().unwrap();
    assert_eq!(summary["runs"][1]["n"], 32);
    assert!(err(1) < err(0));
}

#[test]
fn diagnostics_tables() {
    let case = Case::new(&config(QUADRATIC, "[12, 18]", r#", "regime": "bulk_density""#));
    case.ok("diagnostics", &[]);
    for row in case.rows("diagnostics_identity.csv") {
        assert!(num(&row[4]) < num(&row[5]), "{row:?}");
    }
    let e = std::f64::consts::E;
    let alpha = case.rows("diagnostics_alpha.csv");
    assert_eq!(alpha.len(), 12);
    for (row, want) in alpha.iter().zip([e, 2.0 * e, 1.5 * e]) {
        assert!((num(&row[3]) - want).abs() < 1e-15);
    }
    let dev: Vec<f64> = alpha.iter().filter(|r| &r[2] == "-1").map(|r| num(&r[5])).collect();
    assert_eq!(dev.len(), 2);
    assert!(dev[1] < dev[0] && dev[1] < 0.15 * e, "{dev:?}");
    for row in case.rows("diagnostics_split.csv") {
        assert!(num(&row[11]) < 1e-20, "{row:?}");
    }
}

#[test]
fn biortho_and_verify() {
    let case = Case::new(&config(QUADRATIC, "[6]", ""));
    case.ok("biortho", &[]);
    let rows = case.rows("biortho.csv");
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| num(&r[3]) > 0.0));
    let out = case.ok("verify", &[]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("all 5 checks passed"), "{text}");
    assert!(case.rows("verify.csv").iter().all(|r| &r[5] == "pass"));
}
