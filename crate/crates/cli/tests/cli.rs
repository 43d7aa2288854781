use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const C_STAR: &str = "100000/388851";

fn gkdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkdv")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

/// Checks the top-level required keys of the matching schema variant.
fn conforms(report: &Value) {
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report-schema.json")).unwrap())
            .unwrap();
    let command = report["command"].as_str().unwrap();
    let variant = &schema["$defs"][command];
    for key in variant["required"].as_array().unwrap() {
        assert!(report.get(key.as_str().unwrap()).is_some(), "{command} report lacks {key}");
    }
    let allowed = variant["properties"].as_object().unwrap();
    for key in report.as_object().unwrap().keys() {
        assert!(allowed.contains_key(key), "{command} report has unexpected key {key}");
    }
}

#[test]
fn curve_n5_matches_speed_bounds() {
    let out = gkdv(&["curve", "--n", "5", "--grid", "200"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("h,A0,An,ratio,c0,err\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 200);
    assert!(rows.windows(2).all(|w| w[1][4] > w[0][4]));
    assert!((rows[0][4] - 0.2).abs() < 1e-3);
    assert!((rows[199][4] - 19.0 / 65.0).abs() < 1e-3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("tol_quad"));
}

#[test]
fn curve_n1_speed_range() {
    let out = gkdv(&["curve", "--n", "1", "--grid", "50"]);
    assert!(out.status.success());
    let rows = csv_rows(&stdout(&out));
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[4] > 1.0 && r[4] < 1.4));
}

#[test]
fn curve_output_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        assert!(gkdv(&["curve", "--n", "3", "--grid", "40", "--out", p.to_str().unwrap()]).status.success());
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(!ta.contains(&b'\r'));
    // 17 significant digits in every field
    let first = String::from_utf8(ta).unwrap().lines().nth(1).unwrap().to_owned();
    for field in first.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{field}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["curve", "--n", "0", "--grid", "5"],
        vec!["verify", "--n-min", "4", "--n-max", "2"],
        vec!["verify", "--n-max", "x"],
        vec!["portrait", "--n", "3"],
        vec!["portrait", "--n", "3", "--levels", ""],
        vec!["cycle", "--n", "5", "--eps", "0.1", "--c", "1/0"],
    ] {
        let out = gkdv(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn cycle_report_for_section_four() {
    let out = gkdv(&["cycle", "--n", "5", "--eps", "0.1", "--c", C_STAR, "--bracket", "0.1", "0.9"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    conforms(&report);
    let u = report["section_fixed_point_u"].as_f64().unwrap();
    assert!((u - 0.49885).abs() < 0.02);
    assert_eq!(report["stable"], Value::Bool(true));
    assert!(report["delta_h"].as_f64().unwrap().abs() < 0.02);
    assert!((report["settings"]["c"].as_f64().unwrap() - 100000.0 / 388851.0).abs() < 1e-17);
}

#[test]
fn cycle_without_fixed_point_fails() {
    let out = gkdv(&["cycle", "--n", "5", "--eps", "0.1", "--c", "5", "--bracket", "0.1", "0.9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no cycle"));
    assert!(out.stdout.is_empty());
}

#[test]
fn simulate_writes_trajectory_and_crossings() {
    let dir = tempfile::tempdir().unwrap();
    let runs = [("0.1", "inward"), ("0.49885", "near"), ("0.9", "outward")];
    let mut last = Vec::new();
    for (u0, tag) in runs {
        let path = dir.path().join(format!("{tag}.csv"));
        let out = gkdv(&[
            "simulate", "--n", "5", "--eps", "0.1", "--c", C_STAR, "--start", u0, "0", "--span", "300",
            "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let states = fs::read_to_string(&path).unwrap();
        assert!(states.starts_with("eta,u,y\n"));
        let eta: Vec<f64> = csv_rows(&states).iter().map(|r| r[0]).collect();
        assert!(eta.windows(2).all(|w| w[1] > w[0]));
        let crossings = fs::read_to_string(dir.path().join(format!("{tag}.crossings.csv"))).unwrap();
        assert!(crossings.starts_with("eta,u\n"));
        let us: Vec<f64> = csv_rows(&crossings).iter().map(|r| r[1]).collect();
        last.push(*us.last().unwrap());
        match tag {
            "inward" => assert!(us.windows(2).all(|w| w[1] > w[0])),
            "outward" => assert!(us.windows(2).all(|w| w[1] < w[0])),
            _ => assert!(us.iter().all(|u| (u - 0.495).abs() < 0.01)),
        }
    }
    assert!(last.iter().all(|u| (u - 0.4953).abs() < 1e-3), "{last:?}");
}

#[test]
fn verify_small_range_passes() {
    let out = gkdv(&["verify", "--n-max", "1", "--format", "json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    conforms(&report);
    assert_eq!(report["passed"], Value::Bool(true));
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("quadratic")));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.lines().filter(|l| l.starts_with("[PASS]")).count() == names.len());
}

#[test]
fn verify_full_range_passes() {
    let out = gkdv(&["verify", "--n-max", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("[FAIL]"));
}

#[test]
fn portrait_odd_and_even() {
    let out = gkdv(&["portrait", "--n", "3", "--levels", "-0.4,-0.2,0", "--points", "20", "--format", "json"]);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    conforms(&report);
    assert_eq!(report["curves"].as_array().unwrap().len(), 3);
    assert_eq!(report["fixed_points"].as_array().unwrap().len(), 2);

    let out = gkdv(&["portrait", "--n", "4", "--levels", "-0.5,0", "--points", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("kind,branch,h,u,y\n"));
    assert_eq!(text.lines().filter(|l| l.starts_with("center,")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.starts_with("saddle,")).count(), 1);
    // the two annuli mirror each other
    let branch = |b: &str| -> Vec<(f64, f64)> {
        text.lines()
            .filter(|l| l.starts_with(&format!("level,{b},")))
            .map(|l| {
                let f: Vec<f64> = l.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
                (f[0], f[1])
            })
            .collect()
    };
    let (right, left) = (branch("0"), branch("1"));
    assert_eq!(right.len(), left.len());
    assert!(right.iter().zip(&left).all(|(a, b)| a.0 == -b.0 && a.1 == b.1));
}

#[test]
fn portrait_rejects_energy_outside_annulus() {
    let out = gkdv(&["portrait", "--n", "3", "--levels", "-0.4,0.3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
}
