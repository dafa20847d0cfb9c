use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const STRIP: &str = r#"{
  "kernel": { "rho": 1.0, "a": 3.0, "rho1": 0.5 },
  "points": [[0.0, 1.5707963267948966], [1.0, 0.7853981633974483], [-2.0, 2.0]],
  "traces": {
    "lower": { "source": "strip_mode:n=1,A=1" },
    "upper": { "source": "strip_mode:n=1,A=1" }
  }
}"#;

fn carleman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carleman")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Data rows split into fields, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn kernel_eval_empty_points_gives_header_only() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    for body in ["", "y1,y2,x1,x2\n"] {
        let pts = write(dir.path(), "p.csv", body);
        let out = stdout(&carleman(&["kernel-eval", "--config", s(&cfg), "--points", s(&pts)]));
        assert_eq!(out, "y1,y2,x1,x2,phi,error_estimate,status\n");
    }
}

#[test]
fn kernel_eval_far_field_and_singular_rows() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let pts = write(dir.path(), "p.csv", "y1,y2,x1,x2\n30,1.5,0,1.5\n0,1,0,1\n0.5,1,0,2\n");
    let out = stdout(&carleman(&["kernel-eval", "--config", s(&cfg), "--points", s(&pts)]));
    let r = rows(&out);
    assert_eq!(r.len(), 3);
    assert!(f(&r[0][4]).abs() < 1e-30, "{:?}", r[0]);
    assert_eq!(r[0][6], "ok");
    assert_eq!(&r[1][4..], ["", "", "singular"]);
    assert_eq!(r[2][6], "ok");
    assert!(f(&r[2][4]) > 0.0);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let body: String = std::iter::once("y1,y2,x1,x2\n".to_string())
        .chain((0..40).map(|i| format!("{},{},0,1\n", -4.0 + 0.2 * i as f64, 0.3 + 0.06 * i as f64)))
        .collect();
    let pts = write(dir.path(), "p.csv", &body);
    let run = || carleman(&["kernel-eval", "--config", s(&cfg), "--points", s(&pts)]).stdout;
    assert_eq!(run(), run());
    let rec = || carleman(&["reconstruct", "--config", s(&cfg)]).stdout;
    assert_eq!(rec(), rec());
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let out = dir.path().join("r.csv");
    assert!(stdout(&carleman(&["reconstruct", "--config", s(&cfg), "--out", s(&out)])).is_empty());
    assert_eq!(rows(&fs::read_to_string(&out).unwrap()).len(), 3);
}

#[test]
fn rho1_not_below_rho_rejected_at_load() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{ "kernel": { "rho": 1.0, "rho1": 1.0 } }"#);
    let o = carleman(&["verify", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kernel.rho1"), "{}", stderr(&o));
}

#[test]
fn strip_mode_reconstruction_matches_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let r = rows(&stdout(&carleman(&["reconstruct", "--config", s(&cfg)])));
    assert_eq!(r.len(), 3);
    for row in &r {
        let (x1, x2) = (f(&row[0]), f(&row[1]));
        let exact = x2.sin() * x1.exp();
        let (value, i1, i2, err) = (f(&row[2]), f(&row[3]), f(&row[4]), f(&row[6]));
        assert!((value - exact).abs() <= err, "{row:?} vs {exact}");
        assert!((value + i1 + i2).abs() <= 1e-14 * exact.abs().max(1.0));
        assert_eq!(&row[7..], ["inside", "ok"]);
    }
}

#[test]
fn zero_traces_give_zeros() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{ "kernel": { "rho": 1.0 }, "points": [[0.0, 1.0], [3.0, 2.5]],
             "traces": { "lower": { "source": "zero" }, "upper": { "source": "zero" } } }"#,
    );
    for row in rows(&stdout(&carleman(&["reconstruct", "--config", s(&cfg)]))) {
        assert_eq!(&row[2..5], ["0e0", "0e0", "0e0"], "{row:?}");
    }
}

#[test]
fn reconstruct_points_file_and_row_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let pts = write(dir.path(), "p.csv", "x1,x2\n0,1\n0,-1\n");
    let o = carleman(&["reconstruct", "--config", s(&cfg), "--points", s(&pts)]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][8], "ok");
    assert_eq!(&r[1][7..], ["outside", "classification"]);
    assert!(stderr(&o).contains("row 2"));
}

#[test]
fn uncovered_table_reports_required_radius() {
    let dir = TempDir::new().unwrap();
    let table: String = std::iter::once("y1,value\n".to_string())
        .chain((0..=20).map(|i| {
            let t = -5.0 + 0.5 * i as f64;
            format!("{t},{}\n", -t.exp())
        }))
        .collect();
    write(dir.path(), "lower.csv", &table);
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{ "kernel": { "rho": 1.0 }, "points": [[0.0, 1.0]],
             "traces": { "lower": { "source": "table:lower.csv", "growth_rate": 1.0 },
                         "upper": { "source": "strip_mode:n=1,A=1" } } }"#,
    );
    let o = carleman(&["reconstruct", "--config", s(&cfg)]);
    let r = rows(&stdout(&o));
    assert_eq!(r[0][8], "coverage");
    let msg = stderr(&o);
    assert!(msg.contains("coverage") && msg.contains("is required"), "{msg}");
}

#[test]
fn decay_report_for_admissible_growth() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{ "kernel": { "rho": 1.0 },
             "traces": { "lower": { "source": "exp_growth:amplitude=1,c=0.3" },
                         "upper": { "source": "exp_growth:amplitude=1,c=0.3" } } }"#,
    );
    let out = stdout(&carleman(&["decay-report", "--config", s(&cfg)]));
    assert!(out.starts_with("R,ratio\n"));
    let r = rows(&out);
    let radii: Vec<f64> = r.iter().map(|row| f(&row[0])).collect();
    assert_eq!(radii, [2.0, 4.0, 6.0, 8.0]);
    let ratios: Vec<f64> = r.iter().map(|row| f(&row[1])).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn malformed_points_give_line_numbered_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let pts = write(dir.path(), "p.csv", "y1,y2,x1,x2\n0,1,0,2\n0,1,zero,2\n");
    let o = carleman(&["kernel-eval", "--config", s(&cfg), "--points", s(&pts)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn io_and_config_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(carleman(&["verify", "--config", s(&missing)]).status.code(), Some(3));
    let bad = write(dir.path(), "bad.json", "{ kernel: 1 }");
    assert_eq!(carleman(&["verify", "--config", s(&bad)]).status.code(), Some(2));
    let cfg = write(dir.path(), "c.json", STRIP);
    assert_eq!(carleman(&["reconstruct", "--config", s(&cfg), "--tol", "0"]).status.code(), Some(2));
    let no_traces = write(dir.path(), "n.json", r#"{ "kernel": { "rho": 1.0 }, "points": [[0, 1]] }"#);
    let o = carleman(&["reconstruct", "--config", s(&no_traces)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("traces"));
}

#[test]
fn tol_flag_loosens_quadrature() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", STRIP);
    let loose = rows(&stdout(&carleman(&["reconstruct", "--config", s(&cfg), "--tol", "1e-2"])));
    let tight = rows(&stdout(&carleman(&["reconstruct", "--config", s(&cfg)])));
    for (l, t) in loose.iter().zip(&tight) {
        let exact = f(&t[1]).sin() * f(&t[0]).exp();
        assert!((f(&l[2]) - exact).abs() <= f(&l[6]).max(1e-2 * exact.abs()));
    }
    assert!(loose.iter().zip(&tight).any(|(l, t)| l[2] != t[2]));
}

#[test]
fn verify_default_config_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{ "kernel": { "rho": 1.0 } }"#);
    let csv = dir.path().join("v.csv");
    let o = carleman(&["verify", "--config", s(&cfg), "--out", s(&csv)]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6, "{text}");
    let table = fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("suite,passed,measured,threshold,margin,detail\n"));
    assert_eq!(table.lines().count(), 7);
}
