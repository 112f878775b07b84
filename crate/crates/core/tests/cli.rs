use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tf_corner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tf-corner"))
        .args(args)
        .env_remove("TF_CORNER_JOBS")
        .output()
        .expect("binary runs")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn painleve_writes_profile_table_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = tf_corner(&[
        "painleve", "--p", "2", "--xmin", "-30", "--xmax", "15", "--n", "4000", "--out", out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("hm.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("x,v,vx"));
    assert_eq!(csv.lines().count(), 4001);
    let svg = fs::read_to_string(dir.path().join("hm.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn verify_report_carries_the_lambda_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = tf_corner(&[
        "verify",
        "--trap",
        "harmonic",
        "--aniso",
        "1.0",
        "--eps",
        "0.05,0.02,0.01",
        "--out",
        out,
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["anchor"] == "λ_ε − λ₀ = O(|ln ε|ε²)"));
    assert!(dir.path().join("report.csv").exists());
}

#[test]
fn configuration_errors_exit_with_two() {
    let o = tf_corner(&["ground", "--trap", "nosuch"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trap"));

    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = tf_corner(&[
        "plot",
        empty.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "trap = harmonic\ncolour = blue\n").unwrap();
    let o = tf_corner(&["trap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn rate_plot_uses_log_axes_with_fit() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rate_demo.csv");
    fs::write(&csv, "eps,err\n0.1,0.01\n0.05,0.0025\n0.02,0.0004\n").unwrap();
    let o = tf_corner(&[
        "plot",
        csv.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let svg = fs::read_to_string(dir.path().join("rate_demo.svg")).unwrap();
    assert!(svg.contains("slope"));
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for cmd in ["trap", "ground"] {
        for d in [&a, &b] {
            let o = tf_corner(&[
                cmd,
                "--trap",
                "harmonic",
                "--eps",
                "0.05,0.03",
                "--out",
                d.path().to_str().unwrap(),
            ]);
            assert_eq!(
                o.status.code(),
                Some(0),
                "{}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(!fa.is_empty());
    assert_eq!(fa, fb);
}
