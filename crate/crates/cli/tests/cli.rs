use serde_json::Value;
use std::process::{Command, Output};

fn kq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kq")).args(args).output().expect("kq runs")
}

fn json_line(o: &Output) -> Value {
    let s = String::from_utf8(o.stdout.clone()).unwrap();
    serde_json::from_str(s.lines().next().expect("one line")).unwrap()
}

#[test]
fn unique_point_at_three_eighths() {
    let o = kq(&["slice", "--q", "5/3", "--y", "3/8", "--depth", "48"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["claim"]["type"], "ExactlyN");
    assert_eq!(v["claim"]["n"], 1);
    assert_eq!(v["claim"]["certified"], true);
    assert_eq!(v["cylinders"].as_array().unwrap().len(), 1);
}

#[test]
fn oracle_agrees_on_the_same_slice() {
    let o = kq(&["slice", "--q", "5/3", "--y", "3/8", "--depth", "30", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["oracle"]["depth"], 12);
    assert_eq!(v["oracle"]["agrees"], true);
}

#[test]
fn five_orbits_for_second_point() {
    let o = kq(&["bonacci", "verify", "--k", "3", "--m", "2", "--delta", "(01)*", "--depth", "60"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["orbits"], 5);
    assert_eq!(v["check"], true);
}

#[test]
fn base_two_is_rejected() {
    let o = kq(&["slice", "--q", "2", "--y", "1/2", "--depth", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err: Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "input");
}

#[test]
fn usage_errors_are_json() {
    let o = kq(&["slice", "--q", "5/3"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(o.stderr.trim_ascii()).unwrap();
    assert_eq!(err["error"], "usage");
    assert_eq!(kq(&["--help"]).status.code(), Some(0));
    assert_eq!(kq(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn malformed_delta_is_an_input_error() {
    let o = kq(&["bonacci", "verify", "--k", "3", "--m", "1", "--delta", "(01", "--depth", "30"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    for args in [
        &["slice", "--q", "5/3", "--y", "3/8", "--depth", "48"][..],
        &["orbit-tree", "--q", "3/2", "--y", "1/2", "--depth", "6"][..],
        &["render", "--q", "5/3", "--iterations", "4", "--y", "3/8"][..],
    ] {
        let a = kq(args);
        let b = kq(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn render_marks_one_point_on_the_slice_line() {
    let o = kq(&["render", "--q", "5/3", "--iterations", "1", "--y", "3/8"]);
    assert_eq!(o.status.code(), Some(0));
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.contains("points=\"0.000,600.000 200.000,240.000 400.000,360.000 600.000,0.000\""));
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("stroke=\"red\"").count(), 1);
}

#[test]
fn render_writes_file_and_reports_marks() {
    let path = std::env::temp_dir().join(format!("kq-render-{}.svg", std::process::id()));
    let p = path.to_str().unwrap();
    let o = kq(&["render", "--q", "5/3", "--iterations", "20", "--y", "3/8", "--svg", p]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["resolution"], 12);
    assert_eq!(v["marks"].as_array().unwrap().len(), 1);
    let svg = std::fs::read_to_string(&path).unwrap();
    let _ = std::fs::remove_file(&path);
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    assert_eq!(line.matches(',').count(), 3usize.pow(12) + 1);
}

#[test]
fn emitted_certificates_recheck() {
    let o = kq(&["bonacci", "null-infinite", "--k", "3", "--depth", "20"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["check"], true);
    let cert = kq_core::certificate::Certificate::from_json(&v["certificate"].to_string()).unwrap();
    assert!(kq_core::certificate::check(&cert).is_ok());
}

#[test]
fn dimension_numbers_are_intervals() {
    let o = kq(&["dimension", "--q", "3/2", "--y", "1/2", "--method", "box", "--levels", "12"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    let b = v["box_estimate"].as_array().unwrap();
    let lo: f64 = b[0].as_str().unwrap().parse().unwrap();
    let hi: f64 = b[1].as_str().unwrap().parse().unwrap();
    assert!(lo < hi && hi - lo < 1e-5);
    assert!(v["s_lower"].is_null());
}

#[test]
fn thickness_of_sk9() {
    let o = kq(&["thickness", "--q", "1.999", "--set", "sk:9", "--level", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json_line(&o);
    assert_eq!(v["set"], "sk:9");
    let tau: f64 = v["thickness_lower_bound"].as_str().unwrap().parse().unwrap();
    assert!(tau > 1.999f64.powi(6));
}

#[test]
fn worker_count_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_kq"))
        .args(["slice", "--q", "5/3", "--y", "3/8", "--depth", "8"])
        .env("KQ_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let o = Command::new(env!("CARGO_BIN_EXE_kq"))
        .args(["slice", "--q", "5/3", "--y", "3/8", "--depth", "8"])
        .env("KQ_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}
