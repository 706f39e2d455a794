use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_fisher-dirichlet");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_record(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {:?}", o.stderr))
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(text);
    let k = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn distance_prints_a_csv_row() {
    let o = run(&["distance", "--from", "2,5", "--to", "2,2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("distance,iterations,residual\n"), "{text}");
    let d = column(&text, "distance")[0];
    assert!((d - 1.124096136691259).abs() < 1e-7, "{d}");
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let text = stdout(&run(&["metric", "--point", "0.3,1.7"]));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["i", "j", "metric", "inverse"]);
    for row in rows {
        for cell in &row[2..] {
            let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{cell}");
        }
    }
}

#[test]
fn connect_writes_the_path_and_the_densities() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("connect");
    let o = run(&[
        "connect",
        "--family",
        "trigamma",
        "--from",
        "2,5",
        "--to",
        "2,2",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let path = std::fs::read_to_string(out.join("connect.csv")).unwrap();
    let (header, rows) = csv_rows(&path);
    assert_eq!(header, ["t", "x1", "x2", "v1", "v2", "energy"]);
    assert_eq!(rows.len(), 101);
    let (x1, x2) = (column(&path, "x1"), column(&path, "x2"));
    assert!((x1[0] - 2.0).abs() < 1e-15 && (x2[0] - 5.0).abs() < 1e-15);
    assert!((x1[100] - 2.0).abs() < 1e-7 && (x2[100] - 2.0).abs() < 1e-7);
    let energy = column(&path, "energy");
    assert!(energy.iter().all(|e| (e - energy[0]).abs() < 1e-8 * energy[0]));

    let densities = std::fs::read_to_string(out.join("connect-densities.csv")).unwrap();
    let (header, rows) = csv_rows(&densities);
    assert_eq!(header, ["s", "t=0", "t=0.25", "t=0.5", "t=0.75", "t=1"]);
    assert!(!rows.is_empty());
    let svg = std::fs::read_to_string(out.join("connect-densities.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 5);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(out.join("connect.json")).unwrap()).unwrap();
    assert!(summary["distance"].as_f64().unwrap() > 0.0);
}

#[test]
fn svg_format_prints_the_first_figure() {
    let o = run(&["connect", "--from", "2,5", "--to", "2,2", "--format", "svg"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("<svg"));
    let o = run(&["distance", "--from", "2,5", "--to", "2,2", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mean_reports_both_means() {
    let o = run(&["mean", "--points", "2,5;2,2", "--points", "5,1", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let mean: Vec<f64> = serde_json::from_value(v["summary"]["mean"].clone()).unwrap();
    assert!(
        (mean[0] - 1.6148571725).abs() < 1e-7 && (mean[1] - 1.4135876065).abs() < 1e-7,
        "{mean:?}"
    );
    assert_eq!(v["summary"]["euclidean-mean"][0], 3.0);
    assert!(v["summary"]["objective"].as_f64() < v["summary"]["euclidean-objective"].as_f64());
    assert!(v["tables"]["mean-densities"]["rows"].as_array().unwrap().len() > 100);
}

#[test]
fn curvature_grid_respects_the_lower_bound() {
    let o = run(&[
        "curvature-grid",
        "--family",
        "trigamma",
        "--range",
        "1e-3:1e3",
        "--res",
        "200",
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let min = v["summary"]["min"].as_f64().unwrap();
    assert!(min >= -0.5 - 1e-3, "{min}");
    assert_eq!(v["summary"]["lower-bound-holds"], true);
    assert_eq!(
        v["tables"]["curvature-grid"]["rows"].as_array().unwrap().len(),
        200 * 200
    );
    assert_eq!(v["summary"]["range"], serde_json::json!([1e-3, 1e3]));
}

#[test]
fn validate_passes() {
    let o = run(&["validate"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(!text.contains("FAIL"), "{text}");
    assert!(text.contains(" 0 failed"), "{text}");
    let o = run(&["validate", "--family", "rational", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn figures_dump_their_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["figures", "--res", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("figures");
    for stem in [
        "fig2-balls",
        "fig2-curvature",
        "fig3-geodesic",
        "fig3-mean",
        "fig4-difference",
    ] {
        assert!(out.join(format!("{stem}.csv")).exists(), "{stem}.csv");
        assert!(out.join(format!("{stem}.svg")).exists(), "{stem}.svg");
    }
    let difference = std::fs::read_to_string(out.join("fig4-difference.csv")).unwrap();
    let values = column(&difference, "difference");
    assert_eq!(values.len(), 400);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(min < 0.0 && max > 0.0, "{min} {max}");

    let balls = std::fs::read_to_string(out.join("fig2-balls.csv")).unwrap();
    assert_eq!(csv_rows(&balls).1.len(), 3 * 2 * 96);
}

#[test]
fn figure_ball_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "figures",
        "--centers",
        "1,2",
        "--radii",
        "0.25",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let balls = std::fs::read_to_string(dir.path().join("fig2-balls.csv")).unwrap();
    assert_eq!(column(&balls, "radius"), vec![0.25; 96]);
    let o = run(&["figures", "--centers", "1,2,3", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = run(&["figures", "--res", "16", "-o", dir.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 11);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
    }
    let v1 = stdout(&run(&["validate", "--format", "json"]));
    let v2 = stdout(&run(&["validate", "--format", "json"]));
    assert_eq!(v1, v2);
}

#[test]
fn worker_count_does_not_change_the_output() {
    let args = ["curvature-grid", "--range", "0.01:10", "--res", "40"];
    let one = Command::new(BIN)
        .env("FISHER_DIRICHLET_WORKERS", "1")
        .args(args)
        .output()
        .unwrap();
    let four = Command::new(BIN)
        .env("FISHER_DIRICHLET_WORKERS", "4")
        .args(args)
        .output()
        .unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(BIN)
        .env("FISHER_DIRICHLET_WORKERS", "zero")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_record(&bad)["error"]["kind"], "usage");
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.json");
    std::fs::write(
        &file,
        r#"{"command": "distance", "from": [2, 5], "to": [5, 1], "family": "rational"}"#,
    )
    .unwrap();
    let from_file = column(&stdout(&run(&["--config", file.to_str().unwrap()])), "distance")[0];
    let overridden = column(
        &stdout(&run(&["--config", file.to_str().unwrap(), "--to", "2,2"])),
        "distance",
    )[0];
    assert!((overridden - 1.129159823107678).abs() < 1e-7, "{overridden}");
    assert!((from_file - overridden).abs() > 0.1);

    std::fs::write(&file, r#"{"command": "distance", "frm": [2, 5]}"#).unwrap();
    let o = run(&["--config", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_record(&o)["error"]["message"].as_str().unwrap().contains("frm"));
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["plot"][..],
        &[][..],
        &["geodesic", "--point", "1,1"][..],
        &["metric", "--point", "1,-1"][..],
        &["metric", "--point", "1,2", "--dimension", "3"][..],
        &["curvature-grid", "--range", "5:1"][..],
        &["mean", "--points", "1,2;3"][..],
        &["distance", "--from", "1,x", "--to", "1,1"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let record = error_record(&o);
        assert_eq!(record["error"]["kind"], "usage", "{args:?}");
        assert_eq!(record["error"]["exit-code"], 2);
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn numerical_failures_exit_with_three() {
    // The diagonal launch toward the origin decays like e^{-t} and crosses the escape guard.
    let o = run(&["geodesic", "--point", "1,1", "--velocity", "-1,-1", "--time", "60"]);
    assert_eq!(o.status.code(), Some(3));
    let record = error_record(&o);
    assert_eq!(record["error"]["kind"], "numerical");
    assert!(record["error"]["detail"]["time"].as_f64().unwrap() > 1.0);
    assert!(record["error"]["detail"]["last-point"].is_array());

    // An unreachable tolerance exhausts the iteration budget.
    let o = run(&[
        "distance",
        "--from",
        "1,1",
        "--to",
        "1e-3,50",
        "--tol",
        "1e-30",
        "--max-iterations",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let record = error_record(&o);
    assert_eq!(record["error"]["detail"]["iterations"], 3, "{record}");
    assert!(record["error"]["detail"]["trace"].is_array());
}

#[test]
fn help_succeeds() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("FISHER_DIRICHLET_WORKERS"));
}
