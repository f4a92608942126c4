use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geodesic-bench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn checks_exit_zero() {
    let out = bench(&["checks"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("0 failed"));
}

#[test]
fn small_bradley_terry_table() {
    let out = bench(&["bradley-terry", "--format", "md"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("| mm"));
    assert!(text.contains("1468"));
    assert!(text.contains("overflow"));
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["categorical-kl", "--trials", "0"][..],
        &["categorical-kl", "--lambda", "1"],
        &["vi-mlr", "--triple", "10,3"],
        &["bradley-terry", "--lr", "-1"],
        &["mixture-mle", "--data", "/nonexistent/components.json"],
        &["generate", "--triple", "2,3,5"],
    ] {
        let out = bench(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    assert_eq!(bench(&["nope"]).status.code(), Some(2));
}

#[test]
fn writes_to_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kl.csv");
    let out = bench(&[
        "categorical-kl",
        "--trials",
        "5",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# experiment=categorical-kl"));
    assert!(text.contains("# seed=3"));
    assert!(text.contains("method,cell,statistic,mean,std,n,note"));
}

#[test]
fn generated_dataset_feeds_vi() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let made = bench(&[
        "generate",
        "--triple",
        "40,3,2",
        "--seed",
        "5",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert_eq!(made.status.code(), Some(0));
    let header = std::fs::read_to_string(&data)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_owned();
    assert_eq!(header, "x1,x2,x3,y1,y2");
    let out = bench(&[
        "vi-mlr",
        "--data",
        data.to_str().unwrap(),
        "--trials",
        "2",
        "--K",
        "20",
        "--lr",
        "1",
        "--lambda",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("e-geodesic,lambda=1 lr=1,test_accuracy"));
}

#[test]
fn bradley_terry_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wins.csv");
    std::fs::write(&path, "i,j,x_ij,x_ji\n0,1,3,1\n0,2,2,2\n1,2,1,3\n").unwrap();
    let out = bench(&["bradley-terry", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("data.players=3"));
}
