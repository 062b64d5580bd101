use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tdabc::datasets::make_gaussian_classes;

fn tdabc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdabc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("TDABC_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn macro_rows(records: &str) -> usize {
    records.lines().filter(|l| l.split(',').nth(3) == Some("macro")).count()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_sphere_writes_653_rows_and_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(&["generate", "--dataset", "sphere", "--seed", "7"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("sphere.csv")).unwrap();
    assert_eq!(csv.lines().count(), 654);
    assert!(csv.starts_with("x0,x1,x2,label\n"));
    let spec: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("sphere.spec.json")).unwrap()).unwrap();
    assert_eq!(spec["kind"], "sphere");
}

#[test]
fn generate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(tdabc(&["generate", "--dataset", "moons", "--seed", "5"], d.path())
            .status
            .success());
    }
    for file in ["moons.csv", "moons.spec.json"] {
        assert_eq!(
            std::fs::read(a.path().join(file)).unwrap(),
            std::fs::read(b.path().join(file)).unwrap()
        );
    }
}

#[test]
fn unknown_dataset_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(&["generate", "--dataset", "mnist"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown dataset `mnist`"));
}

#[test]
fn single_point_has_one_immortal_bar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("one.csv");
    std::fs::write(&input, "x,y\n0.5,0.5\n").unwrap();
    let o = tdabc(&["persistence", "--input", input.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let diagram = std::fs::read_to_string(dir.path().join("one.diagram.csv")).unwrap();
    assert_eq!(diagram, "dim,birth,death\n0,0,inf\n");
}

#[test]
fn unit_square_matches_golden_diagram() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("unit_square.csv");
    let o = tdabc(
        &[
            "persistence",
            "--input",
            input.to_str().unwrap(),
            "--max-dim",
            "2",
            "--max-edge",
            "inf",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let got = std::fs::read_to_string(dir.path().join("unit_square.diagram.csv")).unwrap();
    let want = std::fs::read_to_string(fixture("unit_square.diagram.csv")).unwrap();
    assert_eq!(got, want);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("unit_square.diagram.json")).unwrap()).unwrap();
    assert_eq!(json["intervals"].as_array().unwrap().len(), want.lines().count() - 1);
    assert!(dir.path().join("unit_square.barcode.csv").exists());
}

#[test]
fn circles_diagram_has_a_dominant_loop() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(&["persistence", "--dataset", "circles", "--max-dim", "2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("circles.barcode.csv")).unwrap();
    let mut h1: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|f| f[1] == "1")
        .map(|f| f[3].parse::<f64>().unwrap() - f[2].parse::<f64>().unwrap())
        .collect();
    h1.sort_by(|a, b| b.total_cmp(a));
    assert!(h1.len() >= 3);
    assert!(h1[0] > 2.0 * h1[2]);
}

#[test]
fn classify_separable_blobs_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let blobs = make_gaussian_classes(2, &[20, 20], &[0.0, 5.0], 0.3, 1).unwrap();
    let input = dir.path().join("blobs.csv");
    blobs.write_csv(std::fs::File::create(&input).unwrap()).unwrap();
    let o = tdabc(
        &["classify", "--input", input.to_str().unwrap(), "--seed", "3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("8/8 test points correct"));

    let csv = std::fs::read_to_string(dir.path().join("blobs.predictions.csv")).unwrap();
    assert!(csv.starts_with("vertex,predicted,provenance,p_class0,p_class1\n"));
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let v: usize = f[0].parse().unwrap();
        assert_eq!(f[1].parse::<usize>().unwrap(), blobs.labels[v]);
    }
    assert!(dir.path().join("blobs.predictions.json").exists());
}

#[test]
fn classify_with_random_selector_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = tdabc(
            &[
                "classify",
                "--dataset",
                "moons",
                "--selector",
                "rand",
                "--seed",
                "3",
                "--max-dim",
                "2",
            ],
            d.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(
        std::fs::read(a.path().join("moons.predictions.csv")).unwrap(),
        std::fs::read(b.path().join("moons.predictions.csv")).unwrap()
    );
}

#[test]
fn explicit_test_indices_are_used() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(
        &[
            "classify",
            "--dataset",
            "iris",
            "--max-dim",
            "2",
            "--test-indices",
            "0,60,120",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("iris.predictions.csv")).unwrap();
    let vertices: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(vertices, ["0", "60", "120"]);
}

#[test]
fn missing_file_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let o = tdabc(&["classify", "--input", missing.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("absent.csv"), "{err}");
    assert!(err.contains("No such file"), "{err}");
}

#[test]
fn evaluate_writes_reports_for_all_classifiers() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(
        &[
            "evaluate",
            "--dataset",
            "iris",
            "--folds",
            "3",
            "--repeats",
            "1",
            "--max-dim",
            "2",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = std::fs::read_to_string(dir.path().join("iris.summary.csv")).unwrap();
    for name in ["TDABC-A", "TDABC-M", "TDABC-R", "KNN", "WKNN"] {
        assert!(
            summary.lines().any(|l| l.starts_with(&format!("{name},macro,f1,"))),
            "{name}"
        );
    }
    let records = std::fs::read_to_string(dir.path().join("iris.records.csv")).unwrap();
    assert_eq!(macro_rows(&records), 3 * 5);
    assert!(dir.path().join("iris.summary.json").exists());
}

#[test]
fn evaluate_rejects_an_empty_plan() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(&["evaluate", "--dataset", "iris", "--folds", "0"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("invalid configuration"), "{}", stderr(&o));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"dataset": "iris", "rips": {"max_dim": 2}, "plan": {"folds": 4, "repeats": 1}, "classifiers": ["KNN"]}"#,
    )
    .unwrap();
    let o = tdabc(
        &["--config", config.to_str().unwrap(), "evaluate", "--folds", "3"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let records = std::fs::read_to_string(dir.path().join("iris.records.csv")).unwrap();
    assert_eq!(macro_rows(&records), 3);
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_tdabc"))
        .args(["generate", "--dataset", "circles"])
        .env("TDABC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("circles.csv").exists());
}

#[test]
fn ramp_subset_writes_long_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = tdabc(
        &[
            "evaluate",
            "--ramp",
            "--steps",
            "1,2",
            "--folds",
            "3",
            "--repeats",
            "1",
            "--max-dim",
            "2",
            "--classifiers",
            "TDABC-M,KNN",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let long = std::fs::read_to_string(dir.path().join("ramp.long.csv")).unwrap();
    let minority_f1: Vec<&str> = long.lines().filter(|l| l.contains(",TDABC-M,minority,f1,")).collect();
    assert_eq!(minority_f1.len(), 2);
    assert!(dir.path().join("ramp01.summary.csv").exists());
}
