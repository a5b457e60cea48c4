use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use invset::synthesis::maximal_set_contains_within;
use serde_json::Value;

fn invset(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_invset")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn synthesize_ellipsoid(dir: &Path) -> PathBuf {
    let result = dir.join("ellipsoid.json");
    let out = invset(&[
        "synthesize",
        "--config",
        config("ellipsoid.json").to_str().unwrap(),
        "--out",
        result.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}{}", text(&out.stdout), text(&out.stderr));
    result
}

#[test]
fn verify_flags_an_inflated_ellipsoid() {
    let dir = tempfile::tempdir().unwrap();
    let result = synthesize_ellipsoid(dir.path());
    let out = invset(&["verify", "--result", result.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", text(&out.stdout));

    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    for row in file["template"]["Q"].as_array_mut().unwrap() {
        for x in row.as_array_mut().unwrap() {
            *x = Value::from(x.as_f64().unwrap() * 1.5);
        }
    }
    let inflated = dir.path().join("inflated.json");
    std::fs::write(&inflated, serde_json::to_string_pretty(&file).unwrap()).unwrap();
    let out = invset(&["verify", "--result", inflated.to_str().unwrap()]);
    let stdout = text(&out.stdout);
    assert_eq!(code(&out), 3, "{stdout}");
    let verdict = stdout.lines().last().unwrap();
    assert!(verdict.contains("box"), "{stdout}");
}

#[test]
fn plot_writes_both_boundaries_inside_the_maximal_set() {
    let dir = tempfile::tempdir().unwrap();
    let result = synthesize_ellipsoid(dir.path());
    let csv = dir.path().join("boundary.csv");
    let svg = dir.path().join("boundary.svg");
    let out = invset(&[
        "plot",
        "--result",
        result.to_str().unwrap(),
        "--samples",
        "360",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", text(&out.stderr));
    let body = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = body.lines().collect();
    assert_eq!(lines.len(), 721);
    assert_eq!(lines[0], "space,theta,x1,x2");
    let mut primal = 0;
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] != "primal" {
            continue;
        }
        primal += 1;
        let x = [fields[2].parse().unwrap(), fields[3].parse().unwrap()];
        assert!(maximal_set_contains_within(&x, 1e-6), "{line}");
    }
    assert_eq!(primal, 360);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn oracle_exit_codes() {
    assert_eq!(code(&invset(&["oracle", "--point", "0.5,-0.5"])), 0);
    assert_eq!(code(&invset(&["oracle", "--point", "1,1"])), 4);
    assert_eq!(code(&invset(&["oracle", "--polar-point", "0,0"])), 0);
    assert_eq!(code(&invset(&["oracle", "--point", "one,two"])), 1);
}

#[test]
fn ragged_matrix_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ragged.json");
    std::fs::write(
        &cfg,
        r#"{"A": [[0,1,0],[0,0],[0,0,0]], "B": [[0],[0],[1]],
            "box": [[-1,1],[-1,1],[-1,1]], "template": {"kind": "ellipsoid"}}"#,
    )
    .unwrap();
    let out = invset(&[
        "synthesize",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("never.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(text(&out.stderr).contains("`A`"), "{}", text(&out.stderr));
    assert!(!dir.path().join("never.json").exists());
}

#[test]
fn sdpa_export_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.dat-s");
    let b = dir.path().join("b.dat-s");
    for path in [&a, &b] {
        let out = invset(&[
            "export-sdpa",
            "--config",
            config("polyset4.json").to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", text(&out.stderr));
        assert!(!out.stdout.is_empty());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
