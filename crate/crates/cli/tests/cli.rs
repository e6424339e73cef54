use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn speclab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_speclab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn spectrum_of_the_unit_disk() {
    let dir = TempDir::new().unwrap();
    let o = speclab(
        &[
            "spectrum",
            "--patch",
            "flat-disk",
            "--R",
            "1",
            "--dx",
            "1/256",
            "--k",
            "5",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let j = read_json(&dir.path().join("spectrum.json"));
    let ev: Vec<f64> = j["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(ev.len(), 5);
    assert!((ev[0] / 5.783185962946784 - 1.0).abs() < 0.01);
    assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    let svg = std::fs::read_to_string(dir.path().join("eigenvalues.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<metadata>"));
}

#[test]
fn segment_measure_vanishes() {
    let dir = TempDir::new().unwrap();
    let o = speclab(
        &[
            "hausdorff",
            "--set",
            "segment",
            "--gauge",
            "square-log",
            "--deltas",
            "2^-4..2^-10",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let j = read_json(&dir.path().join("hausdorff.json"));
    assert_eq!(j["verdict"], "vanishing");
    assert_eq!(j["reports"][0]["deltas"].as_array().unwrap().len(), 7);
    assert!(dir.path().join("cover_grid.csv").exists());
    assert!(dir.path().join("cover.svg").exists());
}

#[test]
fn model_matches_sinh() {
    let dir = TempDir::new().unwrap();
    let o = speclab(&["model", "--G", "const:1", "--tmax", "5"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("h.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let (t, h) = line.split_once(',').unwrap();
        let (t, h): (f64, f64) = (t.parse().unwrap(), h.parse().unwrap());
        if t > 0.0 {
            assert!((h / t.sinh() - 1.0).abs() < 1e-6, "t = {t}");
        }
        rows += 1;
    }
    assert_eq!(rows, 5001);
    let j = read_json(&dir.path().join("model.json"));
    assert!((j["mu_at_tmax"].as_f64().unwrap() - 5f64.tanh()).abs() < 1e-6);
}

#[test]
fn dry_run_prints_the_plan_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("never");
    let o = speclab(
        &[
            "persson",
            "--patch",
            "hyperbolic-disk",
            "--eps",
            "1e-2",
            "--levels",
            "1..3",
            "--dry-run",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"subcommand\": \"persson\"") && text.contains("config hash"));
    assert!(!out.exists());
}

#[test]
fn every_subcommand_has_a_dry_run() {
    let dir = TempDir::new().unwrap();
    for sub in [
        "model",
        "subharmonic",
        "surface",
        "spectrum",
        "persson",
        "barta",
        "witness",
        "ballprop",
        "hausdorff",
    ] {
        let o = speclab(&[sub, "--dry-run"], dir.path());
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"subcommand": "model", "G": "b:1", "tmax": 2, "step": "1/1000"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = speclab(
        &["model", "--config", cfg.to_str().unwrap(), "--tmax", "3"],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let j = read_json(&out.join("model.json"));
    assert_eq!(j["plan"]["tmax"].as_f64(), Some(3.0));
    assert_eq!(j["plan"]["curvature"]["kind"], "b");
}

#[test]
fn curvature_table_in_config() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"G": {"times": [0, 1, 2], "values": [1, 1, 1]}, "tmax": 2}"#,
    )
    .unwrap();
    let o = speclab(
        &["model", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn input_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"dx\": 0.1,\n  \"bogus\": 1\n}").unwrap();
    let o = speclab(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("bogus") && stderr(&o).contains("line 3"),
        "{}",
        stderr(&o)
    );

    std::fs::write(&cfg, "{\"dx\": 0.1,").unwrap();
    let o = speclab(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 1"));

    let o = speclab(&["spectrum", "--dx", "-1/64"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`dx`"), "{}", stderr(&o));

    let o = speclab(&["spectrum", "--patch", "torus"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("`patch`"));

    let o = speclab(&["hausdorff", "--gauge", "cube"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = speclab(&["model", "--nonsense", "1"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    std::fs::write(&cfg, r#"{"subcommand": "barta"}"#).unwrap();
    let o = speclab(&["spectrum", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let o = speclab(
        &[
            "spectrum",
            "--dx",
            "1/64",
            "--tol",
            "1e-14",
            "--max-iter",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn thread_cap_is_validated() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_speclab"))
        .args(["model", "--out"])
        .arg(dir.path())
        .env("SPECLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_deterministic_and_listed_in_the_manifest() {
    let dir = TempDir::new().unwrap();
    let args = [
        "hausdorff",
        "--set",
        "square-random",
        "--points",
        "20000",
        "--seed",
        "3",
        "--gauge",
        "square",
        "--strategy",
        "both",
        "--deltas",
        "2^-3..2^-5:0.5",
    ];
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let first = speclab(&args, &a);
    assert!(first.status.success(), "{}", stderr(&first));
    let second = Command::new(env!("CARGO_BIN_EXE_speclab"))
        .args(args)
        .arg("--out")
        .arg(&b)
        .env("SPECLAB_THREADS", "1")
        .output()
        .unwrap();
    assert!(second.status.success());
    for f in [
        "hausdorff.json",
        "cover_grid.csv",
        "cover_greedy.csv",
        "cover.svg",
        "manifest.json",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let m = read_json(&a.join("manifest.json"));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let files = m["files"].as_array().unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        assert!(a.join(f["path"].as_str().unwrap()).exists());
    }
    assert!(a.join("metadata.json").exists());
}

#[test]
fn barta_identity_from_the_command_line() {
    let dir = TempDir::new().unwrap();
    let o = speclab(
        &[
            "barta",
            "--patch",
            "hyperbolic-disk",
            "--eps",
            "0.1",
            "--dx",
            "1/64",
            "--tol",
            "1e-12",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let j = read_json(&dir.path().join("barta.json"));
    assert!(j["relative_gap"].as_f64().unwrap().abs() < 1e-8);
    let o = speclab(&["barta", "--w", "radial:1", "--dx", "1/64"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let j = read_json(&dir.path().join("barta.json"));
    let (mu1, bound) = (j["mu1"].as_f64().unwrap(), j["bound"].as_f64().unwrap());
    assert!(bound > 0.0 && bound <= mu1);
}

#[test]
fn remaining_subcommands_run() {
    let dir = TempDir::new().unwrap();
    let cases: [(&str, &[&str], &str); 5] = [
        (
            "subharmonic",
            &["--a", "0.2", "--dx", "1/128"],
            "subharmonic.json",
        ),
        (
            "surface",
            &[
                "--patch",
                "flat-disk",
                "--dx",
                "1/32",
                "--points",
                "200",
                "--margin",
                "0.05",
            ],
            "limit_points.csv",
        ),
        (
            "ballprop",
            &["--R", "1.2", "--ball-radius", "1", "--dx", "1/64"],
            "ballprop.json",
        ),
        (
            "witness",
            &["--dx", "1/128", "--witness-r1", "0.01,0.005"],
            "witness.json",
        ),
        (
            "persson",
            &["--patch", "flat-disk", "--dx", "1/64", "--levels", "1..3"],
            "persson.svg",
        ),
    ];
    for (sub, args, file) in cases {
        let out = dir.path().join(sub);
        let mut all = vec![sub];
        all.extend_from_slice(args);
        let o = speclab(&all, &out);
        assert!(o.status.success(), "{sub}: {}", stderr(&o));
        assert!(out.join(file).exists(), "{sub}: {file}");
    }
    let j = read_json(&dir.path().join("subharmonic").join("subharmonic.json"));
    assert!((j["discrete"]["inside"]["min_slack"].as_f64().unwrap() - 1.0).abs() < 1e-2);
    let j = read_json(&dir.path().join("ballprop").join("ballprop.json"));
    assert!((j["report"]["c"].as_f64().unwrap() / 4.0 - 1.0).abs() < 0.1);
}
