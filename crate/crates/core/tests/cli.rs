use std::path::Path;
use std::process::{Command, Output};

fn contactlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_contactlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CONTACTLAB_SEED")
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = contactlab(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = match std::fs::read_dir(dir) {
        Ok(rd) => rd.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => Vec::new(),
    };
    v.sort();
    v
}

#[test]
fn full_run_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["gen"]);
    ok(out, &["train-nfis", "--rules", "13", "--epochs", "5"]);
    ok(out, &["train-som", "--epochs", "50"]);
    ok(out, &["scan", "--windows", "7"]);

    let eval: serde_json::Value = serde_json::from_str(&ok(out, &["eval", "--oracle"])).unwrap();
    assert_eq!(eval["split"], "check");
    assert_eq!(eval["results"][0]["classifier"], "oracle");
    assert_eq!(eval["results"][0]["accuracy"], 1.0);

    let eval: serde_json::Value = serde_json::from_str(&ok(out, &["eval", "--train"])).unwrap();
    let names: Vec<&str> =
        eval["results"].as_array().unwrap().iter().map(|r| r["classifier"].as_str().unwrap()).collect();
    assert_eq!(names, ["nfis-13", "som"]);
    assert_eq!(eval["results"][0]["total"], 100);

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("nfis-13.metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["rules"], 13);
    assert_eq!(metrics["train_rmse_trace"].as_array().unwrap().len(), 5);

    let scan = std::fs::read_to_string(out.join("scan.csv")).unwrap();
    assert_eq!(scan.lines().next(), Some("wx,wy,ww,wh,som,nfis,fused,disagree"));
    assert_eq!(scan.lines().count(), 8);
    let labels = std::fs::read_to_string(out.join("som-labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 10);
    assert!(std::fs::read_to_string(out.join("contact-map.dat")).unwrap().starts_with("# x y code\n"));
}

#[test]
fn seed_changes_the_split_and_env_is_a_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let read = |name: &str| std::fs::read(dir.path().join(name).join("dataset.csv")).unwrap();
    ok(&dir.path().join("a"), &["gen", "--seed", "1"]);
    ok(&dir.path().join("b"), &["gen", "--seed", "2"]);
    let env = Command::new(env!("CARGO_BIN_EXE_contactlab"))
        .arg("--out")
        .arg(dir.path().join("c"))
        .arg("gen")
        .env("CONTACTLAB_SEED", "1")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_ne!(read("a"), read("b"));
    assert_eq!(read("a"), read("c"));
}

#[test]
fn config_file_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{
        "blocks": [
            {"id": 0, "vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]},
            {"id": 1, "vertices": [[3, 0], [4, 0], [4, 1], [3, 1]]}
        ],
        "velocities": [[0, 0], [-0.05, 0]],
        "steps": 41,
        "dt": 1
    }"#;
    std::fs::write(dir.path().join("scene.json"), scene).unwrap();
    std::fs::write(
        dir.path().join("config.json"),
        r#"{"scene": "scene.json", "seed": 3, "dataset": {"train": 30, "check": 10}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let cfg = dir.path().join("config.json");
    ok(&out, &["--config", cfg.to_str().unwrap(), "gen"]);
    let text = std::fs::read_to_string(out.join("dataset.csv")).unwrap();
    assert_eq!(text.lines().count(), 41);
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 42);
    assert!(trace.trim_end().ends_with(",3"));
}

#[test]
fn failures_exit_nonzero_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let o = contactlab(&out, &["train-nfis", "--rules", "13"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dataset"));
    assert!(files(&out).is_empty());

    let o = contactlab(&out, &["train-nfis", "--rules", "lots"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"sede": 4}"#).unwrap();
    let o = contactlab(&out, &["--config", bad.to_str().unwrap(), "gen"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field"));

    let missing = dir.path().join("missing-scene.json");
    std::fs::write(&missing, r#"{"scene": "nowhere.json"}"#).unwrap();
    let o = contactlab(&out, &["--config", missing.to_str().unwrap(), "gen"]);
    assert_eq!(o.status.code(), Some(1));

    // a scene whose blocks collide mid-run
    let crash = dir.path().join("crash.json");
    std::fs::write(
        &crash,
        r#"{"blocks": [{"id": 0, "vertices": [[0,0],[1,0],[1,1],[0,1]]},
                      {"id": 1, "vertices": [[3,0],[4,0],[4,1],[3,1]]}],
            "velocities": [[0,0],[-0.5,0]], "steps": 200, "dt": 1}"#,
    )
    .unwrap();
    let o = contactlab(&out, &["gen", "--scene", crash.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("interpenetrate"));
    assert!(files(&out).is_empty());

    // too few observations for the requested split
    let short = dir.path().join("short.json");
    std::fs::write(
        &short,
        r#"{"blocks": [{"id": 0, "vertices": [[0,0],[1,0],[1,1],[0,1]]},
                      {"id": 1, "vertices": [[3,0],[4,0],[4,1],[3,1]]}],
            "velocities": [[0,0],[0,0.1]], "steps": 20, "dt": 1}"#,
    )
    .unwrap();
    let o = contactlab(&out, &["gen", "--scene", short.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(files(&out).is_empty());
}

#[test]
fn library_entry_point_matches_binary() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("lib");
    contactlab::cli::run(["contactlab", "--out", a.to_str().unwrap(), "--seed", "5", "gen"]).unwrap();
    let b = dir.path().join("bin");
    ok(&b, &["--seed", "5", "gen"]);
    assert_eq!(std::fs::read(a.join("dataset.csv")).unwrap(), std::fs::read(b.join("dataset.csv")).unwrap());
    assert!(contactlab::cli::run(["contactlab", "frobnicate"]).is_err());
}

#[test]
fn zero_epoch_som_is_its_initialization() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["gen"]);
    ok(out, &["train-som", "--epochs", "0"]);
    let grid: contactlab::som::SomGrid =
        serde_json::from_str(&std::fs::read_to_string(out.join("som.json")).unwrap()).unwrap();
    let text = std::fs::read(out.join("dataset.csv")).unwrap();
    let data = contactlab::pipeline::read_dataset_csv(text.as_slice(), 100).unwrap();
    let gravity: Vec<Vec<f64>> =
        data.train.iter().map(|s| contactlab::pipeline::gravity_features(&s.features).unwrap()).collect();
    let init = contactlab::som::SomGrid::random_init(3, 3, &gravity, 42).unwrap();
    assert_eq!(grid.weights(), init.weights());
    assert_eq!(std::fs::read_to_string(out.join("som-labels.csv")).unwrap().lines().count(), 10);
}

#[test]
fn bad_artifacts_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["gen"]);
    ok(out, &["train-nfis", "--rules", "13", "--epochs", "2"]);
    ok(out, &["train-som", "--epochs", "5"]);

    let broken = out.join("broken.json");
    std::fs::write(&broken, "{\"n\": 18, \"rules\": [").unwrap();
    let o = contactlab(out, &["eval", "--nfis", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("parsing"), "{}", String::from_utf8_lossy(&o.stderr));

    // strip the labels from the trained map
    let mut som: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("som.json")).unwrap()).unwrap();
    som["labels"] = serde_json::json!([]);
    let unlabeled = out.join("unlabeled.json");
    std::fs::write(&unlabeled, som.to_string()).unwrap();
    let before = files(out);
    let o = contactlab(out, &["scan", "--som", unlabeled.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("label"), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(files(out), before);
}
