use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn zsiqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zsiqa"))
        .args(args)
        .env_remove("ZSIQA_WORKERS")
        .env_remove("RUST_LOG")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen_toy(dir: &Path) -> String {
    let out = zsiqa(&["gen-toy", "--seed", "42", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    dir.join("backbone.toml").to_str().unwrap().to_string()
}

fn write_png(path: &Path, shade: u8) {
    let img = zsiqa::RgbImage::from_fn(48, 40, |x, y| [shade, (x * 5) as u8, (y * 6) as u8]);
    img.save_png(path).unwrap();
}

#[test]
fn score_same_file_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_toy(&dir.path().join("toy"));
    let img = dir.path().join("a.png");
    write_png(&img, 90);
    let img = img.to_str().unwrap();
    let out = zsiqa(&["score", "--ref", img, "--dist", img, "--backbone", &spec, "--mode", "feats", "--measure", "wsd"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "score=0.000000\n");
    assert!(out.stderr.is_empty());
}

#[test]
fn score_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_toy(&dir.path().join("toy"));
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    write_png(&a, 90);
    write_png(&b, 120);
    let out = zsiqa(&[
        "score", "--ref", a.to_str().unwrap(), "--dist", b.to_str().unwrap(), "--backbone", &spec,
        "--mode", "emb", "--measure", "l2", "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let score: zsiqa::PairScore = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(score.value > 0.0);
    assert_eq!(score.per_tile.len(), 1);
    let again: zsiqa::PairScore = serde_json::from_str(&serde_json::to_string(&score).unwrap()).unwrap();
    assert_eq!(again, score);
}

#[test]
fn flag_errors_exit_2() {
    let out = zsiqa(&["score", "--ref", "a.png", "--backbone", "b.toml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(zsiqa(&["score", "--bogus"]).status.code(), Some(2));
    assert_eq!(zsiqa(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(zsiqa(&["--help"]).status.code(), Some(0));
}

#[test]
fn emb_with_divergence_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_toy(&dir.path().join("toy"));
    let img = dir.path().join("a.png");
    write_png(&img, 90);
    let img = img.to_str().unwrap();
    let out = zsiqa(&["score", "--ref", img, "--dist", img, "--backbone", &spec, "--mode", "emb", "--measure", "wsd"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn missing_image_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gen_toy(&dir.path().join("toy"));
    let out = zsiqa(&["score", "--ref", "/nonexistent.png", "--dist", "/nonexistent.png", "--backbone", &spec]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn gen_toy_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let digest = |d: &Path| {
        let mut h = Sha256::new();
        for f in ["backbone.toml", "toy.onnx"] {
            h.update(std::fs::read(d.join(f)).unwrap());
        }
        h.finalize()
    };
    gen_toy(&dir.path().join("a"));
    gen_toy(&dir.path().join("b"));
    assert_eq!(digest(&dir.path().join("a")), digest(&dir.path().join("b")));
}

#[test]
fn adapt_empty_dir_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_str().unwrap();
    let out_path = dir.path().join("m.csv");
    for dataset in ["tid2013", "pipal"] {
        let out = zsiqa(&["adapt", "--dataset", dataset, "--root", root, "--out", out_path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3));
    }
}

#[test]
fn adapt_tid2013_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("tid");
    std::fs::create_dir_all(root.join("reference_images")).unwrap();
    std::fs::create_dir_all(root.join("distorted_images")).unwrap();
    write_png(&root.join("reference_images/I01.BMP"), 1);
    write_png(&root.join("distorted_images/i01_01_1.bmp"), 2);
    std::fs::write(root.join("mos_with_names.txt"), "5.51429 i01_01_1.bmp\n").unwrap();
    let manifest = dir.path().join("m.csv");
    let out = zsiqa(&[
        "adapt", "--dataset", "tid2013", "--root", root.to_str().unwrap(), "--out", manifest.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("tid/reference_images/I01.BMP,tid/distorted_images/i01_01_1.bmp,5.51429"));
}

fn evaluate_setup(dir: &Path, perturbations: &str) -> String {
    gen_toy(&dir.join("toy"));
    zsiqa::harness::synthetic::write_synthetic_dataset(
        dir.join("data"),
        &zsiqa::harness::synthetic::SyntheticPlan::default(),
    )
    .unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "manifest = \"data/manifest.csv\"\nbackbone_spec = \"toy/backbone.toml\"\nmode = \"feats\"\n\
             kind = \"l2\"\nperturbations = {perturbations}\nworkers = 2\noutput = \"report.csv\"\n"
        ),
    )
    .unwrap();
    cfg.to_str().unwrap().to_string()
}

#[test]
fn evaluate_synthetic_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = evaluate_setup(dir.path(), "[\"original\"]");
    let out = zsiqa(&["evaluate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(out.stderr.is_empty());
    assert!(stdout(&out).contains("original"));
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "dataset,backbone,mode,measure,perturbation,n,plcc,srcc,krcc,errors");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&fields[..6], ["manifest", "toy-42", "feats", "l2", "original", "20"]);
    assert_eq!(fields[7], "1.0");

    let first = std::fs::read(dir.path().join("report.csv")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_zsiqa"))
        .args(["evaluate", "--config", &cfg])
        .env("ZSIQA_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("report.csv")).unwrap(), first);
}

#[test]
fn evaluate_empty_perturbations_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = evaluate_setup(dir.path(), "[]");
    assert_eq!(zsiqa(&["evaluate", "--config", &cfg]).status.code(), Some(2));
}
