//! End-to-end binary tests: the exit-code contract and the mock pipeline
//! over the bundled 100-pair fixture.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_embalign"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn oracle_config(dir: &Path, noise_sigma: f64) -> PathBuf {
    let path = dir.join("config.json");
    let config = format!(
        r#"{{
  "provider": {{
    "kind": "oracle",
    "model_id": "oracle-fixture",
    "input_type": "doc",
    "dim": 128,
    "noise_sigma": {noise_sigma},
    "seed": 42
  }},
  "rate": {{ "window_seconds": 61.0, "max_texts_per_window": 4000, "chunk_size": 2000 }},
  "cache_path": "{}",
  "seed": 42
}}"#,
        dir.join("cache.tsv").display()
    );
    std::fs::write(&path, config).unwrap();
    path
}

#[test]
fn prepare_writes_sentences_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let docs = dir.path().join("docs");
    std::fs::create_dir(&docs).unwrap();
    std::fs::write(
        docs.join("a.txt"),
        "One full sentence about nothing much. Tiny one.",
    )
    .unwrap();
    let out = dir.path().join("prepared.txt");
    let output = bin()
        .args(["prepare"])
        .arg(&docs)
        .args(["--lang", "eng", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let sentences = std::fs::read_to_string(&out).unwrap();
    assert_eq!(sentences, "One full sentence about nothing much.\n");
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["n_raw"], 2);
    assert_eq!(report["n_kept"], 1);
    assert_eq!(report["n_dropped_short"], 1);
}

#[test]
fn prepare_missing_input_exits_2() {
    let output = bin()
        .args(["prepare", "/nonexistent/path", "--out", "/tmp/x.txt"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
}

#[test]
fn prepare_min_over_max_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("d.txt"), "Some words here.").unwrap();
    let output = bin()
        .arg("prepare")
        .arg(dir.path())
        .args(["--min-words", "10", "--max-words", "5"])
        .args(["--out"])
        .arg(dir.path().join("out.txt"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{}", stderr(&output));
}

#[test]
fn unknown_flag_exits_1() {
    let output = bin().args(["align", "--bogus-flag"]).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn help_exits_0() {
    let output = bin().arg("--help").output().unwrap();
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("prepare"));
}

#[test]
fn embed_with_mock_provider_populates_cache() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, "first line here\nsecond line here\n").unwrap();
    let cache = dir.path().join("cache.tsv");
    let output = bin()
        .arg("embed")
        .arg(&corpus)
        .args(["--provider", "hash_mock", "--dim", "16", "--cache"])
        .arg(&cache)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let summary: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(summary["n_requested"], 2);
    let cache_contents = std::fs::read_to_string(&cache).unwrap();
    assert_eq!(cache_contents.lines().count(), 2);
}

#[test]
fn embed_without_credential_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, "one line\n").unwrap();
    let output = bin()
        .arg("embed")
        .arg(&corpus)
        .args([
            "--provider",
            "remote",
            "--endpoint-url",
            "http://127.0.0.1:9/embed",
            "--model-id",
            "m",
            "--api-key-env",
            "EMBALIGN_CLI_TEST_UNSET_VAR",
        ])
        .arg("--cache")
        .arg(dir.path().join("cache.tsv"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{}", stderr(&output));
    assert!(stderr(&output).contains("EMBALIGN_CLI_TEST_UNSET_VAR"));
}

#[test]
fn corrupt_cache_exits_4_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.txt");
    std::fs::write(&corpus, "one line\n").unwrap();
    let cache = dir.path().join("cache.tsv");
    std::fs::write(&cache, "garbage\n").unwrap();
    let output = bin()
        .arg("embed")
        .arg(&corpus)
        .args(["--provider", "hash_mock", "--cache"])
        .arg(&cache)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{}", stderr(&output));
    assert!(stderr(&output).contains("line 1"), "{}", stderr(&output));
}

#[test]
fn end_to_end_oracle_fixture_reaches_perfect_f1() {
    let dir = tempfile::tempdir().unwrap();
    let config = oracle_config(dir.path(), 0.01);
    let output = bin()
        .args(["evaluate", "--src"])
        .arg(fixture("pairs100.src.txt"))
        .arg("--tgt")
        .arg(fixture("pairs100.tgt.txt"))
        .arg("--config")
        .arg(&config)
        .args(["--method", "nn"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["f1"], 1.0);
    assert_eq!(report["n_gold"], 100);
}

#[test]
fn evaluate_mismatched_parallel_files_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.txt");
    let tgt = dir.path().join("t.txt");
    std::fs::write(&src, "a\nb\nc\n").unwrap();
    std::fs::write(&tgt, "x\ny\n").unwrap();
    let output = bin()
        .args(["evaluate", "--src"])
        .arg(&src)
        .arg("--tgt")
        .arg(&tgt)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{}", stderr(&output));
    let err = stderr(&output);
    assert!(err.contains('3') && err.contains('2'), "{err}");
}

#[test]
fn stats_on_empty_pairs_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let pairs = dir.path().join("pairs.tsv");
    std::fs::write(&pairs, "#method=nn k=10 beta=30 threshold=none\n").unwrap();
    let corpus = dir.path().join("c.txt");
    std::fs::write(&corpus, "some words here\n").unwrap();
    let output = bin()
        .args(["stats", "--pairs"])
        .arg(&pairs)
        .arg("--src-corpus")
        .arg(&corpus)
        .arg("--tgt-corpus")
        .arg(&corpus)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(4), "{}", stderr(&output));
}

#[test]
fn full_mock_pipeline_align_stats_sample_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = oracle_config(dir.path(), 0.0);
    let src = fixture("pairs100.src.txt");
    let tgt = fixture("pairs100.tgt.txt");

    // Align the fixture corpora.
    let pairs = dir.path().join("pairs.tsv");
    let output = bin()
        .arg("align")
        .arg(&src)
        .arg(&tgt)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&pairs)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let tsv = std::fs::read_to_string(&pairs).unwrap();
    assert!(tsv.starts_with("#method=nn"));
    assert_eq!(tsv.lines().count(), 101); // header + one line per source

    // Zero-noise oracle vectors align identically with cosine 1.
    for (i, line) in tsv.lines().skip(1).enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        assert_eq!(fields[0], i.to_string());
        assert_eq!(fields[1], i.to_string());
        let score: f64 = fields[2].parse().unwrap();
        assert!((score - 1.0).abs() < 1e-6, "score {score}");
    }

    // Statistics over the mined pairs.
    let output = bin()
        .args(["stats", "--pairs"])
        .arg(&pairs)
        .arg("--src-corpus")
        .arg(&src)
        .arg("--tgt-corpus")
        .arg(&tgt)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let stats: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(stats["n_pairs"], 100);
    assert_eq!(stats["unique_tgt_frac"], 1.0);
    assert_eq!(stats["mean_len_ratio"], 1.0);

    // Sample for annotation, fill labels, summarize.
    let sample_path = dir.path().join("sample.tsv");
    let output = bin()
        .args(["sample", "--pairs"])
        .arg(&pairs)
        .args(["-k", "10", "--seed", "42", "--out"])
        .arg(&sample_path)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let sample = std::fs::read_to_string(&sample_path).unwrap();
    assert_eq!(sample.lines().count(), 11);
    assert!(sample.lines().skip(1).all(|l| l.ends_with('\t')));

    // Deterministic for a fixed seed.
    let output = bin()
        .args(["sample", "--pairs"])
        .arg(&pairs)
        .args(["-k", "10", "--seed", "42"])
        .output()
        .unwrap();
    assert_eq!(stdout(&output), sample);

    let filled = sample
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                line.to_string()
            } else {
                format!("{line}{}", if i <= 8 { "1" } else { "5" })
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    let annotations = dir.path().join("annotations.tsv");
    std::fs::write(&annotations, filled).unwrap();

    let output = bin()
        .args(["report", "--annotations"])
        .arg(&annotations)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let dist: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(dist["n_labeled"], 10);
    assert_eq!(dist["fractions"]["1"], 0.8);
    assert_eq!(dist["fractions"]["5"], 0.2);
}

#[test]
fn evaluate_pred_mode_scores_an_existing_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("s.txt");
    let tgt = dir.path().join("t.txt");
    std::fs::write(&src, "a one\nb two\nc three\nd four\n").unwrap();
    std::fs::write(&tgt, "w one\nx two\ny three\nz four\n").unwrap();
    let pred = dir.path().join("pred.tsv");
    std::fs::write(
        &pred,
        "#method=nn k=10 beta=30 threshold=none\n\
         0\t0\t1.000000\ta one\tw one\n\
         1\t1\t1.000000\tb two\tx two\n\
         2\t3\t1.000000\tc three\tz four\n",
    )
    .unwrap();
    let output = bin()
        .args(["evaluate", "--src"])
        .arg(&src)
        .arg("--tgt")
        .arg(&tgt)
        .arg("--pred")
        .arg(&pred)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", stderr(&output));
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["n_pred"], 3);
    assert_eq!(report["n_gold"], 4);
    assert_eq!(report["n_correct"], 2);
}
