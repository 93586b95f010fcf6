//! Command-line contract: exit codes (0 success, 1 data/verification
//! failure, 2 usage), line-oriented JSON output, and determinism under a
//! fixed seed. Most cases drive `run_cli` in process; the stderr-message
//! case spawns the real binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use dprune::cli::run_cli;
use dprune::io::{read_index, write_corpus_jsonl, write_index, CorpusIndex};
use dprune::synth;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("dprune").chain(args.iter().copied());
    let code = run_cli(argv, &mut out);
    (code, String::from_utf8(out).expect("utf-8 output"))
}

fn write_queries(path: &Path, d: usize) {
    let mut lines = String::new();
    for i in 0..3 {
        let mut row = vec![0.0; d];
        row[i % d] = 1.0;
        let line = serde_json::json!({ "query_id": format!("q{i}"), "vectors": [row] });
        lines.push_str(&line.to_string());
        lines.push('\n');
    }
    fs::write(path, lines).expect("write queries");
}

#[test]
fn out_of_range_theta_is_a_usage_error() {
    let (code, _) = run(&[
        "prune",
        "--in",
        "does-not-matter.jsonl",
        "--out",
        "ignored.dpr",
        "--strategy",
        "lp",
        "--theta",
        "1.5",
    ]);
    assert_eq!(code, 2, "range check precedes any file access");
}

#[test]
fn missing_and_unknown_arguments_are_usage_errors() {
    let (code, _) = run(&["prune", "--theta", "0.9"]);
    assert_eq!(code, 2, "missing required flags");
    let (code, _) = run(&["frobnicate"]);
    assert_eq!(code, 2, "unknown subcommand");
    let (code, _) = run(&["--help"]);
    assert_eq!(code, 0, "help is a successful exit");
}

#[test]
fn unreadable_input_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = run(&[
        "stats",
        "--index",
        dir.path().join("absent.dpr").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
}

#[test]
fn mismatched_query_dimension_reports_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let index_path = dir.path().join("corpus.dpr");
    let queries_path = dir.path().join("queries.jsonl");
    write_index(&synth::random_corpus(3, 5, 4, 1), &index_path).unwrap();
    write_queries(&queries_path, 3);

    let output = Command::new(env!("CARGO_BIN_EXE_dprune"))
        .args([
            "score",
            "--index",
            index_path.to_str().unwrap(),
            "--queries",
            queries_path.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(
        stderr.contains("does not match document dimension"),
        "stderr should explain the mismatch, got: {stderr}"
    );
}

#[test]
fn prune_is_deterministic_and_emits_one_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("corpus.jsonl");
    write_corpus_jsonl(&synth::random_corpus(10, 12, 4, 5), &input).unwrap();

    let run_once = |tag: &str| -> (String, Vec<u8>) {
        let out_path = dir.path().join(format!("pruned-{tag}.dpr"));
        let (code, stdout) = run(&[
            "prune",
            "--in",
            input.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
            "--strategy",
            "lp",
            "--theta",
            "1.0",
            "--seed",
            "42",
        ]);
        assert_eq!(code, 0);
        (stdout, fs::read(&out_path).expect("index written"))
    };
    let (report_a, index_a) = run_once("a");
    let (report_b, index_b) = run_once("b");
    assert_eq!(index_a, index_b, "same seed, same bytes");

    // The report differs only in wall time; strip it before comparing and
    // check the rest parses as one JSON object per line.
    let strip = |s: &str| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_str(s.trim()).expect("valid JSON");
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip(&report_a), strip(&report_b));
    assert_eq!(report_a.trim().lines().count(), 1);
}

#[test]
fn score_emits_one_valid_json_ranking_per_query() {
    let dir = tempfile::tempdir().unwrap();
    let index_path = dir.path().join("corpus.dpr");
    let queries_path = dir.path().join("queries.jsonl");
    write_index(&synth::random_corpus(4, 6, 4, 9), &index_path).unwrap();
    write_queries(&queries_path, 4);

    for variant in ["clipped", "plain"] {
        let (code, stdout) = run(&[
            "score",
            "--index",
            index_path.to_str().unwrap(),
            "--queries",
            queries_path.to_str().unwrap(),
            "--variant",
            variant,
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = stdout.trim().lines().collect();
        assert_eq!(lines.len(), 3, "one ranking per query");
        for line in lines {
            let v: serde_json::Value = serde_json::from_str(line).expect("valid JSON");
            assert_eq!(v["ranking"].as_array().unwrap().len(), 4);
            let scores: Vec<f64> = v["ranking"]
                .as_array()
                .unwrap()
                .iter()
                .map(|e| e["score"].as_f64().unwrap())
                .collect();
            assert!(scores.windows(2).all(|w| w[0] >= w[1]), "sorted descending");
        }
    }
}

#[test]
fn verify_passes_faithful_pairs_and_flags_corrupted_ones() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth::random_corpus(6, 8, 4, 11);
    let original = dir.path().join("original.dpr");
    write_index(&corpus, &original).unwrap();

    // The identity pruning is trivially lossless.
    let (code, stdout) = run(&[
        "verify",
        "--original",
        original.to_str().unwrap(),
        "--pruned",
        original.to_str().unwrap(),
        "--samples",
        "200",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(report["counterexamples"].as_array().unwrap().len(), 0);

    // Dropping the strongest row of the strongest document is not.
    let target = (0..corpus.len())
        .max_by(|&a, &b| {
            let peak = |i: usize| {
                let doc = &corpus.docs()[i];
                (0..doc.n()).map(|r| doc.row_norm(r)).fold(0.0f64, f64::max)
            };
            peak(a).partial_cmp(&peak(b)).unwrap()
        })
        .unwrap();
    let mut corrupted = CorpusIndex::new();
    for (i, doc) in corpus.docs().iter().enumerate() {
        let doc = if i == target {
            let strongest = (0..doc.n())
                .max_by(|&a, &b| doc.row_norm(a).partial_cmp(&doc.row_norm(b)).unwrap())
                .unwrap();
            let keep: Vec<usize> = (0..doc.n()).filter(|&r| r != strongest).collect();
            doc.select_rows(&keep)
        } else {
            doc.clone()
        };
        corrupted.push(doc).unwrap();
    }
    let corrupted_path = dir.path().join("corrupted.dpr");
    write_index(&corrupted, &corrupted_path).unwrap();
    let (code, stdout) = run(&[
        "verify",
        "--original",
        original.to_str().unwrap(),
        "--pruned",
        corrupted_path.to_str().unwrap(),
        "--samples",
        "200",
        "--seed",
        "3",
    ]);
    assert_eq!(code, 1);
    let report: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(!report["counterexamples"].as_array().unwrap().is_empty());

    // Same seed, same verdict and same sampled evidence.
    let (_, again) = run(&[
        "verify",
        "--original",
        original.to_str().unwrap(),
        "--pruned",
        corrupted_path.to_str().unwrap(),
        "--samples",
        "200",
        "--seed",
        "3",
    ]);
    assert_eq!(stdout, again);
}

#[test]
fn stats_pairs_with_original_for_remaining_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = synth::random_corpus(5, 10, 4, 13);
    let original = dir.path().join("original.dpr");
    let pruned_path = dir.path().join("pruned.dpr");
    write_index(&corpus, &original).unwrap();
    let (code, _) = run(&[
        "prune",
        "--in",
        original.to_str().unwrap(),
        "--out",
        pruned_path.to_str().unwrap(),
        "--strategy",
        "norm",
        "--theta",
        "0.5",
    ]);
    assert_eq!(code, 0);

    let (code, stdout) = run(&["stats", "--index", original.to_str().unwrap()]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert_eq!(stats["docs"], 5);
    assert!(stats.get("remaining_ratio").is_none(), "unpaired stats");

    let (code, stdout) = run(&[
        "stats",
        "--index",
        pruned_path.to_str().unwrap(),
        "--original",
        original.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    let ratio = stats["remaining_ratio"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ratio));
    let pruned = read_index(&pruned_path).unwrap();
    let expected = pruned.total_tokens() as f64 / corpus.total_tokens() as f64;
    assert!((ratio - expected).abs() < 1e-12);
}

#[test]
fn oracle2d_works_only_in_two_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.dpr");
    write_index(&synth::random_corpus(4, 6, 2, 17), &flat).unwrap();
    let (code, stdout) = run(&["oracle2d", "--in", flat.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim().lines().count(), 4, "one partition per document");
    for line in stdout.trim().lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("valid JSON");
        assert!(v.get("kept").is_some() && v.get("pruned").is_some());
    }

    let deep = dir.path().join("deep.dpr");
    write_index(&synth::random_corpus(2, 6, 3, 19), &deep).unwrap();
    let (code, _) = run(&["oracle2d", "--in", deep.to_str().unwrap()]);
    assert_eq!(code, 1, "three-dimensional input is a data error");
}
