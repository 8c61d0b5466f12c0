mod common;

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use common::{bin, fixture};

fn stakeflow(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .env_clear()
        .output()
        .expect("spawn stakeflow")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn external_args(out: &Path) -> Vec<String> {
    let mut v: Vec<String> = ["--provider", "external", "--dim", "8"].map(String::from).into();
    for (flag, file) in [
        ("--corpus", "corpus.jsonl"),
        ("--mentions", "mentions_vectors.jsonl"),
        ("--seeds", "seeds_vectors.jsonl"),
    ] {
        v.push(flag.into());
        v.push(fixture(file).display().to_string());
    }
    v.push("--out".into());
    v.push(out.display().to_string());
    v
}

fn run_with(command: &str, args: &[String]) -> Output {
    let mut all = vec![command];
    all.extend(args.iter().map(String::as_str));
    stakeflow(&all)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn extract_matches_golden_mentions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.jsonl");
    let gazetteer = fixture("gazetteer.jsonl");
    let o = stakeflow(&[
        "extract",
        "--corpus",
        path(&corpus),
        "--gazetteer",
        path(&gazetteer),
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let got = std::fs::read_to_string(dir.path().join("mentions.jsonl")).unwrap();
    let want = std::fs::read_to_string(fixture("mentions.expected.jsonl")).unwrap();
    assert_eq!(got, want);
}

#[test]
fn empty_corpus_gives_empty_mentions() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.jsonl");
    std::fs::write(&corpus, "").unwrap();
    let gazetteer = fixture("gazetteer.jsonl");
    let o = stakeflow(&[
        "extract",
        "--corpus",
        path(&corpus),
        "--gazetteer",
        path(&gazetteer),
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(std::fs::read_to_string(dir.path().join("mentions.jsonl")).unwrap(), "");
}

#[test]
fn missing_gazetteer_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.jsonl");
    let o = stakeflow(&["extract", "--corpus", path(&corpus), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gazetteer"));

    let absent = dir.path().join("nope.jsonl");
    let o = stakeflow(&[
        "extract",
        "--corpus",
        path(&corpus),
        "--gazetteer",
        path(&absent),
        "--out",
        path(dir.path()),
    ]);
    assert!(!o.status.success());
}

#[test]
fn out_of_range_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = external_args(dir.path());
    args.extend(["--threshold".into(), "2.0".into()]);
    let o = run_with("cluster", &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threshold"));
    assert!(!dir.path().join("stakeholders.jsonl").exists());
}

#[test]
fn coverage_without_stakeholder_table_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.jsonl");
    let o = stakeflow(&["coverage", "--corpus", path(&corpus), "--out", path(dir.path())]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("cluster"));
}

#[test]
fn cluster_then_coverage_and_eval() {
    let dir = tempfile::tempdir().unwrap();
    let args = external_args(dir.path());
    let o = run_with("cluster", &args);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["stakeholders.jsonl", "clusters.jsonl", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let o = run_with("coverage", &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("coverage.csv")).unwrap();
    assert!(csv.starts_with("topic,media_house,stakeholder_type,count,share_pct,doc_count\n"));
    assert!(dir.path().join("coverage_CAB_Bill.csv").exists());

    let mut eval = args.clone();
    eval.extend(["--gold".into(), fixture("gold.jsonl").display().to_string()]);
    let o = run_with("eval", &eval);
    assert!(o.status.success(), "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("Stakeholder Type,Precision,Recall,F-Score\n"));
    assert!(stdout.contains("Macro-Fscore,-,-,"));
}

#[test]
fn manifest_reproduces_the_run() {
    let first = tempfile::tempdir().unwrap();
    let o = run_with("cluster", &external_args(first.path()));
    assert!(o.status.success(), "{}", stderr(&o));
    let second = tempfile::tempdir().unwrap();
    let manifest = first.path().join("manifest.json");
    let o = stakeflow(&["cluster", "--config", path(&manifest), "--out", path(second.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["stakeholders.jsonl", "clusters.jsonl", "manifest.json"] {
        assert_eq!(
            std::fs::read(first.path().join(f)).unwrap(),
            std::fs::read(second.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn environment_overrides_defaults_and_flags_override_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args = external_args(dir.path());
    let manifest = |o: &Output| {
        assert!(o.status.success(), "{}", stderr(o));
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        serde_json::from_str::<serde_json::Value>(&text).unwrap()
    };

    let mut cmd = Command::new(bin());
    cmd.env_clear()
        .env("STAKEFLOW_THRESHOLD", "0.9")
        .arg("cluster")
        .args(&args);
    let m = manifest(&cmd.output().unwrap());
    assert_eq!(m["threshold"], 0.9);

    let mut cmd = Command::new(bin());
    cmd.env_clear()
        .env("STAKEFLOW_THRESHOLD", "0.9")
        .arg("cluster")
        .args(&args)
        .args(["--threshold", "0.5"]);
    let m = manifest(&cmd.output().unwrap());
    assert_eq!(m["threshold"], 0.5);
}

#[test]
fn mentions_read_from_stdin() {
    let from_file = tempfile::tempdir().unwrap();
    let o = run_with("cluster", &external_args(from_file.path()));
    assert!(o.status.success(), "{}", stderr(&o));

    let from_stdin = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.jsonl");
    let seeds = fixture("seeds_vectors.jsonl");
    let mut child = Command::new(bin())
        .env_clear()
        .args(["cluster", "--provider", "external", "--dim", "8", "--mentions", "-"])
        .args([
            "--corpus",
            path(&corpus),
            "--seeds",
            path(&seeds),
            "--out",
            path(from_stdin.path()),
        ])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let input = std::fs::read(fixture("mentions_vectors.jsonl")).unwrap();
    child.stdin.take().unwrap().write_all(&input).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        std::fs::read(from_file.path().join("stakeholders.jsonl")).unwrap(),
        std::fs::read(from_stdin.path().join("stakeholders.jsonl")).unwrap()
    );
}

#[test]
fn lenient_mode_skips_bad_corpus_lines() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    let mut text = std::fs::read_to_string(fixture("corpus.jsonl")).unwrap();
    text.push_str("{\"doc_id\": \"broken\"\n");
    std::fs::write(&corpus, text).unwrap();
    let gazetteer = fixture("gazetteer.jsonl");
    let base = [
        "extract",
        "--corpus",
        path(&corpus),
        "--gazetteer",
        path(&gazetteer),
        "--out",
        path(dir.path()),
    ];

    let o = stakeflow(&base);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":11:"), "{}", stderr(&o));

    let mut lenient = base.to_vec();
    lenient.push("--lenient");
    let o = stakeflow(&lenient);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("skipped corpus line 11"));
    let got = std::fs::read_to_string(dir.path().join("mentions.jsonl")).unwrap();
    assert_eq!(
        got,
        std::fs::read_to_string(fixture("mentions.expected.jsonl")).unwrap()
    );
}

#[test]
fn unknown_topic_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        "{\"doc_id\": \"x\", \"media_house\": \"BBC\", \"topic\": \"Cricket\", \"publish_date\": \"2020-01-01\", \"text\": \"Modi watched.\"}\n",
    )
    .unwrap();
    let gazetteer = fixture("gazetteer.jsonl");
    let o = stakeflow(&[
        "extract",
        "--corpus",
        path(&corpus),
        "--gazetteer",
        path(&gazetteer),
        "--out",
        path(dir.path()),
    ]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("Cricket"));
}

#[test]
fn synthetic_bench_reports_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = stakeflow(&[
        "bench",
        "--synthetic",
        "--synthetic-mentions",
        "200",
        "--synthetic-clusters",
        "5",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("complexity.json")).unwrap()).unwrap();
    assert_eq!(report["within_bound"], true);
    assert_eq!(report["pairwise_ops"], 19_900);
    assert_eq!(report["cluster_count"], 5);
}
