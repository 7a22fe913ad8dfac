use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dialect-bench")).args(args).env_remove("DIALECT_BENCH_CACHE").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = bench(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, seed: &str) {
    ok(&["synth", "--out", p(dir), "--per-stratum", "6,2,2", "--tokens", "40", "--seed", seed]);
}

#[test]
fn ingest_is_idempotent() {
    let tmp = tempfile::tempdir().unwrap();
    let (src, a, b) = (tmp.path().join("src"), tmp.path().join("a"), tmp.path().join("b"));
    synth(&src, "1");
    ok(&["ingest", "--corpus", p(&src), "--out", p(&a)]);
    ok(&["ingest", "--corpus", p(&a), "--out", p(&b)]);
    for f in ["train.tsv", "validation.tsv", "test.tsv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        assert_eq!(std::fs::read(src.join(f)).unwrap(), std::fs::read(a.join(f)).unwrap());
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let (c1, c2) = (tmp.path().join("c1"), tmp.path().join("c2"));
    synth(&c1, "1");
    synth(&c2, "2");
    let missing = bench(&["stats", "--corpus", p(&tmp.path().join("nope"))]);
    assert_eq!(missing.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "missing_subset");

    assert_eq!(bench(&["train", "--corpus", p(&c1), "--lambda", "0", "--out", "x"]).status.code(), Some(2));
    assert_eq!(bench(&["train", "--corpus", p(&c1), "--ngram-min", "0", "--out", "x"]).status.code(), Some(2));

    let model = tmp.path().join("m.json");
    ok(&["train", "--corpus", p(&c1), "--ngram-min", "3", "--out", p(&model)]);
    let out = tmp.path().join("r");
    ok(&["evaluate", "--corpus", p(&c1), "--model-file", p(&model), "--out", p(&out)]);
    let mismatch = bench(&["evaluate", "--corpus", p(&c2), "--model-file", p(&model), "--out", p(&out)]);
    assert_eq!(mismatch.status.code(), Some(4));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(&corpus, "3");
    let cfg = tmp.path().join("run.conf");
    std::fs::write(&cfg, format!("corpus = {}\nngram-min = 3\nlambda = 0.001\ntask = ro_topic\n", p(&corpus))).unwrap();
    let out = tmp.path().join("r");
    ok(&["evaluate", "--config", p(&cfg), "--lambda", "0.01", "--out", p(&out)]);
    let reports: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("reports.json")).unwrap()).unwrap();
    assert_eq!(reports[0]["task"], "ro_topic");
    assert_eq!(reports[0]["config"]["ngram_min"], "3");
    assert_eq!(reports[0]["config"]["lambda"], "1e-2");
}

#[test]
fn features_on_two_disjoint_documents() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("c");
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("train.tsv"), "a\tMD\tculture\tabc\nb\tRO\tculture\txyz\n").unwrap();
    std::fs::write(dir.join("validation.tsv"), "c\tMD\tculture\tab\nd\tRO\tculture\txy\n").unwrap();
    std::fs::write(dir.join("test.tsv"), "e\tMD\tculture\tbc\nf\tRO\tculture\tyz\n").unwrap();
    let model = tmp.path().join("m.json");
    ok(&["train", "--corpus", p(&dir), "--ner", "keep", "--ngram-min", "1", "--ngram-max", "2", "--out", p(&model)]);
    let out = ok(&["features", "--corpus", p(&dir), "--model-file", p(&model), "--k", "5"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let md: Vec<&str> = text.lines().filter(|l| l.starts_with("MD\t")).collect();
    let ro: Vec<&str> = text.lines().filter(|l| l.starts_with("RO\t")).collect();
    // each document has five grams of length 1..=2, all private to it
    assert_eq!(md.len(), 5);
    assert_eq!(ro.len(), 5);
    let grams = |rows: &[&str]| rows.iter().map(|l| l.split('\t').nth(2).unwrap().to_string()).collect::<Vec<_>>();
    assert!(grams(&md).iter().all(|g| g.chars().all(|c| "abc".contains(c))));
    assert!(grams(&ro).iter().all(|g| g.chars().all(|c| "xyz".contains(c))));
}

#[test]
fn report_merges_external_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("c");
    synth(&corpus, "4");
    let out = tmp.path().join("r");
    ok(&["evaluate", "--corpus", p(&corpus), "--ngram-min", "3", "--out", p(&out)]);
    let mut cnn: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("reports.json")).unwrap()).unwrap();
    for r in cnn.as_array_mut().unwrap() {
        r["model"] = "cnn".into();
    }
    let cnn_path = tmp.path().join("cnn.json");
    std::fs::write(&cnn_path, serde_json::to_string(&cnn).unwrap()).unwrap();
    let merged = ok(&["report", p(&out.join("reports.json")), p(&cnn_path), "--format", "markdown"]);
    let text = String::from_utf8(merged.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("| krr |")).count(), 1);
    assert_eq!(text.lines().filter(|l| l.contains("| cnn |")).count(), 1);
}
