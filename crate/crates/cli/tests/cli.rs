use serde_json::Value;
use std::path::{Path, PathBuf};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn lexicon() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/lexicon.jsonl")
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn gso(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gso").chain(args.iter().copied());
    let code = gso_cli::run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn synth(dir: &Path, n: &str, seed: &str) -> PathBuf {
    let out = dir.join(format!("synth-{n}-{seed}.gso.jsonl"));
    let r = gso(&["dataset", "gen-synthetic", "--out", p(&out), "--n", n, "--seed", seed]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    out
}

#[test]
fn forest_build_prints_tree_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("forest.jsonl");
    let r = gso(&["forest", "build", "--lexicon", p(&lexicon()), "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for tree in ["adjective", "verb", "noun"] {
        assert!(r.stdout.contains(tree), "{}", r.stdout);
    }
    // The written forest is itself a valid, fully scored lexicon.
    let again = gso(&["forest", "stats", "--lexicon", p(&out), "--json"]);
    let v: Value = serde_json::from_str(&again.stdout).unwrap();
    assert_eq!(v["total"], 58);
}

#[test]
fn data_dir_is_the_default_output() {
    let dir = tempfile::tempdir().unwrap();
    let r = gso(&["forest", "build", "--data-dir", p(dir.path())]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(dir.path().join("forest.jsonl").exists());
}

#[test]
fn dataset_stats_on_paper_ratio_fixture() {
    let r = gso(&["dataset", "stats", "--in", p(&fixture("paper_ratio.gso.jsonl"))]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("1124") && r.stdout.contains("146") && r.stdout.contains("599"), "{}", r.stdout);
    assert!(r.stdout.contains("7.8%"));
    let d = gso(&["dataset", "stats", "--in", p(&fixture("constant_duration.gso.jsonl"))]);
    assert!(d.stdout.contains("mean 17.82"), "{}", d.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(gso(&["frobnicate"]).code, 2);
    assert_eq!(gso(&["dataset", "stats"]).code, 2);
    assert_eq!(gso(&["eval", "run", "--in", "x", "--algorithm", "perceptron"]).code, 2);
    let missing = gso(&["dataset", "validate", "--in", "/nonexistent.gso.jsonl"]);
    assert_eq!(missing.code, 1);
    assert!(missing.stderr.contains("error["));
    let help = gso(&["--help"]);
    assert_eq!(help.code, 0);
    assert!(help.stdout.contains("serve"));
}

#[test]
fn invalid_dataset_is_a_domain_error_with_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.gso.jsonl");
    std::fs::write(&bad, "{\"gif_id\":\"g\",\"pairs\":[{\"modifier\":\"dog.n.01\",\"noun\":\"cat.n.01\"}],\"label\":\"positive\"}\n").unwrap();
    let r = gso(&["dataset", "validate", "--in", p(&bad), "--json"]);
    assert_eq!(r.code, 1);
    let v: Value = serde_json::from_str(r.stdout.trim()).unwrap();
    assert_eq!(v["error"]["code"], "UnresolvedPair");
    let lenient = gso(&["dataset", "validate", "--in", p(&bad), "--lenient", "--json"]);
    assert_eq!(lenient.code, 0);
    assert_eq!(serde_json::from_str::<Value>(&lenient.stdout).unwrap()["dropped_pairs"], 1);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = std::fs::read(synth(dir.path(), "200", "3")).unwrap();
    let other = dir.path().join("again.gso.jsonl");
    assert_eq!(gso(&["dataset", "gen-synthetic", "--out", p(&other), "--n", "200", "--seed", "3"]).code, 0);
    assert_eq!(a, std::fs::read(&other).unwrap());
    assert_ne!(a, std::fs::read(synth(dir.path(), "200", "4")).unwrap());

    let data = synth(dir.path(), "150", "1");
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let out = dir.path().join(name);
        let r = gso(&["eval", "run", "--in", p(&data), "--algorithm", "rf", "--param", "trees=10", "--k", "3", "--out", p(&out), "--seed", "9"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        reports.push(std::fs::read(out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn suite_paper_format_renders_three_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "150", "2");
    let out = dir.path().join("suite.json");
    let r = gso(&["eval", "suite", "--in", p(&data), "--k", "3", "--algorithms", "nb,smo,logistic", "--paper-format", "--out", p(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for needle in ["Table 1:", "Table 2:", "Table 3a:", "Table 3b:", "Prec.", "Recall", "FScore", "Acc.", "ANP only", "VNP only", "SentiPair"] {
        assert!(r.stdout.contains(needle), "missing {needle}\n{}", r.stdout);
    }
    let report: Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
    assert_eq!(report["cells"].as_array().unwrap().len(), 3 * 2 * 3);
}

#[test]
fn train_then_predict() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "200", "5");
    let model = dir.path().join("model.json");
    let r = gso(&["model", "train", "--in", p(&data), "--algorithm", "nb", "--param", "alpha=0.5", "--out", p(&model)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let preds = dir.path().join("pred.gso.jsonl");
    let r = gso(&["model", "predict", "--in", p(&data), "--model", p(&model), "--out", p(&preds), "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["predictions"].as_array().unwrap().len(), 200);
    assert!(v["accuracy"].as_f64().unwrap() > 0.5);
    assert_eq!(gso(&["dataset", "validate", "--in", p(&preds)]).code, 0);
    let bad = gso(&["model", "train", "--in", p(&data), "--algorithm", "nb", "--param", "alpha=-1", "--out", p(&model)]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("InvalidParams"));
}

#[test]
fn features_and_split() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "120", "6");
    let space = dir.path().join("space.json");
    assert_eq!(gso(&["features", "build", "--in", p(&data), "--out", p(&space), "--representation", "anp"]).code, 0);
    let sel = dir.path().join("sel.json");
    let r = gso(&["features", "select", "--in", p(&data), "--space", p(&space), "--out", p(&sel), "--json"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(!v["selected"].as_array().unwrap().is_empty());
    let folds = dir.path().join("folds");
    let r = gso(&["dataset", "split", "--in", p(&data), "--k", "4", "--out-dir", p(&folds)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(folds.join("fold-03.test.gso.jsonl").exists());
    let pairs = gso(&["pairs", "enumerate", "--kind", "anp", "--max", "5", "--json"]);
    assert_eq!(serde_json::from_str::<Value>(&pairs.stdout).unwrap().as_array().unwrap().len(), 5);
    let search = gso(&["forest", "search", "cu", "--json"]);
    assert_eq!(serde_json::from_str::<Value>(&search.stdout).unwrap()[0]["id"], "cup.n.01");
}
