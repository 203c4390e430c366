//! Drives the installed binary end to end over a small kinship fixture.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_kgbench");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawning kgbench")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

/// Twelve married couples (symmetric edges), four mutual brothers, and
/// three children with one father and three uncles: enough structure for a
/// symmetry rule and an uncle/father composition.
fn family_tsv() -> String {
    let mut lines = Vec::new();
    for i in 0..12 {
        lines.push(format!("h{i}\tmarriedTo\tw{i}"));
        lines.push(format!("w{i}\tmarriedTo\th{i}"));
    }
    let brothers = ["b0", "b1", "b2", "b3"];
    for x in brothers {
        for y in brothers {
            if x != y {
                lines.push(format!("{x}\tbrotherOf\t{y}"));
            }
        }
    }
    for kid in ["k0", "k1", "k2"] {
        lines.push(format!("b0\tfatherOf\t{kid}"));
        for uncle in &brothers[1..] {
            lines.push(format!("{uncle}\tuncleOf\t{kid}"));
        }
    }
    lines.join("\n") + "\n"
}

fn write_fixture(dir: &Path) -> String {
    let graph = dir.join("graph.tsv");
    fs::write(&graph, family_tsv()).expect("writing fixture graph");
    graph.to_string_lossy().into_owned()
}

fn mine_fixture(dir: &Path) -> (String, String) {
    let graph = write_fixture(dir);
    let rules = dir.join("rules.tsv").to_string_lossy().into_owned();
    let output = run(&["mine", &graph, "--out", &rules]);
    assert!(output.status.success(), "mine failed: {}", stderr_of(&output));
    (graph, rules)
}

#[test]
fn mine_prints_histogram_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, rules) = mine_fixture(dir.path());

    let stdout = stdout_of(&run(&["mine", &graph, "--out", &rules]));
    for header in ["# preset: family", "# max_length: 3", "# min_confidence: 3/10"] {
        assert!(stdout.contains(header), "missing `{header}` in:\n{stdout}");
    }
    for bucket in ["Symmetry", "Inversion", "Hierarchy", "Composition", "Other"] {
        assert!(stdout.contains(bucket), "histogram lacks {bucket}:\n{stdout}");
    }

    let second = dir.path().join("rules2.tsv");
    let output = run(&["mine", &graph, "--out", second.to_str().unwrap()]);
    assert!(output.status.success());
    assert_eq!(
        fs::read(&rules).unwrap(),
        fs::read(&second).unwrap(),
        "rule file is not deterministic"
    );
}

#[test]
fn mine_rejects_short_max_len() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_fixture(dir.path());
    let output = run(&["mine", &graph, "--max-len", "1"]);
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("max_length"), "stderr: {}", stderr_of(&output));
}

#[test]
fn build_writes_consistent_deterministic_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, rules) = mine_fixture(dir.path());

    let bundle = dir.path().join("bundle");
    let args = |out: &Path| {
        vec![
            "build".to_owned(),
            graph.clone(),
            "--rules".to_owned(),
            rules.clone(),
            "--out".to_owned(),
            out.to_string_lossy().into_owned(),
            "--seed".to_owned(),
            "5".to_owned(),
        ]
    };
    let output = run(&args(&bundle).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(output.status.success(), "build failed: {}", stderr_of(&output));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("manifest.json")).unwrap()).unwrap();
    let complete = manifest["complete_triples"].as_u64().unwrap();
    let incomplete = manifest["incomplete_triples"].as_u64().unwrap();
    let removed = manifest["removal_count"].as_u64().unwrap();
    assert_eq!(removed, complete - incomplete);
    assert_eq!(manifest["seed"].as_u64(), Some(5));

    let files = [
        "complete.tsv",
        "incomplete.tsv",
        "train.jsonl",
        "validation.jsonl",
        "test.jsonl",
        "manifest.json",
    ];
    for file in files {
        assert!(bundle.join(file).exists(), "{file} missing from bundle");
    }

    let again = dir.path().join("bundle2");
    let output = run(&args(&again).iter().map(String::as_str).collect::<Vec<_>>());
    assert!(output.status.success());
    for file in files {
        assert_eq!(
            fs::read(bundle.join(file)).unwrap(),
            fs::read(again.join(file)).unwrap(),
            "{file} differs between identical builds"
        );
    }
}

#[test]
fn build_with_tau_one_drops_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, rules) = mine_fixture(dir.path());
    let bundle = dir.path().join("bundle");
    let output = run(&[
        "build",
        &graph,
        "--rules",
        &rules,
        "--out",
        bundle.to_str().unwrap(),
        "--tau",
        "1.0",
    ]);
    assert!(output.status.success(), "build failed: {}", stderr_of(&output));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["question_count"], manifest["questions_before_balancing"]);
}

#[test]
fn llm_generator_without_endpoint_or_cache_fails_before_work() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, rules) = mine_fixture(dir.path());
    let bundle = dir.path().join("bundle");
    let output = Command::new(BIN)
        .args([
            "build",
            &graph,
            "--rules",
            &rules,
            "--out",
            bundle.to_str().unwrap(),
            "--generator",
            "llm",
        ])
        .env_remove("KGBENCH_LLM_ENDPOINT")
        .output()
        .expect("spawning kgbench");
    assert!(!output.status.success());
    assert!(
        stderr_of(&output).contains("KGBENCH_LLM_ENDPOINT"),
        "stderr: {}",
        stderr_of(&output)
    );
    assert!(!bundle.join("manifest.json").exists(), "bundle written despite config error");
}

fn build_fixture_bundle(dir: &Path) -> std::path::PathBuf {
    let (graph, rules) = mine_fixture(dir);
    let bundle = dir.join("bundle");
    let output = run(&["build", &graph, "--rules", &rules, "--out", bundle.to_str().unwrap()]);
    assert!(output.status.success(), "build failed: {}", stderr_of(&output));
    bundle
}

fn gold_predictions(bundle: &Path) -> String {
    let mut rows = String::new();
    for split in ["train.jsonl", "validation.jsonl", "test.jsonl"] {
        let body = fs::read_to_string(bundle.join(split)).unwrap();
        for line in body.lines().filter(|l| !l.trim().is_empty()) {
            let q: serde_json::Value = serde_json::from_str(line).unwrap();
            let answers: Vec<String> = q["answers"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| a.as_str().unwrap().to_owned())
                .collect();
            rows.push_str(&format!("{}\t{}\n", q["id"].as_str().unwrap(), answers.join(", ")));
        }
    }
    rows
}

#[test]
fn evaluating_gold_as_predictions_scores_perfectly() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_fixture_bundle(dir.path());
    let predictions = dir.path().join("predictions.tsv");
    fs::write(&predictions, gold_predictions(&bundle)).unwrap();

    let output = run(&[
        "evaluate",
        bundle.to_str().unwrap(),
        predictions.to_str().unwrap(),
        "--split",
        "all",
    ]);
    assert!(output.status.success(), "evaluate failed: {}", stderr_of(&output));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("report.json")).unwrap()).unwrap();
    for metric in ["hits_any", "hits_hard", "precision", "recall", "f1"] {
        assert_eq!(
            report["metrics"][metric].as_f64(),
            Some(1.0),
            "{metric} should be perfect on gold predictions"
        );
    }
    assert!(stdout_of(&output).contains("hits_any"));
}

#[test]
fn evaluate_rejects_unknown_question_ids() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_fixture_bundle(dir.path());
    let predictions = dir.path().join("predictions.tsv");
    fs::write(&predictions, "q99999\tsomebody\n").unwrap();

    let output = run(&[
        "evaluate",
        bundle.to_str().unwrap(),
        predictions.to_str().unwrap(),
        "--split",
        "all",
    ]);
    assert!(!output.status.success());
    assert!(stderr_of(&output).contains("q99999"), "stderr: {}", stderr_of(&output));
}

#[test]
fn stats_shows_both_views_and_partition() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = build_fixture_bundle(dir.path());
    let output = run(&["stats", bundle.to_str().unwrap()]);
    assert!(output.status.success(), "stats failed: {}", stderr_of(&output));
    let stdout = stdout_of(&output);
    assert!(stdout.contains("family-complete"), "stdout: {stdout}");
    assert!(stdout.contains("family-incomplete"), "stdout: {stdout}");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(bundle.join("manifest.json")).unwrap()).unwrap();
    let counts = manifest["split_counts"].as_array().unwrap();
    let total: u64 = counts.iter().map(|c| c.as_u64().unwrap()).sum();
    assert_eq!(Some(total), manifest["question_count"].as_u64());
}

#[test]
fn relabel_is_seeded_and_structure_preserving() {
    let dir = tempfile::tempdir().unwrap();
    let graph_path = write_fixture(dir.path());
    let first = dir.path().join("anon1.tsv");
    let second = dir.path().join("anon2.tsv");
    let map = dir.path().join("map.tsv");

    for out in [&first, &second] {
        let output = run(&[
            "relabel",
            &graph_path,
            "--scheme",
            "private-id",
            "--seed",
            "3",
            "--out",
            out.to_str().unwrap(),
            "--map",
            map.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "relabel failed: {}", stderr_of(&output));
    }
    assert_eq!(
        fs::read(&first).unwrap(),
        fs::read(&second).unwrap(),
        "same seed must give the same relabeling"
    );

    let original = kgbench::kg::load_graph_path(&graph_path).unwrap();
    let relabeled = kgbench::kg::load_graph_path(&first).unwrap();
    assert_eq!(original.len(), relabeled.len());
    assert_eq!(original.entity_count(), relabeled.entity_count());
    for p in original.predicates() {
        let label = original.predicate_label(p);
        let mirrored = relabeled.predicate(label).expect("predicate survives relabel");
        assert_eq!(
            original.triples_with_p(p).len(),
            relabeled.triples_with_p(mirrored).len(),
            "per-predicate count changed for {label}"
        );
    }
    let map_lines = fs::read_to_string(&map).unwrap().lines().count();
    assert_eq!(map_lines, original.entity_count(), "mapping must cover every entity");
}
