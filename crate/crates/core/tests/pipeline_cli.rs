use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use synthcurate::attribute_reasoning::{build_summary_prompt, AttributeSchema, PromptTemplate};
use synthcurate::corpus_io::{
    corpus_fingerprint, load_corpus, save_corpus, save_embeddings, Corpus, EmbeddingMatrix, TextRecord,
};
use synthcurate::gp_sampler::read_batches;
use synthcurate::pipeline::{Metrics, RunManifest};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_synthcurate"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--config")
        .arg(dir.join("config.toml"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn texts_corpus(n: usize) -> Corpus {
    let words = ["good", "bad", "fine", "awful", "great", "poor", "superb", "dire"];
    Corpus::new(
        (0..n)
            .map(|i| {
                let label = if i % 2 == 0 { "positive" } else { "negative" };
                let text = format!("{} movie number {i} {}", words[i % 8], words[(i * 3) % 8]);
                TextRecord::new(format!("r{i}"), text, label)
            })
            .collect(),
        None,
    )
    .unwrap()
}

/// Hashed-embedding project around `corpus` with extra TOML appended.
fn setup(corpus: &Corpus, extra: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    save_corpus(dir.path().join("corpus.jsonl"), corpus).unwrap();
    let config = format!(
        "[paths]\ncorpus = \"corpus.jsonl\"\noutput_dir = \"out\"\n[embedder]\ndim = 32\n{extra}"
    );
    std::fs::write(dir.path().join("config.toml"), config).unwrap();
    dir
}

/// Six 2-D points in two tight clusters with a matching embedding file.
fn two_cluster_setup(extra_sampler: &str) -> tempfile::TempDir {
    let corpus = texts_corpus(6);
    let dir = tempfile::tempdir().unwrap();
    save_corpus(dir.path().join("corpus.jsonl"), &corpus).unwrap();
    let rows = [[0.0, 0.0], [0.01, 0.0], [0.02, 0.0], [10.0, 0.0], [10.01, 0.0], [10.02, 0.0]];
    let m = EmbeddingMatrix::from_rows_f64(&rows, corpus_fingerprint(&corpus)).unwrap();
    save_embeddings(dir.path().join("emb.bin"), &m).unwrap();
    let config = format!(
        "[paths]\ncorpus = \"corpus.jsonl\"\nembeddings = \"emb.bin\"\ngenerated_embeddings = \"gen.bin\"\noutput_dir = \"out\"\n\
         [kernel]\ntau = 1.0\n[sampler]\nk = 3\nsigma = 0.5\n{extra_sampler}\n"
    );
    std::fs::write(dir.path().join("config.toml"), config).unwrap();
    dir
}

fn out(dir: &tempfile::TempDir) -> PathBuf {
    dir.path().join("out")
}

#[test]
fn sample_two_clusters() {
    let dir = two_cluster_setup("");
    let o = run(dir.path(), &["sample"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let corpus = load_corpus(dir.path().join("corpus.jsonl")).unwrap();
    let batches = read_batches(out(&dir).join("batches.jsonl"), &corpus).unwrap();
    assert_eq!(batches.len(), 2);
    let variance = std::fs::read_to_string(out(&dir).join("variance.csv")).unwrap();
    assert_eq!(variance.lines().count(), 1 + 3 * 6);
    RunManifest::load(&out(&dir)).unwrap().verify(&out(&dir)).unwrap();
}

#[test]
fn sample_respects_max_rounds() {
    let dir = two_cluster_setup("max_rounds = 1");
    assert!(run(dir.path(), &["sample"]).status.success());
    let corpus = load_corpus(dir.path().join("corpus.jsonl")).unwrap();
    assert_eq!(read_batches(out(&dir).join("batches.jsonl"), &corpus).unwrap().len(), 1);
}

#[test]
fn missing_embeddings_is_a_stage_failure() {
    let dir = two_cluster_setup("");
    std::fs::remove_file(dir.path().join("emb.bin")).unwrap();
    let o = run(dir.path(), &["sample"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`sample`"), "{}", stderr(&o));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = setup(&texts_corpus(10), "[sampler]\nsigma = 2.0\n");
    let o = run(dir.path(), &["sample"]);
    assert_eq!(o.status.code(), Some(1));
    let dir = setup(&texts_corpus(10), "[sampler]\nk = 2\n");
    assert!(run(dir.path(), &["sample"]).status.success());
    let o = run(dir.path(), &["generate"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("endpoint"));
}

#[test]
fn later_stage_without_inputs_fails() {
    let dir = setup(&texts_corpus(10), "");
    let o = run(dir.path(), &["--mock", "generate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`generate`"));
}

#[test]
fn failed_round_is_recorded_and_skipped() {
    let corpus = texts_corpus(12);
    let dir = setup(
        &corpus,
        "[sampler]\nk = 3\nmax_rounds = 3\n[generator]\nretries = 0\nmock = true\nmock_fixtures = \"mock.jsonl\"\n",
    );
    assert!(run(dir.path(), &["sample"]).status.success());
    let batches = read_batches(out(&dir).join("batches.jsonl"), &corpus).unwrap();
    assert_eq!(batches.len(), 3);
    let demos: Vec<&TextRecord> = batches[1].members.iter().map(|&i| corpus.get(i).unwrap()).collect();
    let schema = AttributeSchema::builtin("sst2").unwrap();
    let prompt = build_summary_prompt(&demos, &schema, "negative", &PromptTemplate::default_summarize()).unwrap();
    let entry = serde_json::json!({"prompt": prompt, "response": "no idea"});
    std::fs::write(dir.path().join("mock.jsonl"), format!("{entry}\n")).unwrap();

    let o = run(dir.path(), &["generate"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let manifest = RunManifest::load(&out(&dir)).unwrap();
    let rounds = manifest.stages["generate"].rounds.clone().unwrap();
    assert_eq!((rounds.ok, rounds.failed), (5, 1));
    assert_eq!(rounds.failures[0].round, 1);
    assert_eq!(rounds.failures[0].label, "negative");
    let gen = load_corpus(out(&dir).join("generated.jsonl")).unwrap();
    assert_eq!(gen.len(), 50);
    assert!(gen.records().iter().all(|r| r.meta["summary_id"] != "s1-0"));
}

#[test]
fn all_rounds_failing_exits_nonzero() {
    let dir = setup(
        &texts_corpus(10),
        "[sampler]\nk = 2\nmax_rounds = 2\n[generator]\nmock = true\nretries = 1\nsummarize_template = \"s.txt\"\n",
    );
    // The mock only answers prompts laid out like the bundled template.
    std::fs::write(
        dir.path().join("s.txt"),
        "{demonstrations}\nDescribe {label} samples by:\n{attributes}\n",
    )
    .unwrap();
    assert!(run(dir.path(), &["sample"]).status.success());
    let o = run(dir.path(), &["generate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("all 4 rounds failed"), "{}", stderr(&o));
}

#[test]
fn identical_generated_corpus_needs_no_correction() {
    let corpus = texts_corpus(10);
    let dir = setup(&corpus, "");
    std::fs::create_dir_all(out(&dir)).unwrap();
    save_corpus(out(&dir).join("generated.jsonl"), &corpus).unwrap();
    for stage in ["align", "resample", "evaluate"] {
        let o = run(dir.path(), &[stage]);
        assert!(o.status.success(), "{stage}: {}", stderr(&o));
    }
    let loss = std::fs::read_to_string(out(&dir).join("loss.csv")).unwrap();
    for line in loss.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v < 1e-20);
    }
    let weights = std::fs::read_to_string(out(&dir).join("weights.csv")).unwrap();
    for line in weights.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, 1.0);
    }
    let metrics: Metrics =
        serde_json::from_str(&std::fs::read_to_string(out(&dir).join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics.sw_ori_gen, Some(0.0));
    assert_eq!(metrics.vocab_generated, Some(metrics.vocab_real));
}

#[test]
fn verify_catches_edited_artifact() {
    let dir = two_cluster_setup("");
    assert!(run(dir.path(), &["sample"]).status.success());
    assert!(run(dir.path(), &["verify"]).status.success());
    std::fs::write(out(&dir).join("batches.jsonl"), "{}\n").unwrap();
    let o = run(dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("batches.jsonl"));
}
