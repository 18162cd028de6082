use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gec_combine::edits::{apply_edits, emit_m2, parse_m2, M2Sentence};
use gec_combine::synth::{clean_corpus, SynthConfig, SynthCorpus};
use tempfile::TempDir;

const SOURCE: &str = "To sum it up I still consider having their own car is way more safe and convinient .";
const CORRECTION: &str = "To sum up , I still consider having your own car way more safe and convenient .";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gec-combine"));
    c.env_remove("GEC_COMBINE_SCORER_ENDPOINT");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

/// Source, per-system hypotheses, gold M2 and an LM corpus for a small
/// synthetic benchmark.
struct Bench {
    dir: TempDir,
    source: String,
    systems: Vec<String>,
    gold: String,
    clean: String,
    corpus: SynthCorpus,
}

fn bench(sentences: usize, seed: u64) -> Bench {
    let dir = TempDir::new().unwrap();
    let corpus = SynthCorpus::generate(&SynthConfig { sentences, seed, ..SynthConfig::default() });
    let join = |it: Vec<String>| it.into_iter().map(|s| s + "\n").collect::<String>();
    let source = write(dir.path(), "source.txt", &join(corpus.sentences.iter().map(|s| s.source.to_string()).collect()));
    let systems = corpus
        .systems
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let text = join(corpus.sentences.iter().map(|s| s.hypotheses[i].to_string()).collect());
            write(dir.path(), &format!("{name}.txt"), &text)
        })
        .collect();
    let m2: Vec<M2Sentence> =
        corpus.sentences.iter().map(|s| M2Sentence::from_edits(s.source.clone(), 0, &s.gold)).collect();
    let gold = write(dir.path(), "gold.m2", &emit_m2(&m2));
    let clean = write(dir.path(), "clean.txt", &join(clean_corpus(1500, 99).iter().map(|s| s.to_string()).collect()));
    Bench { dir, source, systems, gold, clean, corpus }
}

impl Bench {
    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }

    fn system_args(&self) -> Vec<String> {
        self.systems.iter().flat_map(|s| ["--system".to_owned(), s.clone()]).collect()
    }

    fn lm(&self) -> String {
        let lm = self.path("lm.txt");
        stdout(&run(&["lm-train", "--corpus", &self.clean, "--output", &lm]));
        lm
    }
}

#[test]
fn extract_edits_reproduces_worked_example() {
    let dir = TempDir::new().unwrap();
    let src = write(dir.path(), "src.txt", &format!("{SOURCE}\n"));
    let hyp = write(dir.path(), "hyp.txt", &format!("{CORRECTION}\n"));
    let m2 = stdout(&run(&["extract-edits", "--source", &src, "--hypothesis", &hyp]));
    let a_lines: Vec<&str> = m2.lines().filter(|l| l.starts_with("A ")).collect();
    let spans: Vec<String> = a_lines
        .iter()
        .map(|l| {
            let f: Vec<&str> = l[2..].split("|||").collect();
            format!("{} {}", f[0], f[2])
        })
        .collect();
    assert_eq!(spans, ["2 3 ", "4 4 ,", "8 9 your", "11 12 ", "16 17 convenient"]);
}

#[test]
fn extract_edits_round_trips_and_handles_identity() {
    let b = bench(30, 5);
    let out = b.path("out.m2");
    stdout(&run(&["extract-edits", "--source", &b.source, "--hypothesis", &b.systems[0], "--output", &out]));
    let parsed = parse_m2(&fs::read_to_string(&out).unwrap()).unwrap();
    let rebuilt: String = parsed
        .iter()
        .map(|s| {
            let edits = s.gold_edits().remove(&0).unwrap_or_default();
            apply_edits(&s.source, &edits).unwrap().to_string() + "\n"
        })
        .collect();
    assert_eq!(rebuilt, fs::read_to_string(&b.systems[0]).unwrap());

    let same = stdout(&run(&["extract-edits", "--source", &b.source, "--hypothesis", &b.source]));
    let a_lines: Vec<&str> = same.lines().filter(|l| l.starts_with("A ")).collect();
    assert_eq!(a_lines.len(), 30);
    assert!(a_lines.iter().all(|l| l.starts_with("A -1 -1|||noop|||")));
}

#[test]
fn misaligned_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let src = write(dir.path(), "a.txt", "a b\nc d\n");
    let hyp = write(dir.path(), "b.txt", "a b\n");
    let o = run(&["extract-edits", "--source", &src, "--hypothesis", &hyp]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn missing_file_exits_4() {
    let o = run(&["extract-edits", "--source", "/nonexistent/a", "--hypothesis", "/nonexistent/b"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unreachable_scorer_exits_3() {
    let b = bench(3, 1);
    let o = run(&["combine", "--source", &b.source, "--system", &b.systems[0], "--scorer", "external", "--endpoint", "tcp:127.0.0.1:1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = bin()
        .args(["combine", "--source", &b.source, "--system", &b.systems[0], "--scorer", "external"])
        .env("GEC_COMBINE_SCORER_ENDPOINT", "cmd:/nonexistent/scorer")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn combine_with_one_system_and_its_own_oracle_returns_it() {
    let b = bench(40, 2);
    let m2 = b.path("sys1.m2");
    stdout(&run(&["extract-edits", "--source", &b.source, "--hypothesis", &b.systems[0], "--output", &m2]));
    let out = stdout(&run(&[
        "combine", "--source", &b.source, "--system", &b.systems[0], "--scorer", "oracle", "--gold", &m2, "--alpha", "0",
        "--beta", "0",
    ]));
    assert_eq!(out, fs::read_to_string(&b.systems[0]).unwrap());
}

#[test]
fn combine_without_edits_returns_source() {
    let b = bench(20, 3);
    let out = stdout(&run(&["combine", "--source", &b.source, "--system", &format!("only={}", b.source), "--scorer", "uniform"]));
    assert_eq!(out, fs::read_to_string(&b.source).unwrap());
}

#[test]
fn beta_needs_edit_classifier() {
    let b = bench(5, 1);
    let o = run(&["combine", "--source", &b.source, "--system", &b.systems[0], "--scorer", "uniform", "--beta", "0.3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--esc"));
    let o = run(&["combine", "--source", &b.source, "--system", &b.systems[0], "--scorer", "uniform", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn roster_mismatch_falls_back_to_beta_zero() {
    let b = bench(60, 4);
    let esc = b.path("esc.json");
    let mut args = vec!["train-esc".to_owned(), "--gold".into(), b.gold.clone(), "--output".into(), esc.clone()];
    args.extend(b.system_args());
    stdout(&bin().args(&args).output().unwrap());
    let base = ["combine", "--source", &b.source, "--scorer", "uniform", "--esc", &esc];
    let o = bin().args(base).args(["--system", &b.systems[0], "--system", &b.systems[1], "--beta", "0.3"]).output().unwrap();
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let plain = bin().args(base).args(["--system", &b.systems[0], "--system", &b.systems[1]]).output().unwrap();
    assert_eq!(o.stdout, plain.stdout);
    let o = bin().args(base).args(b.system_args()).args(["--beta", "0.3"]).output().unwrap();
    assert!(o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn evaluate_and_oracle_reports() {
    let b = bench(80, 6);
    let reference = write(
        b.dir.path(),
        "ref.txt",
        &b.corpus.sentences.iter().map(|s| s.reference.to_string() + "\n").collect::<String>(),
    );
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["evaluate", "--hypothesis", &reference, "--gold", &b.gold, "--json"]))).unwrap();
    assert_eq!(v["f05"], 1.0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "evaluate", "--hypothesis", &reference, "--gold", &b.gold, "--baseline", &b.systems[0], "--samples", "100",
        "--json",
    ])))
    .unwrap();
    assert_eq!(v["bootstrap_p"], 0.0);
    let mut args = vec!["oracle".to_owned(), "--gold".into(), b.gold.clone(), "--json".into()];
    args.extend(b.system_args());
    let v: serde_json::Value = serde_json::from_str(&stdout(&bin().args(&args).output().unwrap())).unwrap();
    assert_eq!(v["precision"], 1.0);
}

#[test]
fn correlate_perfect_ranking() {
    let dir = TempDir::new().unwrap();
    let h = write(dir.path(), "h.txt", "1\n2\n3\n4\n5\n");
    let m = write(dir.path(), "m.txt", "0.1\n0.4\n0.5\n0.9\n2.0\n");
    let n = write(dir.path(), "n.txt", "0.3\n0.1\n0.5\n0.9\n0.7\n");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["correlate", "--human", &h, "--metric", &m, "--json"]))).unwrap();
    assert_eq!(v["spearman"][0], 1.0);
    let close = write(dir.path(), "c.txt", "0.1\n0.4\n0.5\n2.0\n0.9\n");
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["correlate", "--human", &h, "--metric", &close, "--metric", &n, "--json"])))
            .unwrap();
    assert!(v["williams"]["t"].as_f64().unwrap() > 0.0);
}

#[test]
fn dump_config_round_trips() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.toml", "seed = 9\n[combiner]\nalpha = 0.25\n[train]\ngamma = 0.5\n");
    let first = stdout(&run(&["dump-config", "--config", &cfg, "--workers", "3"]));
    assert!(first.contains("alpha = 0.25") && first.contains("workers = 3") && first.contains("seed = 9"));
    let again = write(dir.path(), "again.toml", &first);
    assert_eq!(stdout(&run(&["dump-config", "--config", &again])), first);
    let bad = write(dir.path(), "bad.toml", "[combiner]\nbeam = 3\n");
    assert_eq!(run(&["dump-config", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn training_pipeline_and_scorers() {
    let b = bench(60, 7);
    let lm = b.lm();
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["fluency", "--lm", &lm, "--input", &b.source, "--json"]))).unwrap();
    let src_ppl = v["median_perplexity"].as_f64().unwrap();
    let clean: String = b.corpus.sentences.iter().map(|s| s.reference.to_string() + "\n").collect();
    let clean = write(b.dir.path(), "ref.txt", &clean);
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&run(&["fluency", "--lm", &lm, "--input", &clean, "--json"]))).unwrap();
    assert!(v["median_perplexity"].as_f64().unwrap() < src_ppl);

    let qe = b.path("qe.json");
    let mut args = vec!["train-qe".to_owned(), "--gold".into(), b.gold.clone(), "--lm".into(), lm.clone()];
    args.extend(["--output".into(), qe.clone(), "--json".into()]);
    args.extend(b.system_args());
    let v: serde_json::Value = serde_json::from_str(&stdout(&bin().args(&args).args(["--config", &write(b.dir.path(), "t.toml", "[train]\nepochs = 20\n")]).output().unwrap())).unwrap();
    assert!(v["final_loss"].as_f64().unwrap() < v["initial_loss"].as_f64().unwrap());

    for (scorer, model) in [("ngram", &lm), ("labeler", &qe)] {
        let out = stdout(&bin()
            .args(["combine", "--source", &b.source, "--scorer", scorer, "--model", model])
            .args(b.system_args())
            .output()
            .unwrap());
        assert_eq!(out.lines().count(), 60);
        let out = stdout(&bin()
            .args(["rerank", "--source", &b.source, "--scorer", scorer, "--model", model, "--json"])
            .args(b.system_args())
            .output()
            .unwrap());
        assert_eq!(out.lines().count(), 60);
    }
}
