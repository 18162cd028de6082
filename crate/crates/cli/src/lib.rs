//! Command-line front end for `gec-combine`: corpus ingestion, config
//! handling and orchestration of extraction, training, combination and
//! evaluation.

pub mod config;
pub mod error;
pub mod io;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gec_combine::combine::{combine_corpus, oracle_combine, rerank};
use gec_combine::edits::{apply_edits, emit_m2, extract_edits, Edit, EditUnion, M2Sentence, TokenSeq};
use gec_combine::eval::{bootstrap_significance, corpus_f05, fluency_report, spearman, williams_test};
use gec_combine::par::Execution;
use gec_combine::scoring::external::ENDPOINT_ENV;
use gec_combine::scoring::{
    Endpoint, ExternalScorer, NgramLm, NgramScorer, ReferenceOracleScorer, Scorer, UniformScorer,
};
use gec_combine::training::{
    train_edit_classifier, train_token_labeler, EditClassifier, TokenLabeler, TrainingExample,
};
use serde_json::json;

pub use config::{RunConfig, ScorerKind};
pub use error::{CliError, Result};
use io::{check_aligned, lines, read_m2, read_sentences, read_systems, read_text, write_output, SystemSpec};

#[derive(Debug, Parser)]
#[command(name = "gec-combine", version, about = "Combine grammatical error correction systems by quality estimation")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Seed for every randomized step.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// TOML run configuration; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; 0 uses all cores, 1 runs sequentially.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    #[arg(long, value_enum)]
    pub scorer: Option<ScorerKind>,
    /// Model artifact for the ngram or labeler scorer.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// External scorer endpoint (`tcp:host:port` or `cmd:program args`).
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Gold M2, required by the oracle scorer.
    #[arg(long)]
    pub gold: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CombinerArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub beam_size: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Align source and hypothesis files and print M2.
    ExtractEdits {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        hypothesis: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Combine base-system hypotheses with beam search.
    Combine {
        #[arg(long)]
        source: PathBuf,
        /// Base system as NAME=PATH or PATH; repeat per system.
        #[arg(long = "system", required = true)]
        systems: Vec<SystemSpec>,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[command(flatten)]
        combiner: CombinerArgs,
        /// Edit classifier artifact; required when beta > 0.
        #[arg(long)]
        esc: Option<PathBuf>,
        /// Write the per-sentence JSON-lines report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Pick the best-scored hypothesis (or the source) per sentence.
    Rerank {
        #[arg(long)]
        source: PathBuf,
        #[arg(long = "system", required = true)]
        systems: Vec<SystemSpec>,
        #[command(flatten)]
        scorer: ScorerArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Corpus F0.5 of a hypothesis file against gold M2.
    Evaluate {
        #[arg(long)]
        hypothesis: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Second system for a paired bootstrap test.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Apply exactly the base-system edits that are gold.
    Oracle {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "system", required = true)]
        systems: Vec<SystemSpec>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Train an n-gram language model on a tokenized corpus.
    LmTrain {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.01)]
        k: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train the token labeler on base-system hypotheses and gold M2.
    TrainQe {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "system", required = true)]
        systems: Vec<SystemSpec>,
        /// n-gram model artifact supplying the labeler's features.
        #[arg(long)]
        lm: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Train the edit classifier on base-system edits and gold M2.
    TrainEsc {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "system", required = true)]
        systems: Vec<SystemSpec>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Spearman correlation of metric scores with human scores, plus
    /// Williams' test when two metrics are given.
    Correlate {
        /// One human score per line.
        #[arg(long)]
        human: PathBuf,
        /// One metric score per line; give one or two.
        #[arg(long = "metric", required = true, num_args = 1)]
        metrics: Vec<PathBuf>,
    },
    /// Median per-sentence perplexity of a corpus.
    Fluency {
        #[arg(long)]
        lm: PathBuf,
        #[arg(long)]
        input: PathBuf,
    },
    /// Print the effective configuration as TOML.
    DumpConfig,
}

/// Loads the config file and applies global overrides.
fn base_config(global: &GlobalArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(global.config.as_deref())?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
        cfg.train.seed = seed;
    }
    if let Some(w) = global.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn apply_scorer_args(cfg: &mut RunConfig, args: &ScorerArgs) {
    if let Some(k) = args.scorer {
        cfg.scorer.kind = k;
    }
    if let Some(m) = &args.model {
        cfg.scorer.model = Some(m.clone());
    }
    if let Some(e) = &args.endpoint {
        cfg.scorer.endpoint = Some(e.clone());
    }
}

fn apply_combiner_args(cfg: &mut RunConfig, args: &CombinerArgs) {
    if let Some(a) = args.alpha {
        cfg.combiner.alpha = a;
    }
    if let Some(b) = args.beta {
        cfg.combiner.beta = b;
    }
    if let Some(b) = args.beam_size {
        cfg.combiner.beam_size = b;
    }
}

fn execution(cfg: &RunConfig) -> Execution {
    Execution::with_workers(cfg.workers)
}

fn load_lm(path: &Path) -> Result<NgramLm> {
    NgramLm::from_text(&read_text(path)?).map_err(|e| CliError::Scorer(format!("{}: {e}", path.display())))
}

fn model_path(cfg: &RunConfig) -> Result<&Path> {
    cfg.scorer
        .model
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("scorer {:?} needs --model", cfg.scorer.kind)))
}

fn build_scorer(cfg: &RunConfig, gold: Option<&Path>) -> Result<Box<dyn Scorer>> {
    Ok(match cfg.scorer.kind {
        ScorerKind::Ngram => Box::new(NgramScorer::new(Arc::new(load_lm(model_path(cfg)?)?))),
        ScorerKind::Labeler => {
            let path = model_path(cfg)?;
            let labeler = TokenLabeler::from_json(&read_text(path)?)
                .map_err(|e| CliError::Scorer(format!("{}: {e}", path.display())))?;
            Box::new(labeler)
        }
        ScorerKind::Uniform => Box::new(UniformScorer),
        ScorerKind::Oracle => {
            let gold = gold.ok_or_else(|| CliError::Config("the oracle scorer needs --gold".into()))?;
            let mut oracle = ReferenceOracleScorer::new(ReferenceOracleScorer::DEFAULT_FLOOR);
            for s in read_m2(gold)? {
                for edits in s.gold_edits().into_values() {
                    oracle.add_gold_edits(s.source.clone(), edits);
                }
            }
            Box::new(oracle)
        }
        ScorerKind::External => {
            let text = std::env::var(ENDPOINT_ENV)
                .ok()
                .filter(|v| !v.is_empty())
                .or_else(|| cfg.scorer.endpoint.clone())
                .ok_or_else(|| CliError::Config(format!("external scorer needs --endpoint or {ENDPOINT_ENV}")))?;
            let endpoint: Endpoint = text.parse()?;
            Box::new(ExternalScorer::connect(&endpoint).map_err(|e| CliError::Scorer(e.to_string()))?)
        }
    })
}

fn build_unions(sources: &[TokenSeq], systems: &[(String, Vec<TokenSeq>)]) -> Vec<EditUnion> {
    sources
        .iter()
        .enumerate()
        .map(|(i, src)| {
            let hyps: Vec<(&str, TokenSeq)> = systems.iter().map(|(n, h)| (n.as_str(), h[i].clone())).collect();
            EditUnion::from_hypotheses(src.clone(), &hyps)
        })
        .collect()
}

/// Gold sources and systems read against them.
fn gold_and_systems(gold: &Path, systems: &[SystemSpec]) -> Result<(Vec<M2Sentence>, Vec<(String, Vec<TokenSeq>)>)> {
    let m2 = read_m2(gold)?;
    let systems = read_systems(systems, m2.len())?;
    Ok((m2, systems))
}

fn first_annotator(s: &M2Sentence) -> Vec<Edit> {
    s.gold_edits().into_values().next().unwrap_or_default()
}

fn to_json_line(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("report serializes")
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = base_config(&cli.global)?;
    let as_json = cli.global.json;
    match cli.command {
        Command::ExtractEdits { source, hypothesis, output } => {
            let src = read_sentences(&source)?;
            let hyp = read_sentences(&hypothesis)?;
            check_aligned(&source.display().to_string(), src.len(), &hypothesis.display().to_string(), hyp.len())?;
            let sentences: Vec<M2Sentence> = execution(&cfg)
                .map(&src.iter().zip(&hyp).collect::<Vec<_>>(), |(s, h)| {
                    M2Sentence::from_edits((*s).clone(), 0, &extract_edits(s, h))
                });
            write_output(output.as_deref(), &emit_m2(&sentences))
        }
        Command::Combine { source, systems, scorer, combiner, esc, report, output } => {
            apply_scorer_args(&mut cfg, &scorer);
            apply_combiner_args(&mut cfg, &combiner);
            cfg.validate()?;
            let sources = read_sentences(&source)?;
            let systems = read_systems(&systems, sources.len())?;
            let mut unions = build_unions(&sources, &systems);
            if cfg.combiner.beta > 0.0 {
                let path = esc.ok_or_else(|| {
                    CliError::Config("beta > 0 needs a trained edit classifier (--esc); set beta = 0 to run without one".into())
                })?;
                let classifier = EditClassifier::from_json(&read_text(&path)?)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let roster: Vec<String> = systems.iter().map(|(n, _)| n.clone()).collect();
                if classifier.roster() != roster.as_slice() {
                    eprintln!(
                        "warning: edit classifier roster {:?} does not match systems {:?}; using beta = 0",
                        classifier.roster(),
                        roster
                    );
                    cfg.combiner.beta = 0.0;
                } else {
                    for u in &mut unions {
                        classifier.annotate(u).map_err(|e| CliError::Config(e.to_string()))?;
                    }
                }
            }
            let scorer = build_scorer(&cfg, scorer.gold.as_deref())?;
            let results = combine_corpus(&unions, scorer.as_ref(), &cfg.combiner, execution(&cfg))?;
            let records: Vec<String> = results.iter().map(|r| to_json_line(&r.record)).collect();
            if let Some(path) = &report {
                write_output(Some(path), &lines(records.iter().cloned()))?;
            }
            if as_json {
                write_output(output.as_deref(), &lines(records))
            } else {
                write_output(output.as_deref(), &lines(results.iter().map(|r| r.record.output.clone())))
            }
        }
        Command::Rerank { source, systems, scorer, output } => {
            apply_scorer_args(&mut cfg, &scorer);
            cfg.validate()?;
            let sources = read_sentences(&source)?;
            let systems = read_systems(&systems, sources.len())?;
            let scorer = build_scorer(&cfg, scorer.gold.as_deref())?;
            let floor = cfg.combiner.prob_floor;
            let picks = execution(&cfg).try_map(&sources.iter().enumerate().collect::<Vec<_>>(), |&(i, src)| {
                let hyps: Vec<TokenSeq> = systems.iter().map(|(_, h)| h[i].clone()).collect();
                rerank(src, &hyps, scorer.as_ref(), floor)
            })?;
            let text = if as_json {
                lines(picks.iter().enumerate().map(|(i, p)| {
                    let chosen = systems.get(p.index).map_or("source", |(n, _)| n.as_str());
                    to_json_line(&json!({"index": i, "chosen": chosen, "q": p.q, "output": p.hypothesis.to_string()}))
                }))
            } else {
                lines(picks.iter().map(|p| p.hypothesis.to_string()))
            };
            write_output(output.as_deref(), &text)
        }
        Command::Evaluate { hypothesis, gold, baseline, samples } => {
            let m2 = read_m2(&gold)?;
            let golds: Vec<_> = m2.iter().map(M2Sentence::gold_edits).collect();
            let edits_of = |path: &Path| -> Result<Vec<Vec<Edit>>> {
                let hyp = read_sentences(path)?;
                check_aligned(&gold.display().to_string(), m2.len(), &path.display().to_string(), hyp.len())?;
                Ok(m2.iter().zip(&hyp).map(|(s, h)| extract_edits(&s.source, h)).collect())
            };
            let hyp = edits_of(&hypothesis)?;
            let score = corpus_f05(&hyp, &golds).map_err(|e| CliError::Config(e.to_string()))?;
            let p_value = match &baseline {
                Some(path) => Some(
                    bootstrap_significance(&hyp, &edits_of(path)?, &golds, samples, cfg.seed, execution(&cfg))
                        .map_err(|e| CliError::Config(e.to_string()))?,
                ),
                None => None,
            };
            let text = if as_json {
                let mut v = serde_json::to_value(&score).expect("score serializes");
                if let Some(p) = p_value {
                    v["bootstrap_p"] = json!(p);
                    v["bootstrap_samples"] = json!(samples);
                }
                to_json_line(&v) + "\n"
            } else {
                let mut t = score.to_table();
                if let Some(p) = p_value {
                    t.push_str(&format!("bootstrap p ({samples} samples): {p:.4}\n"));
                }
                t
            };
            write_output(None, &text)
        }
        Command::Oracle { gold, systems, output } => {
            let (m2, systems) = gold_and_systems(&gold, &systems)?;
            let sources: Vec<TokenSeq> = m2.iter().map(|s| s.source.clone()).collect();
            let unions = build_unions(&sources, &systems);
            let chosen: Vec<_> = unions.iter().zip(&m2).map(|(u, s)| oracle_combine(u, &first_annotator(s))).collect();
            let edits: Vec<Vec<Edit>> =
                chosen.iter().zip(&unions).map(|(c, u)| c.edits(u).cloned().collect()).collect();
            let golds: Vec<_> = m2.iter().map(M2Sentence::gold_edits).collect();
            let score = corpus_f05(&edits, &golds).map_err(|e| CliError::Config(e.to_string()))?;
            if let Some(path) = &output {
                write_output(Some(path), &lines(chosen.iter().map(|c| c.realized.to_string())))?;
            }
            let text = if as_json { to_json_line(&score) + "\n" } else { score.to_table() };
            write_output(None, &text)
        }
        Command::LmTrain { corpus, order, k, output } => {
            let sentences = read_sentences(&corpus)?;
            let lm = NgramLm::train(&sentences, order, k).map_err(|e| CliError::Config(e.to_string()))?;
            std::fs::write(&output, lm.to_text()).map_err(|e| CliError::io(&output, e))?;
            let summary = json!({"sentences": sentences.len(), "order": order, "k": k, "vocab": lm.vocab_size()});
            write_output(None, &if as_json {
                to_json_line(&summary) + "\n"
            } else {
                format!("trained order-{order} model on {} sentences, vocabulary {}\n", sentences.len(), lm.vocab_size())
            })
        }
        Command::TrainQe { gold, systems, lm, output } => {
            cfg.validate()?;
            let (m2, systems) = gold_and_systems(&gold, &systems)?;
            let lm = Arc::new(load_lm(&lm)?);
            let mut examples = Vec::new();
            for (i, s) in m2.iter().enumerate() {
                let reference = apply_edits(&s.source, &first_annotator(s))
                    .map_err(|e| CliError::Config(format!("{}: sentence {}: {e}", gold.display(), i + 1)))?;
                for (_, hyps) in &systems {
                    examples.push(TrainingExample::new(s.source.clone(), hyps[i].clone(), &reference));
                }
            }
            let trained = train_token_labeler(examples, lm, &cfg.train).map_err(|e| CliError::Config(e.to_string()))?;
            std::fs::write(&output, trained.labeler.to_json()).map_err(|e| CliError::io(&output, e))?;
            let (first, last) = (trained.curve[0], *trained.curve.last().expect("curve is non-empty"));
            write_output(None, &if as_json {
                to_json_line(&json!({"groups": trained.groups, "initial_loss": first, "final_loss": last})) + "\n"
            } else {
                format!("{} groups, loss {first:.5} -> {last:.5}\n", trained.groups)
            })
        }
        Command::TrainEsc { gold, systems, output } => {
            cfg.validate()?;
            let (m2, systems) = gold_and_systems(&gold, &systems)?;
            let sources: Vec<TokenSeq> = m2.iter().map(|s| s.source.clone()).collect();
            let unions = build_unions(&sources, &systems);
            let gold_sets: Vec<BTreeSet<Edit>> =
                m2.iter().map(|s| s.gold_edits().into_values().flatten().collect()).collect();
            let model = train_edit_classifier(&unions, &gold_sets, &cfg.esc).map_err(|e| CliError::Config(e.to_string()))?;
            std::fs::write(&output, model.to_json()).map_err(|e| CliError::io(&output, e))?;
            let edits: usize = unions.iter().map(EditUnion::len).sum();
            write_output(None, &if as_json {
                to_json_line(&json!({"roster": model.roster(), "edits": edits})) + "\n"
            } else {
                format!("trained on {edits} union edits from {} systems\n", model.roster().len())
            })
        }
        Command::Correlate { human, metrics } => {
            if metrics.len() > 2 {
                return Err(CliError::Config("correlate takes one or two --metric files".into()));
            }
            let read_scores = |path: &Path| -> Result<Vec<f64>> {
                read_text(path)?
                    .lines()
                    .enumerate()
                    .map(|(i, l)| {
                        l.trim().parse::<f64>().map_err(|e| {
                            CliError::Config(format!("{}: line {}: {e}", path.display(), i + 1))
                        })
                    })
                    .collect()
            };
            let h = read_scores(&human)?;
            let ms: Vec<Vec<f64>> = metrics.iter().map(|p| read_scores(p)).collect::<Result<_>>()?;
            let rho = |a: &[f64], b: &[f64]| spearman(a, b).map_err(|e| CliError::Config(e.to_string()));
            let rhos: Vec<f64> = ms.iter().map(|m| rho(&h, m)).collect::<Result<_>>()?;
            let williams = if ms.len() == 2 {
                let r23 = rho(&ms[0], &ms[1])?;
                Some(williams_test(rhos[0], rhos[1], r23, h.len()).map_err(|e| CliError::Config(e.to_string()))?)
            } else {
                None
            };
            write_output(None, &if as_json {
                to_json_line(&json!({"spearman": rhos, "williams": williams})) + "\n"
            } else {
                let mut t = String::new();
                for (p, r) in metrics.iter().zip(&rhos) {
                    t.push_str(&format!("spearman {}: {r:.4}\n", p.display()));
                }
                if let Some(w) = williams {
                    t.push_str(&format!("williams t = {:.4}, dof = {}, p = {:.4}\n", w.t, w.dof, w.p_value));
                }
                t
            })
        }
        Command::Fluency { lm, input } => {
            let lm = load_lm(&lm)?;
            let corpus = read_sentences(&input)?;
            let report = fluency_report(&corpus, &lm, execution(&cfg)).map_err(|e| CliError::Config(e.to_string()))?;
            write_output(None, &if as_json {
                to_json_line(&json!({"median_perplexity": report.median_perplexity, "sentences": report.sentences})) + "\n"
            } else {
                format!("median perplexity {:.3} over {} sentences\n", report.median_perplexity, report.sentences)
            })
        }
        Command::DumpConfig => {
            cfg.validate()?;
            write_output(None, &cfg.to_toml())
        }
    }
}
